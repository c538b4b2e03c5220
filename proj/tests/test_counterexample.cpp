#include <gtest/gtest.h>

#include "helpers.hpp"

using namespace ktns;
using namespace ktns::testing;

namespace {

const Grid g(2, 32, 2.0 * pi);

/// Divergence-free shear u = (0, cos(k x)).
Field shear(int k)
{
    Field u(g, 1);
    for (std::size_t p = 0; p < g.size(); ++p) u.at(p, 1) = std::cos(k * g.position(p)[0]);
    return u;
}

std::vector<double> eps_values()
{
    std::vector<double> e;
    for (int i = 0; i < 13; ++i) e.push_back(1e-4 * std::pow(10.0, i / 4.0));
    return e;
}

}  // namespace

TEST(Profile, ShearAmplitudeClosedForm)
{
    for (int k : {1, 2, 3}) {
        Field w = counterexample_profile(shear(k));
        const double lam = k * k;
        const double amp = (std::exp(-lam) - std::exp(-2.0 * lam)) / k;
        for (std::size_t p = 0; p < g.size(); ++p) {
            EXPECT_NEAR(w.at(p, 2), -amp * std::sin(k * g.position(p)[0]), 1e-15);
            EXPECT_EQ(w.at(p, 0) + w.at(p, 1) + w.at(p, 3), 0.0);
        }
    }
    EXPECT_THROW(counterexample_profile(Field(g, 0)), ConfigurationError);
}

TEST(Profile, GradientDataAreRejected)
{
    const TimeGrid time = dyadic_time_grid(4, 8);
    Field grad = gradient(cosine_mode(g, {1, 1, 0}));
    EXPECT_THROW(build_G(grad, time), PreconditionError);
    EXPECT_THROW(build_G(Field(g, 1), time), PreconditionError);
    EXPECT_THROW(build_G(shear(1), TimeGrid::per_decade(1e-2, 4.0, 3)), PreconditionError);
}

TEST(Profile, IndicatorDatumIsBoundedInTinf2)
{
    const TimeGrid time = dyadic_time_grid(8, 10);
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        Field u = leray(smooth_field(g, 1, seed, 3));
        SpaceTimeField G = build_G(u, time);
        for (std::size_t k = 0; k < time.size(); ++k) {
            const bool inside = time.node(k) >= 1.0 - 1e-12 && time.node(k) < 2.0 - 1e-12;
            EXPECT_EQ(sup_norm(G[k]) > 0.0, inside);
        }
        const double n2 = norm_Tinf(G, 2).value;
        EXPECT_LE(n2 * n2, l2_norm(u) * l2_norm(u));
    }
}

TEST(DyadicGrid, ContainsOneAndTwo)
{
    const TimeGrid t = dyadic_time_grid(8, 16);
    EXPECT_NO_THROW(t.index_of(1.0));
    EXPECT_NO_THROW(t.index_of(2.0));
    EXPECT_DOUBLE_EQ(t.t_min(), std::exp2(-16.0));
    EXPECT_NEAR(t.node(1) / t.node(0), std::exp2(1.0 / 8), 1e-14);
}

TEST(Fits, LinearFitAndExponentialIntegral)
{
    auto f = linear_fit({1, 2, 3, 4}, {3, 5, 7, 9});
    EXPECT_NEAR(f[0], 2.0, 1e-14);
    EXPECT_NEAR(f[1], 1.0, 1e-14);
    EXPECT_NEAR(f[2], 1.0, 1e-14);
    // E1(1) by the series -gamma - ln x + sum (-1)^{k+1} x^k / (k k!)
    double series = -0.57721566490153286, term = 1.0;
    for (int k = 1; k < 30; ++k) {
        term *= 1.0 / k;
        series += (k % 2 ? 1.0 : -1.0) * term / k;
    }
    EXPECT_NEAR(exp_integral_e1(1.0), series, 1e-14);
}

TEST(DivergenceScan, GrowsLikeLogWithTheClosedSlope)
{
    const TimeGrid time = dyadic_time_grid(8, 16);
    DivergenceScanReport r = divergence_scan(shear(1), time, eps_values());
    EXPECT_GT(r.r2, 0.99);
    EXPECT_GT(r.ball_r2, 0.99);
    EXPECT_NEAR(r.lambda, 1.0, 1e-12);
    EXPECT_LT(rel_diff(r.slope, r.closed_slope), 0.1);
    EXPECT_LT(rel_diff(r.slope, r.profile_norm2), 0.1);
    for (std::size_t i = 1; i < r.eps.size(); ++i) {
        EXPECT_GT(r.eps[i], r.eps[i - 1]);
        EXPECT_LE(r.q[i], r.q[i - 1]);
    }
    for (std::size_t i = 0; i < r.q.size(); ++i) EXPECT_LT(rel_diff(r.q[i], r.q_closed[i]), 0.05);
}

TEST(DivergenceScan, MixedModesDoubleTheGap)
{
    // u with modes at lambda = 1 and lambda = 4: the slope is the sum of both |w_k|^2
    const TimeGrid time = dyadic_time_grid(8, 16);
    Field u = shear(1) + shear(2);
    DivergenceScanReport mixed = divergence_scan(u, time, eps_values());
    DivergenceScanReport a = divergence_scan(shear(1), time, eps_values());
    DivergenceScanReport b = divergence_scan(shear(2), time, eps_values());
    EXPECT_EQ(mixed.lambda, 0.0);
    EXPECT_LT(rel_diff(mixed.slope, a.slope + b.slope), 0.05);
}

TEST(DivergenceScan, RejectsShortOrMisplacedEps)
{
    const TimeGrid time = dyadic_time_grid(8, 16);
    EXPECT_THROW(divergence_scan(shear(1), time, {1e-2, 1e-1}), PreconditionError);
    EXPECT_THROW(divergence_scan(shear(1), time, {1e-3, 1.5}), PreconditionError);
    EXPECT_THROW(divergence_scan(shear(1), time, {1e-7, 1e-2}), PreconditionError);
}

TEST(Contrast, OtherPiecesStayBounded)
{
    const TimeGrid time = dyadic_time_grid(8, 16);
    json c = contrast_scan(shear(1), time, eps_values());
    EXPECT_LT(c["A1_last_decade_increase"].get<double>(), 0.05);
    EXPECT_EQ(c["R_last_decade_increase"].get<double>(), 0.0);
    EXPECT_GT(c["A2_last_decade_increase"].get<double>(), 0.05);
    for (const auto& row : c["rows"]) EXPECT_EQ(row["Q_R"].get<double>(), 0.0);
}
