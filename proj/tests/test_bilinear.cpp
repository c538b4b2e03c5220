#include <gtest/gtest.h>

#include "helpers.hpp"

using namespace ktns;
using namespace ktns::testing;

namespace {

const Grid g(2, 32, 2.0 * pi);
const TimeGrid tg = TimeGrid::per_decade(1e-3, 1.0, 8);

SpaceTimeField random_alpha(std::uint64_t seed, const TimeGrid& time = tg)
{
    return sample(probe_family(1, 2, 2, g.length(), seed)[0], g, time);
}

/// Rank-2 field with only T_{10} = cos(x + y) on slab k.
SpaceTimeField single_slab_alpha(std::size_t k, const TimeGrid& time)
{
    SpaceTimeField a(g, time, 2);
    for (std::size_t p = 0; p < g.size(); ++p) {
        const auto x = g.position(p);
        a[k].at(p, 2) = std::cos(x[0] + x[1]);
    }
    return a;
}

}  // namespace

TEST(SlabWeights, ExactExponentialIntegrals)
{
    for (double lam : {0.0, 1e-8, 0.3, 4.0, 900.0}) {
        double total = 0.0;
        for (std::size_t k = 0; k < tg.slab_count(); ++k) total += detail::slab_exp_weight(tg, k, lam);
        const double span = tg.t_last() - tg.t_min();
        const double exact = lam > 0.0 ? std::exp(-tg.t_min() * lam) * -std::expm1(-span * lam) / lam : span;
        EXPECT_LT(rel_diff(total, exact), 1e-12) << lam;
    }
}

TEST(ApplyA, SingleSlabModeClosedForm)
{
    // P div of T_{10} = cos(x + y) is sin(x + y) (1/2, -1/2), lambda = 2
    const std::size_t k = 5;
    SpaceTimeField a = apply_A(single_slab_alpha(k, tg));
    const double lam = 2.0;
    for (std::size_t j = 0; j < tg.size(); ++j) {
        double f = 0.0;
        if (j > k) f = std::exp(-(tg.node(j) - tg.node(k + 1)) * lam) * (1.0 - std::exp(-tg.slab_length(k) * lam)) / lam;
        for (std::size_t p = 0; p < g.size(); ++p) {
            const auto x = g.position(p);
            const double v = std::sin(x[0] + x[1]) * f;
            EXPECT_NEAR(a[j].at(p, 0), 0.5 * v, 1e-14);
            EXPECT_NEAR(a[j].at(p, 1), -0.5 * v, 1e-14);
        }
    }
}

TEST(ApplyA, OutputIsDivergenceFreeAndMeanFree)
{
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        SpaceTimeField a = apply_A(random_alpha(seed));
        for (const auto& s : a.slices) {
            EXPECT_LT(sup_norm(divergence(s)), 1e-12 * std::max(1.0, sup_norm(a)));
            EXPECT_LT(std::abs(mean(s, 0)) + std::abs(mean(s, 1)), 1e-13 * std::max(1.0, sup_norm(a)));
        }
        EXPECT_EQ(l2_norm(a[0]), 0.0);
    }
}

TEST(Bilinear, VanishesOnZeroAndIsBilinear)
{
    auto fu = probe_family(3, 2, 1, g.length(), 31);
    SpaceTimeField u = sample(fu[0], g, tg), v = sample(fu[1], g, tg), w = sample(fu[2], g, tg);
    SpaceTimeField zero(g, tg, 1);
    EXPECT_EQ(sup_norm(bilinear_B(u, zero)), 0.0);
    EXPECT_EQ(sup_norm(bilinear_B(zero, v)), 0.0);
    SpaceTimeField lhs = bilinear_B(2.0 * u + w, v);
    SpaceTimeField rhs = 2.0 * bilinear_B(u, v) + bilinear_B(w, v);
    EXPECT_LT(rel_err(lhs, rhs), 1e-13);
    EXPECT_THROW(bilinear_B(u, SpaceTimeField(g, tg, 2)), ConfigurationError);
}

TEST(Bilinear, TwoModeProductOracle)
{
    // u = (0, cos x), v = (cos y, 0): (u (x) v)_{10} = cos x cos y, everything else zero
    const TimeGrid time = TimeGrid::from_nodes({0.1, 0.2, 0.4, 0.8});
    SpaceTimeField u(g, time, 1), v(g, time, 1);
    for (std::size_t j = 0; j < time.size(); ++j) {
        for (std::size_t p = 0; p < g.size(); ++p) {
            const auto x = g.position(p);
            u[j].at(p, 1) = std::cos(x[0]);
            v[j].at(p, 0) = std::cos(x[1]);
        }
    }
    // div gives -sin x cos y e_2 on the four modes (+-1, +-1), lambda = 2
    SpaceTimeField b = bilinear_B(u, v);
    const double lam = 2.0;
    for (std::size_t j = 1; j < time.size(); ++j) {
        double f = 0.0;
        for (std::size_t k = 0; k < j; ++k) {
            f += std::exp(-(time.node(j) - time.node(k + 1)) * lam) * (1.0 - std::exp(-time.slab_length(k) * lam)) / lam;
        }
        for (std::size_t p = 0; p < g.size(); ++p) {
            const auto x = g.position(p);
            const double e0 = 0.5 * std::cos(x[0]) * std::sin(x[1]);
            const double e1 = -0.5 * std::sin(x[0]) * std::cos(x[1]);
            EXPECT_NEAR(b[j].at(p, 0), f * e0, 1e-14);
            EXPECT_NEAR(b[j].at(p, 1), f * e1, 1e-14);
        }
    }
}

TEST(Mplus, SingleModeClosedForm)
{
    Field m = cosine_mode(g, {2, 1, 0}, 1, 0);
    SpaceTimeField f = constant_in_time(m, tg);
    SpaceTimeField out = apply_Mplus(f);
    const double lam = 5.0;
    for (std::size_t j = 0; j < tg.size(); ++j) {
        const double expect = -(1.0 - std::exp(-(tg.node(j) - tg.t_min()) * lam));
        EXPECT_LT(l2_norm(out[j] - expect * m), 1e-10 * l2_norm(m)) << j;
    }
    EXPECT_LT(rel_err(apply_Mplus_tilde(f), -1.0 * out), 1e-15);
}

TEST(Tcal, SliceWiseTsAtRepresentativeTimes)
{
    SpaceTimeField a = random_alpha(41);
    SpaceTimeField t = apply_Tcal(a);
    for (std::size_t k = 0; k < tg.size(); ++k) {
        EXPECT_LT(rel_err(t[k], ts_apply(tg.representative(k), a[k])), 1e-15);
    }
}

TEST(Decomposition, SumAndFactorizations)
{
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
        SpaceTimeField alpha = random_alpha(50 + seed);
        SpaceTimeField a = apply_A(alpha);
        SpaceTimeField a1 = apply_A1(alpha), a2 = apply_A2(alpha), a3 = apply_A3(alpha);
        EXPECT_LT(l2_norm(a - (a1 + a2 + a3)) / l2_norm(a), 1e-10);
        SpaceTimeField half = weight_by_time_power(alpha, 0.5);
        EXPECT_LT(rel_err(a1, apply_Mplus_tilde(apply_Tcal(half))), 1e-10);
        EXPECT_LT(rel_err(a3, -1.0 * apply_R(half)), 1e-10);
    }
}

TEST(Decomposition, A3VanishesAtTheLastNode)
{
    SpaceTimeField a3 = apply_A3(random_alpha(61));
    EXPECT_EQ(sup_norm(a3[a3.size() - 1]), 0.0);
    SpaceTimeField a2 = apply_A2(random_alpha(61));
    SpaceTimeField a = apply_A(random_alpha(61));
    EXPECT_EQ(sup_norm(apply_A1(random_alpha(61))[0]), 0.0);
    EXPECT_EQ(sup_norm(a[0]), 0.0);
    EXPECT_LT(l2_norm(a2[0] + a3[0]), 1e-12 * l2_norm(a2[0]));
}

TEST(Decomposition, RSingleModeMatchesQuadrature)
{
    // F = s^{1/2} T with T_{10} = cos(x + y) on every slab: R F(t) = P div T int_t^{t_J} e^{-(t + s) lambda} ds
    SpaceTimeField f(g, tg, 2);
    SpaceTimeField base = single_slab_alpha(0, tg);
    for (std::size_t k = 0; k < tg.size(); ++k) f[k] = std::sqrt(tg.representative(k)) * base[0];
    SpaceTimeField r = apply_R(f);
    const double lam = 2.0;
    for (std::size_t j = 0; j + 1 < tg.size(); ++j) {
        const double t = tg.node(j);
        const double T = tg.t_last();
        const double integral = std::exp(-t * lam) * (std::exp(-t * lam) - std::exp(-T * lam)) / lam;
        const double measured = r[j].at(g.flat_index({1, 2, 0}), 0) /
                                (0.5 * std::sin(g.position(g.flat_index({1, 2, 0}))[0] +
                                                g.position(g.flat_index({1, 2, 0}))[1]));
        EXPECT_LT(rel_diff(measured, integral), 1e-12) << j;
    }
}

TEST(Decomposition, RWeightedByInverseRootMatchesErf)
{
    // G = T constant in s: R G(t) = P div T int_t^{T} s^{-1/2} e^{-(t + s) lambda} ds, erf closed form
    const TimeGrid fine = TimeGrid::per_decade(1e-3, 1.0, 40);
    SpaceTimeField f(g, fine, 2);
    SpaceTimeField base = single_slab_alpha(0, fine);
    for (std::size_t k = 0; k < fine.size(); ++k) f[k] = base[0];
    SpaceTimeField r = apply_R(f);
    const double lam = 2.0;
    const std::size_t p = g.flat_index({1, 2, 0});
    const auto x = g.position(p);
    const double shape = 0.5 * std::sin(x[0] + x[1]);
    for (std::size_t j = 0; j + 1 < fine.size(); j += 7) {
        const double t = fine.node(j), T = fine.t_last();
        const double integral = std::exp(-t * lam) * std::sqrt(pi / lam) *
                                (std::erf(std::sqrt(lam * T)) - std::erf(std::sqrt(lam * t)));
        EXPECT_LT(rel_diff(r[j].at(p, 0) / shape, integral), 0.005) << t;
    }
}

TEST(LinearEstimates, ZeroInputAndFiniteRatios)
{
    auto [e1, e2] = linear_est_check(SpaceTimeField(g, tg, 2));
    EXPECT_EQ(e1.constant, 0.0);
    EXPECT_EQ(e2.constant, 0.0);
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        auto [a, b] = linear_est_check(random_alpha(70 + seed));
        EXPECT_TRUE(a.passed);
        EXPECT_TRUE(b.passed);
        EXPECT_GT(a.constant, 0.0);
        EXPECT_GT(b.constant, 0.0);
        EXPECT_NEAR(a.constant, a.values.at("lhs") / a.values.at("rhs"), 1e-15);
    }
}

TEST(OrbitPairing, MatchesQuadratureOfTheOrbit)
{
    const TimeGrid time = TimeGrid::from_nodes({0.1, 0.3, 0.5});
    Field h = cosine_mode(g, {1, 0, 0}, 1, 0);
    SpaceTimeField G(g, time, 1);
    G[0] = h;
    G[1] = 2.0 * h;
    const double norm2 = l2_norm(h) * l2_norm(h);
    const double exact = norm2 * ((std::exp(-0.1) - std::exp(-0.3)) + 2.0 * (std::exp(-0.3) - std::exp(-0.5)));
    EXPECT_LT(rel_diff(orbit_pairing(h, G), exact), 1e-13);
}
