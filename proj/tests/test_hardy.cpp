#include <gtest/gtest.h>

#include "helpers.hpp"

using namespace ktns;
using namespace ktns::testing;

namespace {

const TimeGrid hardy_time = TimeGrid::per_decade(1e-3, 4.0, 8);

}  // namespace

TEST(Atoms, SupportMeanAndNormalization)
{
    Grid g(2, 64, 2.0 * pi);
    for (const Atom& a : atom_family(g, 12, 0.3, 1.2, 5)) {
        double sum = 0.0;
        std::size_t inside = 0;
        for (std::size_t p = 0; p < g.size(); ++p) {
            const bool in = distance2_to(g, p, a.center) < a.radius * a.radius;
            inside += in ? 1 : 0;
            if (!in) {
                EXPECT_EQ(a.values.at(p), 0.0);
            }
            sum += a.values.at(p);
        }
        EXPECT_LT(std::abs(sum) / inside, 1e-14 * sup_norm(a.values));
        const double measure = inside * g.cell_volume();
        EXPECT_NEAR(l2_norm(a.values), 1.0 / std::sqrt(measure), 1e-12 / std::sqrt(measure));
        EXPECT_GE(a.radius, 0.3);
        EXPECT_LT(a.radius, 1.2);
    }
    EXPECT_THROW(make_atom(g, {0, 0, 0}, 4.0, 0.0, {1, 0, 0}), ConfigurationError);
    EXPECT_THROW(make_atom(g, {0, 0, 0}, 0.01, 0.0, {1, 0, 0}), ConfigurationError);
}

TEST(HardyNorms, MaximalNormMatchesConeScan)
{
    Grid g(2, 32, 2.0 * pi);
    const TimeGrid time = TimeGrid::per_decade(1e-2, 4.0, 4);
    for (const Atom& a : atom_family(g, 3, 0.5, 1.5, 9)) {
        Field slow = brute::nontangential(heat_extension(a.values, time));
        double l1 = 0.0;
        for (double v : slow.values) l1 += v * g.cell_volume();
        EXPECT_LT(rel_diff(h1_norm_maximal(a.values, time).value, l1), 1e-12);
    }
}

TEST(HardyNorms, SquareFunctionOfSingleMode)
{
    Grid g(2, 16, 2.0 * pi);
    const TimeGrid time = TimeGrid::per_decade(1e-2, 4.0, 5);
    for (int k : {1, 2}) {
        Field h = cosine_mode(g, {k, 0, 0});
        SpaceTimeField direct(g, time, 0);
        const double lam = k * k;
        for (std::size_t j = 0; j < time.size(); ++j) {
            const double t = time.node(j);
            direct[j] = (-std::sqrt(t) * lam * std::exp(-t * lam)) * h;
        }
        EXPECT_LT(rel_diff(h1_norm_square(h, time).value, brute::t12(direct)), 1e-10);
    }
}

TEST(HardyNorms, HomogeneousAndMeanZeroOnly)
{
    Grid g(2, 32, 2.0 * pi);
    Atom a = make_atom(g, {2.0, 3.0, 0.0}, 0.9, 0.4, {0.0, 1.0, 0.0});
    const TimeGrid time = TimeGrid::per_decade(1e-2, 4.0, 4);
    Field b = -2.5 * a.values;
    EXPECT_LT(rel_diff(h1_norm_maximal(b, time).value, 2.5 * h1_norm_maximal(a.values, time).value), 1e-12);
    EXPECT_LT(rel_diff(h1_norm_square(b, time).value, 2.5 * h1_norm_square(a.values, time).value), 1e-12);
    Field c(g, 0);
    for (auto& v : c.values) v = 1.0;
    EXPECT_THROW(h1_norm_maximal(c, time), PreconditionError);
    EXPECT_THROW(h1_norm_square(c + a.values, time), PreconditionError);
    EXPECT_THROW(h1_norm_maximal(Field(g, 1), time), ConfigurationError);
    EXPECT_EQ(h1_norm_maximal(Field(g, 0), time).value, 0.0);
}

TEST(HardyNorms, SquareOverMaximalStaysInBand)
{
    Grid g(2, 64, 2.0 * pi);
    double lo = 1e300, hi = 0.0;
    for (const Atom& a : atom_family(g, 8, 0.3, 1.2, 11)) {
        const double ratio = h1_norm_square(a.values, hardy_time).value / h1_norm_maximal(a.values, hardy_time).value;
        lo = std::min(lo, ratio);
        hi = std::max(hi, ratio);
    }
    EXPECT_GE(lo, 0.5);
    EXPECT_LE(hi, 2.0);
}

TEST(SOperator, SingleSlabClosedForm)
{
    Grid g(2, 16, 2.0 * pi);
    const TimeGrid time = TimeGrid::from_nodes({0.25, 0.5, 1.5, 3.0});
    Field u(g, 1);
    for (std::size_t p = 0; p < g.size(); ++p) u.at(p, 1) = std::cos(g.position(p)[0]);
    SpaceTimeField G(g, time, 1);
    G[1] = u;
    Field s = s_operator(G);
    const double factor = std::exp(-0.5) - std::exp(-1.5);
    for (std::size_t p = 0; p < g.size(); ++p) {
        EXPECT_NEAR(s.at(p, 2), -std::sin(g.position(p)[0]) * factor, 1e-14);
        EXPECT_NEAR(s.at(p, 0), 0.0, 1e-14);
        EXPECT_NEAR(s.at(p, 1), 0.0, 1e-14);
        EXPECT_NEAR(s.at(p, 3), 0.0, 1e-14);
    }
}

TEST(SOperator, IndicatorProfileIsCounterexampleProfile)
{
    Grid g(2, 32, 2.0 * pi);
    const TimeGrid time = dyadic_time_grid(8, 10);
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
        Field u = smooth_field(g, 1, seed, 4);
        EXPECT_LT(rel_err(s_operator(build_G(u, time)), counterexample_profile(u)), 1e-13);
    }
}

TEST(SOperator, AdjointOfA2)
{
    Grid g(2, 32, 2.0 * pi);
    const TimeGrid time = TimeGrid::per_decade(1e-3, 1.0, 6);
    auto fa = probe_family(6, 2, 2, g.length(), 21);
    auto fg = probe_family(6, 2, 1, g.length(), 22);
    for (int i = 0; i < 6; ++i) {
        SpaceTimeField alpha = sample(fa[i], g, time);
        SpaceTimeField G = sample(fg[i], g, time) + apply_A2(alpha);
        const double lhs = orbit_pairing(a2_core(alpha), G);
        const double rhs = orbit_pairing(-1.0 * s_operator(G), alpha);
        EXPECT_LT(rel_diff(lhs, rhs), 1e-10);
        SpaceTimeField star = a2_star(G);
        for (std::size_t j = 0; j < time.size(); ++j) {
            EXPECT_LT(rel_err(star[j], heat(time.node(j), -1.0 * s_operator(G))), 1e-12);
        }
    }
}

TEST(SOperator, TruncationTailBoundsTheLostPart)
{
    Grid g(2, 32, 2.0 * pi);
    const TimeGrid short_time = TimeGrid::geometric(1e-2, 0.64, 2.0);
    std::vector<double> nodes = short_time.nodes();
    for (double t : {1.28, 2.56, 5.12, 10.24}) nodes.push_back(t);
    const TimeGrid long_time = TimeGrid::from_nodes(nodes);
    Field u = smooth_field(g, 1, 3, 3);
    SpaceTimeField gs = constant_in_time(u, short_time), gl = constant_in_time(u, long_time);
    const double lost = l2_norm(s_operator(gl) - s_operator(gs));
    EXPECT_GT(lost, 0.0);
    EXPECT_LE(lost, s_operator_tail(g, short_time) * l2_norm(u) * (1.0 + 1e-12));
}
