#include <gtest/gtest.h>

#include "helpers.hpp"

using namespace ktns;
using namespace ktns::testing;

TEST(Grid, RejectsInvalidShapes)
{
    EXPECT_THROW(Grid(1, 16, 1.0), ConfigurationError);
    EXPECT_THROW(Grid(4, 16, 1.0), ConfigurationError);
    EXPECT_THROW(Grid(2, 4, 1.0), ConfigurationError);
    EXPECT_THROW(Grid(2, 24, 1.0), ConfigurationError);
    EXPECT_THROW(Grid(2, 16, 0.0), ConfigurationError);
    EXPECT_THROW(Grid(2, 16, -1.0), ConfigurationError);
    EXPECT_NO_THROW(Grid(3, 8, 1.0));
}

TEST(Grid, FrequencyLatticeCoversHalfOpenRange)
{
    Grid g(2, 16, 3.0);
    int lo = 100, hi = -100;
    for (const auto& md : modes(g)) {
        for (int d = 0; d < 2; ++d) {
            const int k = static_cast<int>(std::lround(md.xi[d] / g.wave_unit()));
            lo = std::min(lo, k);
            hi = std::max(hi, k);
        }
    }
    EXPECT_EQ(lo, -8);
    EXPECT_EQ(hi, 7);
}

TEST(TimeGridTest, GeometricInvariants)
{
    for (double rho : {1.1, 1.5, 2.0, 3.7}) {
        TimeGrid t = TimeGrid::geometric(1e-3, 2.0, rho);
        EXPECT_DOUBLE_EQ(t.t_min(), 1e-3);
        for (std::size_t j = 1; j < t.size(); ++j) EXPECT_GT(t.node(j), t.node(j - 1));
        EXPECT_LE(t.t_last(), 2.0);
        EXPECT_LT(2.0, t.t_last() * rho * (1.0 + 1e-12));
    }
    EXPECT_THROW(TimeGrid::geometric(1.0, 0.5, 2.0), ConfigurationError);
    EXPECT_THROW(TimeGrid::geometric(1.0, 2.0, 1.0), ConfigurationError);
    EXPECT_THROW(TimeGrid::from_nodes({1.0, 1.0}), ConfigurationError);
}

TEST(Spectral, ConstantFieldIsDcMode)
{
    Grid g(2, 16, 2.0 * pi);
    Field f(g, 0);
    for (auto& v : f.values) v = 2.5;
    SpectralField s = to_spectral(f);
    EXPECT_NEAR(s.at(0).real(), 2.5 * 256.0, 1e-12);
    for (std::size_t m = 1; m < g.size(); ++m) EXPECT_LT(std::abs(s.at(m)), 1e-12);
}

TEST(Spectral, CosineHasTwoCoefficients)
{
    Grid g(2, 16, 2.0 * pi);
    SpectralField s = to_spectral(cosine_mode(g, {1, 0, 0}));
    int nonzero = 0;
    for (std::size_t m = 0; m < g.size(); ++m) {
        if (std::abs(s.at(m)) < 1e-10) continue;
        ++nonzero;
        auto idx = g.multi_index(m);
        EXPECT_EQ(std::abs(g.wave_number(idx[0])), 1);
        EXPECT_EQ(g.wave_number(idx[1]), 0);
    }
    EXPECT_EQ(nonzero, 2);
}

TEST(Spectral, RoundTripAndParseval)
{
    for (int n : {2, 3}) {
        Grid g(n, n == 2 ? 32 : 16, 5.0);
        for (int rank : {0, 1, 2}) {
            Field f = random_field(g, rank, 10 + rank);
            Field back = to_physical(to_spectral(f));
            EXPECT_LT(sup_norm(back - f), 1e-12 * sup_norm(f));
            SpectralField s = to_spectral(f);
            double spec = 0.0, phys = 0.0;
            for (const auto& c : s.coeffs) spec += std::norm(c);
            for (double v : f.values) phys += v * v;
            EXPECT_LT(std::abs(spec / static_cast<double>(g.size()) - phys), 1e-12 * phys);
        }
    }
}

TEST(Spectral, SizeMismatchIsRejected)
{
    Grid g(2, 16, 1.0);
    Field f(g, 1);
    f.values.pop_back();
    EXPECT_THROW(to_spectral(f), ConfigurationError);
}

TEST(Spectral, ConjugateSymmetryAfterOperators)
{
    Grid g(2, 32, 2.0 * pi);
    Field u = random_field(g, 1, 3);
    Field t = random_field(g, 2, 4);
    for (const Field& f : {leray(u), heat(0.1, u), divergence(t), gradient(u), oseen_div(0.05, t), ts_apply(0.02, t),
                           inv_laplacian_power(0.5, u)}) {
        EXPECT_LT(conjugate_symmetry_defect(to_spectral(f)), 1e-12);
    }
}

TEST(TensorProduct, TrivialCases)
{
    Grid g(2, 8, 1.0);
    Field zero(g, 1);
    EXPECT_EQ(sup_norm(tensor_product(zero, zero)), 0.0);
    Field e1(g, 1), e2(g, 1);
    for (std::size_t p = 0; p < g.size(); ++p) {
        e1.at(p, 0) = 1.0;
        e2.at(p, 1) = 1.0;
    }
    Field t = tensor_product(e1, e2);
    for (std::size_t p = 0; p < g.size(); ++p) {
        EXPECT_EQ(t.at(p, 1), 1.0);
        EXPECT_EQ(t.at(p, 0) + t.at(p, 2) + t.at(p, 3), 0.0);
    }
    EXPECT_THROW(tensor_product(e1, Field(Grid(2, 16, 1.0), 1)), ConfigurationError);
}

TEST(TensorProduct, FrobeniusNormIsProductOfModuli)
{
    for (int n : {2, 3}) {
        Grid g(n, 8, 1.0);
        Field u = random_field(g, 1, 21), v = random_field(g, 1, 22);
        Field t = tensor_product(u, v);
        for (std::size_t p = 0; p < g.size(); ++p) {
            EXPECT_NEAR(t.modulus(p), u.modulus(p) * v.modulus(p), 1e-14 * (1.0 + t.modulus(p)));
        }
    }
}

TEST(TensorProduct, HoelderOnBallWindows)
{
    Grid g(2, 16, 2.0 * pi);
    Field u = random_field(g, 1, 5), v = random_field(g, 1, 6);
    Field t = tensor_product(u, v);
    Rng rng(7);
    for (int w = 0; w < 40; ++w) {
        const double r = rng.uniform(0.2, 3.5);
        const std::size_t x = static_cast<std::size_t>(rng.integer(0, static_cast<int>(g.size()) - 1));
        brute::detail::Ball ball(g, r);
        double s = 0.0, su = 0.0, sv = 0.0;
        ball.each(x, [&](std::size_t y) {
            s += t.modulus(y);
            su += u.modulus(y) * u.modulus(y);
            sv += v.modulus(y) * v.modulus(y);
        });
        EXPECT_LE(s, std::sqrt(su * sv) * (1.0 + 1e-14));
    }
}

TEST(SpaceTime, SlicesShareGridRankAndTime)
{
    Grid g(2, 8, 1.0);
    TimeGrid t = TimeGrid::per_decade(1e-2, 1.0, 2);
    SpaceTimeField a(g, t, 1), b(g, t, 2), c(Grid(2, 16, 1.0), t, 1);
    SpaceTimeField d(g, TimeGrid::per_decade(1e-2, 1.0, 3), 1);
    EXPECT_EQ(a.size(), t.size());
    EXPECT_THROW(a + b, ConfigurationError);
    EXPECT_THROW(a + c, ConfigurationError);
    EXPECT_THROW(a + d, ConfigurationError);
}

TEST(SpaceTime, PairingUsesSlabLengths)
{
    Grid g(2, 8, 2.0);
    TimeGrid t = TimeGrid::from_nodes({0.5, 1.0, 3.0});
    Field one(g, 0);
    for (auto& v : one.values) v = 1.0;
    SpaceTimeField f = constant_in_time(one, t);
    EXPECT_NEAR(pairing(f, f), 2.5 * 4.0, 1e-12);
}
