#include <gtest/gtest.h>

#include "helpers.hpp"

using namespace ktns;
using namespace ktns::testing;

TEST(Kernels, HeatKernelIsPeriodizedGaussian)
{
    for (int n : {2, 3}) {
        const double t = n == 2 ? 1e-2 : 4e-2;
        const MultiplierSpec spec{MultiplierKind::Heat, t, 0.0, 0.0};
        const int points = n == 2 ? kernel_grid_points(spec, 2.0 * pi) : 64;
        Grid g(n, points, 2.0 * pi);
        Kernel k = kernel_eval(spec, g, 0);
        double err = 0.0, mass = 0.0;
        for (std::size_t p = 0; p < g.size(); ++p) {
            mass += k.modulus[p] * g.cell_volume();
            const double r2 = g.norm2(p);
            if (r2 > 16.0 * t) continue;
            const double exact = std::pow(4.0 * pi * t, -0.5 * n) * std::exp(-r2 / (4.0 * t));
            err = std::max(err, std::abs(k.modulus[p] - exact) / exact);
        }
        EXPECT_LT(err, 1e-6) << "n=" << n;
        EXPECT_NEAR(mass, 1.0, 1e-8);
    }
}

TEST(Kernels, RefusesWrappingScales)
{
    Grid g(2, 64, 2.0 * pi);
    const double t = std::pow(2.0 * pi / 8.0, 2) * 1.01;
    EXPECT_THROW(kernel_eval({MultiplierKind::Heat, t, 0.0, 0.0}, g), PreconditionError);
    EXPECT_THROW(kernel_eval({MultiplierKind::Heat, 0.0, 0.0, 0.0}, g), PreconditionError);
    EXPECT_THROW(kernel_grid_points({MultiplierKind::Ts, 1e-2, 0.0, 0.0}, 2.0 * pi), ConfigurationError);
}

TEST(Kernels, FirstDerivativeKernelIsOdd)
{
    Grid g(2, 64, 2.0 * pi);
    Kernel k = kernel_eval({MultiplierKind::OseenDiv, 0.05, 0.0, 0.0}, g, 10);
    ASSERT_EQ(k.rows, 2);
    ASSERT_EQ(k.cols, 4);
    double scale = 0.0;
    for (double v : k.entries) scale = std::max(scale, std::abs(v));
    for (int a = -10; a <= 10; ++a) {
        for (int b = -10; b <= 10; ++b) {
            for (int e = 0; e < 8; ++e) {
                EXPECT_NEAR(k.entry({a, b, 0}, e / 4, e % 4), -k.entry({-a, -b, 0}, e / 4, e % 4), 1e-12 * scale);
            }
        }
    }
}

TEST(Kernels, ParabolicRescalingInvariance)
{
    for (MultiplierKind kind : {MultiplierKind::Heat, MultiplierKind::OseenDiv}) {
        const double t = 1e-2;
        Grid g(2, 128, 2.0 * pi), g2(2, 128, 4.0 * pi);
        Kernel a = kernel_eval({kind, t, 0.0, 0.0}, g, 0);
        Kernel b = kernel_eval({kind, 4.0 * t, 0.0, 0.0}, g2, 0);
        const double factor = 0.25;
        const double scale = *std::max_element(a.modulus.begin(), a.modulus.end());
        for (std::size_t p = 0; p < g.size(); ++p) EXPECT_NEAR(b.modulus[p], factor * a.modulus[p], 1e-12 * scale);
        BoundReport fa = decay_fit(a, t, 3.0, 0.0, 0.5, DecayForm::OnePlus);
        BoundReport fb = decay_fit(b, 4.0 * t, 3.0, 0.0, 1.0, DecayForm::OnePlus);
        EXPECT_LT(rel_diff(fa.constant, fb.constant), 1e-10);
    }
}

TEST(Kernels, DecayConstantsStableAcrossScales)
{
    const std::vector<double> times = {1e-3, 1e-2, 1e-1};
    const double L = 4.0 * pi;
    BoundReport heat = decay_sweep(MultiplierKind::Heat, times, L, 2, 2.0, 10.0, DecayForm::OnePlus);
    BoundReport oseen = decay_sweep(MultiplierKind::OseenDiv, times, L, 2, 3.0, 10.0, DecayForm::OnePlus);
    BoundReport ts = decay_sweep(MultiplierKind::Ts, times, L, 2, 3.0, 10.0, DecayForm::Pure, 0.25, 1.0);
    for (const BoundReport* b : {&heat, &oseen, &ts}) {
        EXPECT_LE(b->values.at("spread"), 1.3) << b->name;
        EXPECT_TRUE(std::isfinite(b->constant));
        EXPECT_EQ(b->samples.size(), times.size());
    }
}

TEST(Kernels, OffdiagonalFactorMatchesShellIntegral)
{
    for (int n : {2, 3}) {
        // int_{|z| >= 1} |z|^{-2(n+1)} dz by radial quadrature
        const double sphere = n == 2 ? 2.0 * pi : 4.0 * pi;
        double integral = 0.0;
        const int steps = 200000;
        for (int i = 0; i < steps; ++i) {
            const double u = (i + 0.5) / steps;  // r = 1 / u
            integral += sphere * std::pow(u, n + 1) / steps;
        }
        EXPECT_LT(rel_diff(kernel_to_offdiag_factor(n), std::sqrt(integral)), 1e-8);
    }
}

TEST(Offdiagonal, BoxGeometry)
{
    Grid g(2, 32, 1.0);
    LatticeBox a, b;
    a.cells = b.cells = 4;
    b.corner = {8, 0, 0};
    EXPECT_NEAR(box_distance(g, a, b), 5.0 * g.spacing(), 1e-15);
    b.corner = {2, 1, 0};
    EXPECT_EQ(box_distance(g, a, b), 0.0);
    b.corner = {30, 0, 0};
    EXPECT_NEAR(box_distance(g, a, b), 0.0, 1e-15);
    b.corner = {8, 8, 0};
    EXPECT_NEAR(box_distance(g, a, b), std::sqrt(50.0) * g.spacing(), 1e-15);
    EXPECT_EQ(box_points(g, a).size(), 16u);

    Kernel k = kernel_eval({MultiplierKind::Heat, 1e-3, 0.0, 0.0}, g, 16);
    b.corner = {2, 1, 0};
    EXPECT_THROW(offdiag_estimate(k, a, b, 10, 1, 0.0), PreconditionError);
}

TEST(Offdiagonal, ProbesStayBelowExactNormAndIncrease)
{
    for (const OffdiagFamily fam : {OffdiagFamily{MultiplierKind::Heat, 2.0, 0.0, 0.5},
                                    OffdiagFamily{MultiplierKind::Ts, 2.0, 0.25, 0.5},
                                    OffdiagFamily{MultiplierKind::Kts, 1.5, 0.0, 0.5}}) {
        BoundReport b = offdiag_check(fam, 2, 16.0, {1e-2}, {2.0, 4.0, 8.0}, 100, 17);
        EXPECT_TRUE(std::isfinite(b.constant));
        EXPECT_GT(b.constant, 0.0);
        EXPECT_LE(b.values.at("probe_ratio_max"), b.values.at("exact_ratio_max") * (1.0 + 1e-12));
        for (const auto& row : b.samples) {
            EXPECT_LE(row["probe"].get<double>(), row["exact"].get<double>() * (1.0 + 1e-12));
            EXPECT_GE(row["d_over_scale"].get<double>(), 2.0);
        }
    }
}

TEST(Schur, QuarterWeightGivesFour)
{
    BoundReport b = schur_check(-0.25);
    EXPECT_LT(rel_diff(b.values.at("C1"), 4.0), 0.01);
    EXPECT_LT(rel_diff(b.values.at("C2"), 4.0), 0.01);
    EXPECT_LT(rel_diff(b.constant, 4.0), 0.01);
    EXPECT_TRUE(b.passed);
    EXPECT_LE(b.values.at("schur_exact_kernel"), b.constant * (1.0 + 1e-12));
}

TEST(Schur, ConstantsGrowTowardsMinusHalf)
{
    double prev = 0.0;
    for (double beta : {-0.25, -0.3, -0.35, -0.4, -0.45, -0.49}) {
        BoundReport b = schur_check(beta);
        EXPECT_GT(b.constant, prev) << beta;
        EXPECT_LT(rel_diff(b.values.at("C1"), 1.0 / (beta + 0.5)), 0.01) << beta;
        EXPECT_LT(rel_diff(b.values.at("C2"), -1.0 / beta), 0.01) << beta;
        prev = b.constant;
    }
    EXPECT_THROW(schur_check(-0.5), PreconditionError);
    EXPECT_THROW(schur_check(0.0), PreconditionError);
}

TEST(Schur, OperatorNormSymbolSupremum)
{
    for (int n : {2, 3}) {
        Grid g(n, n == 2 ? 64 : 32, 2.0 * pi);
        for (double s : {1e-3, 1e-2, 1e-1}) {
            for (double t : {0.5 * s, 2.0 * s}) {
                BoundReport b = kts_symbol_check(g, t, s);
                EXPECT_TRUE(b.passed) << "n=" << n << " s=" << s << " t=" << t;
                EXPECT_LT(rel_diff(b.constant, b.values.at("closed_form")), 0.1);
            }
        }
    }
    EXPECT_THROW(kts_symbol_check(Grid(2, 16, 1.0), 0.0, 1.0), PreconditionError);
}
