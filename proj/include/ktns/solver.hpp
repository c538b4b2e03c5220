#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "ktns/bilinear.hpp"
#include "ktns/report.hpp"
#include "ktns/tent_norms.hpp"

namespace ktns {

struct SolveReport {
    std::vector<double> norms;        // E_T norm of every iterate, starting with the free evolution
    std::vector<double> differences;  // E_T norm of successive differences
    std::vector<double> contraction;  // differences[k+1] / differences[k]
    double residual = 0.0;
    double projection_correction = 0.0;  // |P u0 - u0|_2 / |u0|_2
    double initial_layer_bound = 0.0;    // bound on the B contribution of (0, t_min)
    double predicted_contraction = 0.0;  // 2 C_B |free|_E with C_B measured on the free evolution
    int iterations = 0;
    bool converged = false;
    std::string status = "max_iter";

    json to_json() const
    {
        auto clean = [](const std::vector<double>& v) {
            json a = json::array();
            for (double x : v) a.push_back(BoundReport::finite_or_null(x));
            return a;
        };
        return {{"norms", clean(norms)},
                {"differences", clean(differences)},
                {"contraction", clean(contraction)},
                {"residual", BoundReport::finite_or_null(residual)},
                {"projection_correction", projection_correction},
                {"initial_layer_bound", initial_layer_bound},
                {"predicted_contraction", BoundReport::finite_or_null(predicted_contraction)},
                {"iterations", iterations},
                {"converged", converged},
                {"status", status}};
    }
};

struct PicardOptions {
    int max_iter = 50;
    double tol = 1e-10;  // relative to the E_T norm of the current iterate
    bool dealiased = true;
    int growth_limit = 3;  // consecutive growing differences that signal divergence
};

/// Divergence-free datum a (d_y psi, -d_x psi, 0) from psi = cos(qx) cos(qy) + mix sin(q(x + 2y)),
/// q = 2 pi / L, constant in z. mix = 0 is the Taylor-Green vortex, whose nonlinearity is a pure
/// gradient and so vanishes after projection.
inline Field taylor_green_datum(const Grid& g, double amplitude, double mix = 0.5)
{
    const double q = g.wave_unit();
    Field u(g, 1);
    for (std::size_t p = 0; p < g.size(); ++p) {
        const auto x = g.position(p);
        const double a = q * x[0], b = q * x[1];
        const double psi_x = -q * std::sin(a) * std::cos(b) + mix * q * std::cos(a + 2.0 * b);
        const double psi_y = -q * std::cos(a) * std::sin(b) + 2.0 * mix * q * std::cos(a + 2.0 * b);
        u.at(p, 0) = amplitude * psi_y;
        u.at(p, 1) = -amplitude * psi_x;
    }
    return u;
}

/// e^{t_j Delta} P u0. The size of the projection correction is returned through correction.
inline SpaceTimeField free_evolution(const Field& u0, const TimeGrid& time, double* correction = nullptr)
{
    if (u0.rank != 1) throw ConfigurationError("free_evolution expects a rank-1 datum");
    Field p = leray(u0);
    if (correction) {
        const double n0 = l2_norm(u0);
        *correction = n0 > 0.0 ? l2_norm(p - u0) / n0 : 0.0;
    }
    return heat_orbit(p, time);
}

/// |u - e^{t Delta}u0 + B(u, u)|_{L^2} / |u|_{L^2}, zero for u = 0.
inline double mild_residual(const SpaceTimeField& u, const Field& u0, bool dealiased = true)
{
    const double nu = l2_norm(u);
    if (nu == 0.0) return 0.0;
    SpaceTimeField r = u - free_evolution(u0, u.time) + bilinear_B(u, u, dealiased);
    return l2_norm(r) / nu;
}

inline bool all_finite(const SpaceTimeField& f)
{
    for (const auto& s : f.slices)
        for (double v : s.values)
            if (!std::isfinite(v)) return false;
    return true;
}

/// Picard iterates u_{k+1} = e^{t Delta}u0 - B(u_k, u_k) in the discrete E_T norm.
/// Divergence (growing differences or non-finite values) is a status, not an exception.
inline std::pair<SpaceTimeField, SolveReport> picard_solve(const Field& u0, const TimeGrid& time,
                                                           const PicardOptions& opt = {})
{
    SolveReport rep;
    const SpaceTimeField free = free_evolution(u0, time, &rep.projection_correction);
    const double T = time.t_last();
    SpaceTimeField u = free;
    const double free_norm = norm_ET(free, T).value;
    rep.norms.push_back(free_norm);
    {
        const Grid& g = u0.grid;
        const double kmax = (g.points() / 3) * g.wave_unit() * std::sqrt(static_cast<double>(g.dim()));
        rep.initial_layer_bound = time.t_min() * kmax * sup_norm(u0) * l2_norm(u0);
    }
    if (free_norm == 0.0) {
        rep.converged = true;
        rep.status = "converged";
        rep.iterations = 1;
        rep.differences.push_back(0.0);
        return {u, rep};
    }
    rep.predicted_contraction = 2.0 * norm_ET(bilinear_B(free, free, opt.dealiased), T).value / free_norm;

    int growing = 0;
    for (int k = 1; k <= opt.max_iter; ++k) {
        SpaceTimeField next = free - bilinear_B(u, u, opt.dealiased);
        rep.iterations = k;
        if (!all_finite(next)) {
            rep.status = "diverged";
            rep.differences.push_back(std::numeric_limits<double>::infinity());
            u = std::move(next);
            break;
        }
        const double d = norm_ET(next - u, T).value;
        const double nn = norm_ET(next, T).value;
        if (!rep.differences.empty()) {
            const double prev = rep.differences.back();
            rep.contraction.push_back(prev > 0.0 ? d / prev : 0.0);
            growing = d > prev ? growing + 1 : 0;
        }
        rep.differences.push_back(d);
        rep.norms.push_back(nn);
        u = std::move(next);
        if (!std::isfinite(d) || !std::isfinite(nn)) {
            rep.status = "diverged";
            break;
        }
        if (d <= opt.tol * nn) {
            rep.converged = true;
            rep.status = "converged";
            break;
        }
        if (growing >= opt.growth_limit) {
            rep.status = "diverged";
            break;
        }
    }
    rep.residual = all_finite(u) ? mild_residual(u, u0, opt.dealiased) : std::numeric_limits<double>::infinity();
    return {u, rep};
}

/// Max over nodes of |div u_j|_inf / max_j |u_j|_inf.
inline double divergence_defect(const SpaceTimeField& u)
{
    double scale = sup_norm(u);
    if (scale == 0.0) return 0.0;
    double d = 0.0;
    for (const auto& s : u.slices) d = std::max(d, sup_norm(divergence(s)));
    return d / scale;
}

}  // namespace ktns
