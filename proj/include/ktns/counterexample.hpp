#pragma once

#include <cmath>
#include <vector>

#include "ktns/bilinear.hpp"
#include "ktns/hardy.hpp"
#include "ktns/report.hpp"

namespace ktns {

/// Time grid with ratio 2^{1/per_octave} starting at 2^{-octaves_below}, so 1 and 2 are nodes.
inline TimeGrid dyadic_time_grid(int per_octave, int octaves_below, int octaves_above = 2)
{
    if (per_octave < 1 || octaves_below < 1 || octaves_above < 1) throw ConfigurationError("invalid dyadic grid");
    std::vector<double> nodes;
    const int total = per_octave * (octaves_below + octaves_above);
    for (int i = 0; i <= total; ++i) nodes.push_back(std::exp2(static_cast<double>(i) / per_octave - octaves_below));
    return TimeGrid::from_nodes(nodes);
}

namespace detail {

/// grad P f(lambda) u for a scalar symbol f.
template <class Symbol>
Field grad_leray_profile(const Field& u, Symbol f)
{
    SpectralField s = scale_modes(to_spectral(u), [&](const Mode& md) { return f(md.lambda); });
    return to_physical(grad_leray_spectral(s));
}

}  // namespace detail

/// w = grad (-Delta)^{-1} P (e^{Delta} - e^{2 Delta}) u.
inline Field counterexample_profile(const Field& u)
{
    if (u.rank != 1) throw ConfigurationError("counterexample_profile expects a rank-1 field");
    return detail::grad_leray_profile(u, [](double lam) {
        return lam > 0.0 ? (std::exp(-lam) - std::exp(-2.0 * lam)) / lam : 0.0;
    });
}

/// G(t) = u on the slabs inside (1, 2), zero elsewhere. Rejects data whose profile w vanishes,
/// since the unboundedness argument needs w != 0.
inline SpaceTimeField build_G(const Field& u, const TimeGrid& time)
{
    const double nu = l2_norm(u);
    const double nw = l2_norm(counterexample_profile(u));
    if (nu == 0.0 || nw <= 1e-14 * nu) {
        throw PreconditionError("build_G: grad (-Delta)^{-1} P (e^Delta - e^{2 Delta}) u vanishes; "
                                "the construction needs this profile to be nonzero");
    }
    const std::size_t a = time.index_of(1.0);
    const std::size_t b = time.index_of(2.0);
    SpaceTimeField g(u.grid, time, 1);
    for (std::size_t k = a; k < b; ++k) g[k] = u;
    return g;
}

struct DivergenceScanReport {
    std::vector<double> eps;
    std::vector<double> q;         // global L^2 variant
    std::vector<double> q_ball;    // restricted to B(0, L/4)
    std::vector<double> q_closed;  // single-mode closed form |w|^2 (E1(2 eps lambda) - E1(2 lambda))
    double slope = 0.0, intercept = 0.0, r2 = 0.0;
    double ball_slope = 0.0, ball_r2 = 0.0;
    double closed_slope = 0.0;
    double profile_norm2 = 0.0;  // |w|_2^2
    double lambda = 0.0;         // spectral gap used in the closed form (0 if w is not a single shell)

    json to_json() const
    {
        json rows = json::array();
        for (std::size_t i = 0; i < eps.size(); ++i) {
            rows.push_back({{"eps", eps[i]}, {"Q", q[i]}, {"Q_ball", q_ball[i]},
                            {"Q_closed", i < q_closed.size() ? q_closed[i] : 0.0}});
        }
        return {{"rows", rows},        {"slope", slope},           {"intercept", intercept},
                {"fit_quality", r2},   {"ball_slope", ball_slope}, {"ball_fit_quality", ball_r2},
                {"closed_slope", closed_slope}, {"profile_norm2", profile_norm2}, {"lambda", lambda}};
    }
};

/// Least squares y = c x + d; returns {c, d, R^2}.
inline std::array<double, 3> linear_fit(const std::vector<double>& x, const std::vector<double>& y)
{
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
        syy += y[i] * y[i];
    }
    const double vx = sxx - sx * sx / n;
    const double vy = syy - sy * sy / n;
    const double cxy = sxy - sx * sy / n;
    const double c = vx > 0.0 ? cxy / vx : 0.0;
    const double d = (sy - c * sx) / n;
    const double r2 = vy > 0.0 ? cxy * cxy / (vx * vy) : 1.0;
    return {c, d, r2};
}

/// E1(x) = int_x^inf e^{-r} dr / r.
inline double exp_integral_e1(double x) { return -std::expint(-x); }

namespace detail {

inline double ball_l2_squared(const Field& f, double radius)
{
    double s = 0.0;
    for (std::size_t p = 0; p < f.points(); ++p) {
        if (f.grid.norm2(p) < radius * radius) s += f.modulus(p) * f.modulus(p);
    }
    return s * f.grid.cell_volume();
}

/// The common spectral gap of w if all its energy sits on one shell |xi|^2 = lambda.
inline double single_shell(const Field& w)
{
    SpectralField s = to_spectral(w);
    const auto& table = modes(w.grid);
    double lam = -1.0;
    double total = 0.0;
    for (std::size_t m = 0; m < w.grid.size(); ++m)
        for (int c = 0; c < s.components(); ++c) total += std::norm(s.at(m, c));
    for (std::size_t m = 0; m < w.grid.size(); ++m) {
        double e = 0.0;
        for (int c = 0; c < s.components(); ++c) e += std::norm(s.at(m, c));
        if (e <= 1e-24 * total) continue;
        if (lam < 0.0) lam = table[m].lambda;
        else if (std::abs(table[m].lambda - lam) > 1e-9 * lam) return 0.0;
    }
    return std::max(lam, 0.0);
}

}  // namespace detail

/// Snaps each eps to the nearest grid node; eps must span at least three decades and stay >= t_min.
inline std::vector<std::size_t> snap_eps(const TimeGrid& time, const std::vector<double>& eps)
{
    if (eps.size() < 2) throw PreconditionError("divergence_scan: need at least two eps values");
    double lo = *std::min_element(eps.begin(), eps.end());
    double hi = *std::max_element(eps.begin(), eps.end());
    if (hi / lo < 1e3 * (1.0 - 1e-9)) throw PreconditionError("divergence_scan: eps must span three decades");
    if (lo < time.t_min() * (1.0 - 1e-9)) throw PreconditionError("divergence_scan: eps below t_min");
    if (hi >= 1.0) throw PreconditionError("divergence_scan: eps must stay below 1");
    std::vector<std::size_t> idx;
    for (double e : eps) {
        std::size_t best = 0;
        for (std::size_t j = 0; j < time.size(); ++j) {
            if (std::abs(std::log(time.node(j) / e)) < std::abs(std::log(time.node(best) / e))) best = j;
        }
        idx.push_back(best);
    }
    return idx;
}

/// Q(eps) = sum over slabs in (eps, 1) of |profile(s)|^2 ln(rho_k), with profile(s) the
/// slice at the slab's geometric midpoint. slice(s) must return the field for time s.
template <class Slice>
std::vector<std::array<double, 2>> q_scan(const TimeGrid& time, const std::vector<std::size_t>& eps_idx, Slice slice,
                                          double ball_radius)
{
    const std::size_t one = time.index_of(1.0);
    std::vector<double> slab(one, 0.0), slab_ball(one, 0.0);
    parallel_for(one, [&](std::size_t k) {
        const double mid = std::sqrt(time.node(k) * time.node(k + 1));
        const double w = std::log(time.node(k + 1) / time.node(k));
        Field f = slice(mid);
        slab[k] = w * l2_norm(f) * l2_norm(f);
        slab_ball[k] = w * detail::ball_l2_squared(f, ball_radius);
    });
    std::vector<std::array<double, 2>> out;
    for (std::size_t e : eps_idx) {
        double q = 0.0, qb = 0.0;
        for (std::size_t k = e; k < one; ++k) {
            q += slab[k];
            qb += slab_ball[k];
        }
        out.push_back({q, qb});
    }
    return out;
}

/// The eps-scan of the adjoint profile e^{s Delta} w on (eps, 1), with a log(1/eps) fit.
inline DivergenceScanReport divergence_scan(const Field& u, const TimeGrid& time, const std::vector<double>& eps)
{
    build_G(u, time);  // validates the datum and that 1, 2 are nodes
    const Field w = counterexample_profile(u);
    const SpectralField ws = to_spectral(w);
    auto idx = snap_eps(time, eps);
    auto slice = [&](double s) {
        return to_physical(scale_modes(ws, [s](const Mode& md) { return std::exp(-s * md.lambda); }));
    };
    auto q = q_scan(time, idx, slice, 0.25 * u.grid.length());

    DivergenceScanReport rep;
    rep.profile_norm2 = l2_norm(w) * l2_norm(w);
    rep.lambda = detail::single_shell(w);
    std::vector<double> x;
    for (std::size_t i = 0; i < idx.size(); ++i) {
        rep.eps.push_back(time.node(idx[i]));
        rep.q.push_back(q[i][0]);
        rep.q_ball.push_back(q[i][1]);
        x.push_back(std::log(1.0 / time.node(idx[i])));
        if (rep.lambda > 0.0) {
            const double e = time.node(idx[i]);
            rep.q_closed.push_back(rep.profile_norm2 *
                                   (exp_integral_e1(2.0 * e * rep.lambda) - exp_integral_e1(2.0 * rep.lambda)));
        }
    }
    auto fit = linear_fit(x, rep.q);
    rep.slope = fit[0];
    rep.intercept = fit[1];
    rep.r2 = fit[2];
    auto fb = linear_fit(x, rep.q_ball);
    rep.ball_slope = fb[0];
    rep.ball_r2 = fb[2];
    if (!rep.q_closed.empty()) rep.closed_slope = linear_fit(x, rep.q_closed)[0];
    return rep;
}

/// Same scan for the adjoints of A1 and R applied to the same G. For s < 1,
/// A1* G(s) = grad P (-Delta)^{-1} (e^{s Delta} - e^{-s Delta})(e^{Delta} - e^{2 Delta}) u, which stays
/// bounded as s -> 0, and R* G(s) = 0 because R* only sees G on (0, s).
inline json contrast_scan(const Field& u, const TimeGrid& time, const std::vector<double>& eps)
{
    build_G(u, time);
    const SpectralField ws = to_spectral(counterexample_profile(u));
    auto idx = snap_eps(time, eps);
    auto a1 = [&](double s) {
        return detail::grad_leray_profile(u, [s](double lam) {
            if (lam <= 0.0) return 0.0;
            return (std::exp(-(1.0 - s) * lam) - std::exp(-(2.0 - s) * lam) - std::exp(-(1.0 + s) * lam) +
                    std::exp(-(2.0 + s) * lam)) / lam;
        });
    };
    auto r = [&](double) { return Field(u.grid, 2); };
    auto qa = q_scan(time, idx, a1, 0.25 * u.grid.length());
    auto qr = q_scan(time, idx, r, 0.25 * u.grid.length());
    auto qa2 = q_scan(time, idx, [&](double s) {
        return to_physical(scale_modes(ws, [s](const Mode& md) { return std::exp(-s * md.lambda); }));
    }, 0.25 * u.grid.length());

    // relative increase over the last decade of eps (smallest eps vs the eps one decade above)
    auto last_decade = [&](const std::vector<std::array<double, 2>>& v) {
        std::size_t small = 0, ref = 0;
        for (std::size_t i = 0; i < idx.size(); ++i) {
            if (time.node(idx[i]) < time.node(idx[small])) small = i;
        }
        const double target = time.node(idx[small]) * 10.0;
        for (std::size_t i = 0; i < idx.size(); ++i) {
            if (std::abs(std::log(time.node(idx[i]) / target)) < std::abs(std::log(time.node(idx[ref]) / target))) ref = i;
        }
        const double a = v[ref][0], b = v[small][0];
        return a > 0.0 ? (b - a) / a : (b > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
    };
    json rows = json::array();
    for (std::size_t i = 0; i < idx.size(); ++i) {
        rows.push_back({{"eps", time.node(idx[i])}, {"Q_A1", qa[i][0]}, {"Q_R", qr[i][0]}, {"Q_A2", qa2[i][0]}});
    }
    return {{"rows", rows},
            {"A1_last_decade_increase", last_decade(qa)},
            {"R_last_decade_increase", last_decade(qr)},
            {"A2_last_decade_increase", last_decade(qa2)}};
}

}  // namespace ktns
