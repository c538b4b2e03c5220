#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "ktns/report.hpp"
#include "ktns/symbol_ops.hpp"
#include "ktns/tent_norms.hpp"

namespace ktns {

// Time discretization: data are piecewise constant in s on the slabs
// [t_k, t_{k+1}), k < J, and every s-integral of an exponential symbol is
// evaluated exactly on each slab. Outputs are sampled at the nodes t_j.

namespace detail {

/// int_0^d e^{-r lambda} dr, with the lambda = 0 limit d.
inline double phi(double d, double lambda) { return lambda > 0.0 ? -std::expm1(-d * lambda) / lambda : d; }

/// int over slab k of e^{-s lambda} ds.
inline double slab_exp_weight(const TimeGrid& time, std::size_t k, double lambda)
{
    return std::exp(-time.node(k) * lambda) * phi(time.slab_length(k), lambda);
}

inline std::vector<SpectralField> zero_slices(const Grid& g, int rank, std::size_t count)
{
    return std::vector<SpectralField>(count, SpectralField(g, rank));
}

inline void require_grid(const SpaceTimeField& f, int rank, const char* what)
{
    if (f.size() < 2) throw ConfigurationError(std::string(what) + ": empty time grid");
    if (f.rank() != rank) {
        throw ConfigurationError(std::string(what) + ": expected rank " + std::to_string(rank) + " input");
    }
}

/// P div of every slice, in frequency space.
inline std::vector<SpectralField> leray_div_slices(const SpaceTimeField& alpha)
{
    auto spec = to_spectral(alpha);
    std::vector<SpectralField> out(spec.size());
    parallel_for(spec.size(), [&](std::size_t k) { out[k] = leray_div_spectral(spec[k]); });
    return out;
}

/// Per-mode kernel over all (mode, component) pairs; fn(lambda, series) where
/// series(j) addresses coefficient j of the input and output time series.
template <class Fn>
void for_each_series(const Grid& g, int components, Fn&& fn)
{
    const auto& table = modes(g);
    const std::size_t total = g.size() * static_cast<std::size_t>(components);
    const std::size_t block = 256;
    parallel_for((total + block - 1) / block, [&](std::size_t b) {
        for (std::size_t i = b * block; i < std::min(total, (b + 1) * block); ++i) {
            const std::size_t m = i % g.size();
            const int c = static_cast<int>(i / g.size());
            fn(table[m].lambda, m, c);
        }
    });
}

/// Y_0 = 0, Y_{j+1} = e^{-dt_j lambda} Y_j + w(dt_j, lambda) X_j.
template <class Weight>
std::vector<SpectralField> forward_sweep(const std::vector<SpectralField>& x, const TimeGrid& time, Weight weight)
{
    const Grid& g = x.front().grid;
    const int nc = x.front().components();
    auto y = zero_slices(g, x.front().rank, x.size());
    for_each_series(g, nc, [&](double lambda, std::size_t m, int c) {
        cplx acc(0.0, 0.0);
        for (std::size_t j = 0; j + 1 < x.size(); ++j) {
            const double d = time.slab_length(j);
            acc = std::exp(-d * lambda) * acc + weight(d, lambda) * x[j].at(m, c);
            y[j + 1].at(m, c) = acc;
        }
    });
    return y;
}

}  // namespace detail

/// A(alpha)(t) = int_0^t e^{(t-s) Delta} P div alpha(s) ds.
inline SpaceTimeField apply_A(const SpaceTimeField& alpha)
{
    detail::require_grid(alpha, 2, "apply_A");
    auto x = detail::leray_div_slices(alpha);
    return to_physical(detail::forward_sweep(x, alpha.time, detail::phi), alpha.time);
}

/// Nonlinear products keep |k_i| < N/3 (two-thirds rule).
inline Field dealias(const Field& f)
{
    SpectralField s = to_spectral(f);
    const Grid& g = f.grid;
    const int cut = g.points() / 3;
    for (std::size_t m = 0; m < g.size(); ++m) {
        auto idx = g.multi_index(m);
        bool keep = true;
        for (int d = 0; d < g.dim(); ++d) keep = keep && std::abs(g.wave_number(idx[d])) < cut;
        if (!keep) {
            for (int c = 0; c < s.components(); ++c) s.at(m, c) = 0.0;
        }
    }
    return to_physical(s);
}

/// Slicewise u (x) v, optionally dealiased.
inline SpaceTimeField tensor_product(const SpaceTimeField& u, const SpaceTimeField& v, bool dealiased = false)
{
    u.check_same(v);
    SpaceTimeField out;
    out.time = u.time;
    out.slices.resize(u.size());
    parallel_for(u.size(), [&](std::size_t j) {
        if (dealiased) {
            out[j] = dealias(tensor_product(dealias(u[j]), dealias(v[j])));
        } else {
            out[j] = tensor_product(u[j], v[j]);
        }
    });
    return out;
}

/// B(u, v)(t) = int_0^t e^{(t-s) Delta} P div (u (x) v)(s) ds.
inline SpaceTimeField bilinear_B(const SpaceTimeField& u, const SpaceTimeField& v, bool dealiased = false)
{
    detail::require_grid(u, 1, "bilinear_B");
    detail::require_grid(v, 1, "bilinear_B");
    return apply_A(tensor_product(u, v, dealiased));
}

/// M+ F(t) = int_0^t e^{(t-s) Delta} Delta F(s) ds, componentwise on any rank.
inline SpaceTimeField apply_Mplus(const SpaceTimeField& f)
{
    if (f.size() < 2) throw ConfigurationError("apply_Mplus: empty time grid");
    auto x = to_spectral(f);
    auto w = [](double d, double lambda) { return std::expm1(-d * lambda); };
    return to_physical(detail::forward_sweep(x, f.time, w), f.time);
}

/// The sign-flipped variant int_0^t e^{(t-s) Delta} (-Delta) F(s) ds = -M+ F used by A1.
inline SpaceTimeField apply_Mplus_tilde(const SpaceTimeField& f)
{
    if (f.size() < 2) throw ConfigurationError("apply_Mplus_tilde: empty time grid");
    auto x = to_spectral(f);
    auto w = [](double d, double lambda) { return -std::expm1(-d * lambda); };
    return to_physical(detail::forward_sweep(x, f.time, w), f.time);
}

/// (T F)(s) = T_s F(s) slicewise, with s the slab representative time.
inline SpaceTimeField apply_Tcal(const SpaceTimeField& f)
{
    detail::require_grid(f, 2, "apply_Tcal");
    SpaceTimeField out;
    out.time = f.time;
    out.slices.resize(f.size());
    parallel_for(f.size(), [&](std::size_t k) { out[k] = ts_apply(f.time.representative(k), f[k]); });
    return out;
}

/// A1(alpha)(t) = int_0^t e^{(t-s) Delta}(I - e^{2 s Delta}) P div alpha(s) ds, summed slab by slab.
inline SpaceTimeField apply_A1(const SpaceTimeField& alpha)
{
    detail::require_grid(alpha, 2, "apply_A1");
    auto x = detail::leray_div_slices(alpha);
    const TimeGrid& time = alpha.time;
    const std::size_t J = time.size();
    auto y = detail::zero_slices(alpha.grid(), 1, J);
    detail::for_each_series(alpha.grid(), alpha.grid().dim(), [&](double lambda, std::size_t m, int c) {
        for (std::size_t j = 1; j < J; ++j) {
            const double t = time.node(j);
            cplx acc(0.0, 0.0);
            for (std::size_t k = 0; k < j; ++k) {
                double w = detail::phi(time.slab_length(k), lambda) *
                           (std::exp(-(t - time.node(k + 1)) * lambda) - std::exp(-(t + time.node(k)) * lambda));
                acc += w * x[k].at(m, c);
            }
            y[j].at(m, c) = acc;
        }
    });
    return to_physical(y, time);
}

/// H = int_0^{t_J} e^{s Delta} P div alpha(s) ds, so that A2(alpha)(t) = e^{t Delta} H.
inline Field a2_core(const SpaceTimeField& alpha)
{
    detail::require_grid(alpha, 2, "a2_core");
    auto x = detail::leray_div_slices(alpha);
    SpectralField h(alpha.grid(), 1);
    detail::for_each_series(alpha.grid(), alpha.grid().dim(), [&](double lambda, std::size_t m, int c) {
        cplx acc(0.0, 0.0);
        for (std::size_t k = 0; k < alpha.time.slab_count(); ++k) {
            acc += detail::slab_exp_weight(alpha.time, k, lambda) * x[k].at(m, c);
        }
        h.at(m, c) = acc;
    });
    return to_physical(h);
}

/// Semigroup orbit t -> e^{t Delta} h sampled at the nodes.
inline SpaceTimeField heat_orbit(const Field& h, const TimeGrid& time)
{
    SpectralField s = to_spectral(h);
    std::vector<SpectralField> out(time.size());
    parallel_for(time.size(), [&](std::size_t j) {
        const double t = time.node(j);
        out[j] = scale_modes(s, [t](const Mode& md) { return std::exp(-t * md.lambda); });
    });
    return to_physical(out, time);
}

/// A2(alpha)(t) = int_0^{t_J} e^{(t+s) Delta} P div alpha(s) ds.
inline SpaceTimeField apply_A2(const SpaceTimeField& alpha) { return heat_orbit(a2_core(alpha), alpha.time); }

namespace detail {

/// out_j = sign * e^{-t_j lambda} sum_{j <= k < J} c_k(lambda) w_k X_k.
inline std::vector<SpectralField> tail_sweep(const std::vector<SpectralField>& x, const TimeGrid& time,
                                             const std::vector<double>& slab_factor, double sign)
{
    const Grid& g = x.front().grid;
    auto y = zero_slices(g, 1, x.size());
    const std::size_t J = time.size();
    for_each_series(g, g.dim(), [&](double lambda, std::size_t m, int c) {
        cplx acc(0.0, 0.0);
        for (std::size_t k = J - 1; k-- > 0;) {
            acc += slab_exp_weight(time, k, lambda) * slab_factor[k] * x[k].at(m, c);
            y[k].at(m, c) = sign * std::exp(-time.node(k) * lambda) * acc;
        }
    });
    return y;
}

}  // namespace detail

/// A3(alpha)(t) = -int_t^{t_J} e^{(t+s) Delta} P div alpha(s) ds.
inline SpaceTimeField apply_A3(const SpaceTimeField& alpha)
{
    detail::require_grid(alpha, 2, "apply_A3");
    auto x = detail::leray_div_slices(alpha);
    std::vector<double> ones(alpha.size(), 1.0);
    return to_physical(detail::tail_sweep(x, alpha.time, ones, -1.0), alpha.time);
}

/// R F(t) = int_t^{t_J} e^{(t+s) Delta} P s^{-1/2} div F(s) ds, with s^{-1/2} at the slab representative.
inline SpaceTimeField apply_R(const SpaceTimeField& f)
{
    detail::require_grid(f, 2, "apply_R");
    auto x = detail::leray_div_slices(f);
    std::vector<double> w(f.size());
    for (std::size_t k = 0; k < f.size(); ++k) w[k] = 1.0 / std::sqrt(f.time.representative(k));
    return to_physical(detail::tail_sweep(x, f.time, w, 1.0), f.time);
}

/// Exact continuum pairing int <e^{t Delta} h, G(t)> dt for G piecewise constant on the slabs.
inline double orbit_pairing(const Field& h, const SpaceTimeField& g)
{
    if (h.grid != g.grid() || h.rank != g.rank()) throw ConfigurationError("orbit_pairing: shape mismatch");
    SpectralField hs = to_spectral(h);
    auto gs = to_spectral(g);
    const auto& table = modes(h.grid);
    double total = 0.0;
    for (std::size_t k = 0; k < g.time.slab_count(); ++k) {
        double s = 0.0;
        for (int c = 0; c < h.components(); ++c) {
            for (std::size_t m = 0; m < h.grid.size(); ++m) {
                s += detail::slab_exp_weight(g.time, k, table[m].lambda) *
                     (hs.at(m, c) * std::conj(gs[k].at(m, c))).real();
            }
        }
        total += s;
    }
    return total * h.grid.cell_volume() / static_cast<double>(h.grid.size());
}

/// Truncation of the s-integrals at t_J: sup over nonzero modes of the symbol
/// mass beyond t_J, per unit of sup_s |alpha(s)|_2 (A2) or |F(s)|_2 (R).
inline json truncation_tails(const Grid& g, const TimeGrid& time)
{
    double a2 = 0.0;
    double r = 0.0;
    const double t0 = time.t_min();
    const double tj = time.t_last();
    for (const auto& md : modes(g)) {
        if (md.lambda <= 0.0) continue;
        double v = std::sqrt(md.dlambda) * std::exp(-(t0 + tj) * md.lambda) / md.lambda;
        a2 = std::max(a2, v);
        r = std::max(r, v / std::sqrt(tj));
    }
    return {{"A2", a2}, {"R", r}};
}

/// Ratios of both sides of the two linear estimates for one alpha:
///   sup t^{1/2}|A alpha|_inf  vs  |alpha|_{T^{inf,1}} + sup |s alpha|_inf
///   |A alpha|_{T^{inf,2}}     vs  |alpha|_{T^{inf,1}} + |s^{1/2} alpha|_{T^{inf,2}}
inline std::pair<BoundReport, BoundReport> linear_est_check(const SpaceTimeField& alpha)
{
    detail::require_grid(alpha, 2, "linear_est_check");
    SpaceTimeField a = apply_A(alpha);
    double lhs1 = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) lhs1 = std::max(lhs1, std::sqrt(a.time.node(j)) * sup_norm(a[j]));
    const double t1 = norm_Tinf(alpha, 1).value;
    const double s_sup = sup_norm(weight_by_time_power(alpha, 1.0));
    const double lhs2 = norm_Tinf(a, 2).value;
    const double s_t2 = norm_Tinf(weight_by_time_power(alpha, 0.5), 2).value;

    auto make = [](const char* name, double lhs, double rhs) {
        BoundReport r;
        r.name = name;
        r.values["lhs"] = lhs;
        r.values["rhs"] = rhs;
        r.constant = rhs > 0.0 ? lhs / rhs : 0.0;
        r.passed = std::isfinite(r.constant);
        return r;
    };
    if (t1 + s_sup == 0.0 && t1 + s_t2 == 0.0 && lhs1 == 0.0 && lhs2 == 0.0) {
        return {make("linear_est1", 0.0, 0.0), make("linear_est2", 0.0, 0.0)};
    }
    if (t1 + s_sup == 0.0 || t1 + s_t2 == 0.0) throw PreconditionError("linear_est_check: degenerate alpha");
    return {make("linear_est1", lhs1, t1 + s_sup), make("linear_est2", lhs2, t1 + s_t2)};
}

}  // namespace ktns
