#pragma once

#include <cmath>
#include <vector>

#include "ktns/bilinear.hpp"
#include "ktns/rng.hpp"
#include "ktns/tent_norms.hpp"

namespace ktns {

/// Mean-zero function supported in the wrapped ball B(center, radius), with
/// |a|_2 = |B|^{-1/2} for the lattice measure of the ball.
struct Atom {
    std::array<double, 3> center{0.0, 0.0, 0.0};
    double radius = 0.0;
    Field values;
};

/// Wrapped squared distance between a lattice point and an arbitrary point.
inline double distance2_to(const Grid& g, std::size_t p, const std::array<double, 3>& c)
{
    auto x = g.position(p);
    double s = 0.0;
    for (int d = 0; d < g.dim(); ++d) {
        double off = std::remainder(x[d] - c[d], g.length());
        s += off * off;
    }
    return s;
}

/// Atom from the profile (1 - d^2/r^2)^2 (tilt + v.(x - c)/r), made mean zero on the ball.
inline Atom make_atom(const Grid& g, const std::array<double, 3>& center, double radius, double tilt,
                      const std::array<double, 3>& direction)
{
    if (!(radius > 0.0) || radius >= 0.5 * g.length()) throw ConfigurationError("atom radius out of range");
    Atom a;
    a.center = center;
    a.radius = radius;
    a.values = Field(g, 0);
    std::vector<std::size_t> ball;
    double sum = 0.0;
    for (std::size_t p = 0; p < g.size(); ++p) {
        double d2 = distance2_to(g, p, center);
        if (d2 >= radius * radius) continue;
        ball.push_back(p);
        auto x = g.position(p);
        double lin = tilt;
        for (int d = 0; d < g.dim(); ++d) lin += direction[d] * std::remainder(x[d] - center[d], g.length()) / radius;
        double b = 1.0 - d2 / (radius * radius);
        a.values.at(p) = b * b * lin;
        sum += a.values.at(p);
    }
    if (ball.size() < 2) throw ConfigurationError("atom ball contains fewer than two lattice points");
    const double m = sum / static_cast<double>(ball.size());
    for (std::size_t p : ball) a.values.at(p) -= m;
    const double measure = static_cast<double>(ball.size()) * g.cell_volume();
    const double norm = l2_norm(a.values);
    if (norm == 0.0) throw ConfigurationError("degenerate atom profile");
    a.values *= 1.0 / (norm * std::sqrt(measure));
    return a;
}

/// Random atoms with log-uniform radii in [r_min, r_max) and uniform centers.
inline std::vector<Atom> atom_family(const Grid& g, int count, double r_min, double r_max, std::uint64_t seed)
{
    if (count < 1 || !(r_min > 0.0) || !(r_max > r_min)) throw ConfigurationError("invalid atom family");
    Rng rng(seed);
    std::vector<Atom> out;
    out.reserve(count);
    for (int i = 0; i < count; ++i) {
        double r = r_min * std::pow(r_max / r_min, rng.uniform());
        std::array<double, 3> c{0.0, 0.0, 0.0};
        std::array<double, 3> v{0.0, 0.0, 0.0};
        double vn = 0.0;
        for (int d = 0; d < g.dim(); ++d) {
            c[d] = rng.uniform(0.0, g.length());
            v[d] = rng.normal();
            vn += v[d] * v[d];
        }
        for (int d = 0; d < g.dim(); ++d) v[d] /= std::sqrt(vn);
        out.push_back(make_atom(g, c, r, rng.uniform(), v));
    }
    return out;
}

/// e^{t Delta} h at every node.
inline SpaceTimeField heat_extension(const Field& h, const TimeGrid& time) { return heat_orbit(h, time); }

namespace detail {

inline void require_mean_zero(const Field& h, const char* what)
{
    if (h.rank != 0) throw ConfigurationError(std::string(what) + ": expected a scalar field");
    double scale = 0.0;
    for (double v : h.values) scale = std::max(scale, std::abs(v));
    if (std::abs(mean(h)) > 1e-12 * std::max(scale, 1e-300) && scale > 0.0) {
        throw PreconditionError(std::string(what) + ": input must have zero mean");
    }
}

}  // namespace detail

/// |N(e^{s Delta} h)|_{L^1}.
inline NormReport h1_norm_maximal(const Field& h, const TimeGrid& time)
{
    detail::require_mean_zero(h, "h1_norm_maximal");
    NormReport r = norm_T1inf(heat_extension(h, time));
    r.name = "H1_maximal";
    return r;
}

/// norm_T12 of s -> s^{1/2} Delta e^{s Delta} h, sampled at the nodes. The s^{1/2}
/// weight makes the value dilation invariant for the t^{-n/2} dy dt measure of norm_T12.
inline NormReport h1_norm_square(const Field& h, const TimeGrid& time)
{
    detail::require_mean_zero(h, "h1_norm_square");
    SpectralField s = to_spectral(h);
    std::vector<SpectralField> out(time.size());
    parallel_for(time.size(), [&](std::size_t j) {
        const double t = time.node(j);
        out[j] = scale_modes(s, [t](const Mode& md) { return -std::sqrt(t) * md.lambda * std::exp(-t * md.lambda); });
    });
    NormReport r = norm_T12(to_physical(out, time));
    r.name = "H1_square";
    return r;
}

/// S G = int_0^{t_J} grad P e^{t Delta} G(t) dt, exact on each slab.
inline Field s_operator(const SpaceTimeField& g)
{
    detail::require_grid(g, 1, "s_operator");
    auto gs = to_spectral(g);
    SpectralField acc(g.grid(), 1);
    detail::for_each_series(g.grid(), g.grid().dim(), [&](double lambda, std::size_t m, int c) {
        cplx s(0.0, 0.0);
        for (std::size_t k = 0; k < g.time.slab_count(); ++k) s += detail::slab_exp_weight(g.time, k, lambda) * gs[k].at(m, c);
        acc.at(m, c) = s;
    });
    return to_physical(grad_leray_spectral(acc));
}

/// Adjoint of A2 for the slab pairing: (A2* G)(s) = -e^{s Delta} S G.
/// The minus sign is the adjoint of P div, which is -grad P.
inline SpaceTimeField a2_star(const SpaceTimeField& g) { return heat_orbit(-1.0 * s_operator(g), g.time); }

/// Per-mode bound on the part of S G lost by truncating at t_J, per unit of sup_t |G(t)|_2.
inline double s_operator_tail(const Grid& g, const TimeGrid& time)
{
    double v = 0.0;
    for (const auto& md : modes(g)) {
        if (md.lambda > 0.0) v = std::max(v, std::sqrt(md.dlambda) * std::exp(-time.t_last() * md.lambda) / md.lambda);
    }
    return v;
}

}  // namespace ktns
