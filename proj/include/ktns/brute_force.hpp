#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "ktns/field.hpp"
#include "ktns/tent_norms.hpp"

// Naive double-loop evaluations of the tent norms. They share only the lattice
// distance with tent_norms.hpp and cost O(nodes * points^2); meant for N <= 32.

namespace ktns::brute {

namespace detail {

/// Flat indices of the lattice points y with |y - x| < r (all points once r >= L/2).
class Ball {
public:
    Ball(const Grid& g, double r) : g_(g)
    {
        for (std::size_t q = 0; q < g.size(); ++q) {
            if (r >= 0.5 * g.length() || g.distance2(q, 0) < r * r) offsets_.push_back(g.multi_index(q));
        }
    }

    template <class Fn>
    void each(std::size_t x, Fn fn) const
    {
        const auto c = g_.multi_index(x);
        for (const auto& o : offsets_) {
            std::array<int, 3> idx{0, 0, 0};
            for (int d = 0; d < g_.dim(); ++d) idx[d] = (c[d] + o[d]) % g_.points();
            fn(g_.flat_index(idx));
        }
    }

private:
    Grid g_;
    std::vector<std::array<int, 3>> offsets_;
};

inline std::vector<double> modulus_p(const Field& f, double p)
{
    std::vector<double> m(f.points());
    for (std::size_t q = 0; q < f.points(); ++q) m[q] = std::pow(f.modulus(q), p);
    return m;
}

}  // namespace detail

/// sup over windows (x, t_j), j >= 1, of (t_j^{-n/2} sum_{k<j} dt_k sum_{|y-x|<sqrt t_j} |F_k(y)|^p h^n)^{1/p}.
inline double tinf(const SpaceTimeField& f, double p, std::size_t last = static_cast<std::size_t>(-1))
{
    const Grid& g = f.grid();
    const double h = g.cell_volume();
    last = std::min(last, f.size() - 1);
    std::vector<double> acc(g.size(), 0.0);
    double best = 0.0;
    for (std::size_t j = 1; j <= last; ++j) {
        auto m = detail::modulus_p(f[j - 1], p);
        for (std::size_t y = 0; y < g.size(); ++y) acc[y] += f.time.slab_length(j - 1) * m[y];
        const double t = f.time.node(j);
        const detail::Ball ball(g, std::sqrt(t));
        for (std::size_t x = 0; x < g.size(); ++x) {
            double s = 0.0;
            ball.each(x, [&](std::size_t y) { s += acc[y]; });
            best = std::max(best, s * h * std::pow(t, -0.5 * g.dim()));
        }
    }
    return std::pow(best, 1.0 / p);
}

/// sum_x h^n (sum_{k<J} dt_k t_k^{-n/2} sum_{|y-x|<sqrt t_k} |F_k(y)|^2 h^n)^{1/2}.
inline double t12(const SpaceTimeField& f)
{
    const Grid& g = f.grid();
    const double h = g.cell_volume();
    std::vector<double> inner(g.size(), 0.0);
    for (std::size_t k = 0; k + 1 < f.size(); ++k) {
        auto m = detail::modulus_p(f[k], 2.0);
        const double t = f.time.node(k);
        const double w = f.time.slab_length(k) * std::pow(t, -0.5 * g.dim()) * h;
        const detail::Ball ball(g, std::sqrt(t));
        for (std::size_t x = 0; x < g.size(); ++x) {
            ball.each(x, [&](std::size_t y) { inner[x] += w * m[y]; });
        }
    }
    double total = 0.0;
    for (double v : inner) total += std::sqrt(v);
    return total * h;
}

/// Cone scan: N(F)(x) = max over j and |y - x| < sqrt t_j of |F_j(y)|.
inline Field nontangential(const SpaceTimeField& f)
{
    const Grid& g = f.grid();
    Field out(g, 0);
    for (std::size_t j = 0; j < f.size(); ++j) {
        const detail::Ball ball(g, std::sqrt(f.time.node(j)));
        for (std::size_t x = 0; x < g.size(); ++x) {
            ball.each(x, [&](std::size_t y) { out.at(x) = std::max(out.at(x), f[j].modulus(y)); });
        }
    }
    return out;
}

/// Elliptic windows (x, sigma_j): (sigma_j^{-n} sum_{k<j} ln(sigma_{k+1}/sigma_k) sum_{|y-x|<sigma_j} |G_k|^2 h^n)^{1/2}.
inline double tinf2_elliptic(const SpaceTimeField& g_el)
{
    const Grid& g = g_el.grid();
    const double h = g.cell_volume();
    std::vector<double> acc(g.size(), 0.0);
    double best = 0.0;
    for (std::size_t j = 1; j < g_el.size(); ++j) {
        auto m = detail::modulus_p(g_el[j - 1], 2.0);
        const double w = std::log(g_el.time.node(j) / g_el.time.node(j - 1));
        for (std::size_t y = 0; y < g.size(); ++y) acc[y] += w * m[y];
        const double sigma = g_el.time.node(j);
        const detail::Ball ball(g, sigma);
        for (std::size_t x = 0; x < g.size(); ++x) {
            double s = 0.0;
            ball.each(x, [&](std::size_t y) { s += acc[y]; });
            best = std::max(best, s * h * std::pow(sigma, -static_cast<double>(g.dim())));
        }
    }
    return std::sqrt(best);
}

}  // namespace ktns::brute
