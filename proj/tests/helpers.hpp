#pragma once

#include <cmath>
#include <cstdint>

#include "ktns/ktns.hpp"

namespace ktns::testing {

inline Field random_field(const Grid& g, int rank, std::uint64_t seed)
{
    Rng rng(seed);
    Field f(g, rank);
    for (auto& v : f.values) v = rng.normal();
    return f;
}

/// Random field with only |k_i| <= kmax, so that derivatives stay well resolved.
inline Field smooth_field(const Grid& g, int rank, std::uint64_t seed, int kmax = 3)
{
    SpectralField s = to_spectral(random_field(g, rank, seed));
    for (std::size_t m = 0; m < g.size(); ++m) {
        auto idx = g.multi_index(m);
        bool keep = true;
        for (int d = 0; d < g.dim(); ++d) keep = keep && std::abs(g.wave_number(idx[d])) <= kmax;
        if (!keep)
            for (int c = 0; c < s.components(); ++c) s.at(m, c) = 0.0;
    }
    return to_physical(s);
}

/// cos(2 pi k.x / L) in one component of a rank-r field.
inline Field cosine_mode(const Grid& g, const std::array<int, 3>& k, int rank = 0, int component = 0)
{
    Field f(g, rank);
    for (std::size_t p = 0; p < g.size(); ++p) {
        auto x = g.position(p);
        double phase = 0.0;
        for (int d = 0; d < g.dim(); ++d) phase += g.wave_unit() * k[d] * x[d];
        f.at(p, component) = std::cos(phase);
    }
    return f;
}

inline double rel_err(const Field& a, const Field& b)
{
    const double s = std::max(l2_norm(a), l2_norm(b));
    return s > 0.0 ? l2_norm(a - b) / s : 0.0;
}

inline double rel_err(const SpaceTimeField& a, const SpaceTimeField& b)
{
    const double s = std::max(l2_norm(a), l2_norm(b));
    return s > 0.0 ? l2_norm(a - b) / s : 0.0;
}

inline double rel_diff(double a, double b)
{
    const double s = std::max(std::abs(a), std::abs(b));
    return s > 0.0 ? std::abs(a - b) / s : 0.0;
}

/// Constant-in-time space-time field.
inline SpaceTimeField constant_in_time(const Field& f, const TimeGrid& time)
{
    SpaceTimeField out(f.grid, time, f.rank);
    for (auto& s : out.slices) s = f;
    return out;
}

}  // namespace ktns::testing
