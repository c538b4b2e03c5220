#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace ktns {

/// Invalid parameters, shapes or configuration values.
class ConfigurationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A documented precondition of an operation does not hold.
class PreconditionError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

inline constexpr double pi = 3.14159265358979323846;

/// Unit-ball volume in dimension n.
inline double unit_ball_volume(int n) { return std::pow(pi, 0.5 * n) / std::tgamma(0.5 * n + 1.0); }

/// Periodic lattice of N^n points on the torus [0, L)^n.
///
/// Point indices are row-major: the last coordinate varies fastest.
/// Frequency index m in [0, N) corresponds to wave number k = m (m < N/2)
/// or k = m - N, so k ranges over [-N/2, N/2).
class Grid {
public:
    Grid() = default;

    Grid(int dim, int points, double length) : dim_(dim), points_(points), length_(length)
    {
        if (dim != 2 && dim != 3) {
            throw ConfigurationError("grid dimension must be 2 or 3, got " + std::to_string(dim));
        }
        if (points < 8 || (points & (points - 1)) != 0) {
            throw ConfigurationError("grid points per dimension must be a power of two >= 8, got " +
                                     std::to_string(points));
        }
        if (!(length > 0.0) || !std::isfinite(length)) {
            throw ConfigurationError("grid period must be positive");
        }
        size_ = 1;
        for (int d = 0; d < dim; ++d) size_ *= static_cast<std::size_t>(points);
    }

    int dim() const { return dim_; }
    int points() const { return points_; }
    double length() const { return length_; }
    std::size_t size() const { return size_; }
    double spacing() const { return length_ / points_; }
    double cell_volume() const { return std::pow(spacing(), dim_); }
    double wave_unit() const { return 2.0 * pi / length_; }

    /// Wave number of a frequency index.
    int wave_number(int m) const { return m < points_ / 2 ? m : m - points_; }

    std::array<int, 3> multi_index(std::size_t p) const
    {
        std::array<int, 3> idx{0, 0, 0};
        for (int d = dim_ - 1; d >= 0; --d) {
            idx[d] = static_cast<int>(p % points_);
            p /= points_;
        }
        return idx;
    }

    std::size_t flat_index(const std::array<int, 3>& idx) const
    {
        std::size_t p = 0;
        for (int d = 0; d < dim_; ++d) {
            int i = ((idx[d] % points_) + points_) % points_;
            p = p * points_ + static_cast<std::size_t>(i);
        }
        return p;
    }

    /// Wrapped per-axis offset in lattice units, in [-N/2, N/2).
    int wrapped_offset(int a, int b) const
    {
        int d = ((a - b) % points_ + points_) % points_;
        return d >= points_ / 2 ? d - points_ : d;
    }

    /// Squared wrapped Euclidean distance between two lattice points.
    double distance2(std::size_t p, std::size_t q) const
    {
        auto a = multi_index(p);
        auto b = multi_index(q);
        double h = spacing();
        double s = 0.0;
        for (int d = 0; d < dim_; ++d) {
            double off = wrapped_offset(a[d], b[d]) * h;
            s += off * off;
        }
        return s;
    }

    /// Squared distance of a lattice point to the origin (wrapped).
    double norm2(std::size_t p) const { return distance2(p, 0); }

    std::array<double, 3> position(std::size_t p) const
    {
        auto idx = multi_index(p);
        std::array<double, 3> x{0.0, 0.0, 0.0};
        for (int d = 0; d < dim_; ++d) x[d] = idx[d] * spacing();
        return x;
    }

    bool operator==(const Grid& o) const
    {
        return dim_ == o.dim_ && points_ == o.points_ && length_ == o.length_;
    }
    bool operator!=(const Grid& o) const { return !(*this == o); }

private:
    int dim_ = 2;
    int points_ = 8;
    double length_ = 2.0 * pi;
    std::size_t size_ = 64;
};

/// Number of components of a rank-r field in dimension n.
inline int component_count(int dim, int rank)
{
    int c = 1;
    for (int r = 0; r < rank; ++r) c *= dim;
    return c;
}

/// Geometric time grid t_j = t_min * rho^j, j = 0..J, with t_J <= t_max < t_J * rho.
///
/// Node t_k owns the slab [t_k, t_{k+1}) for k < J. The last node closes the
/// grid and owns no slab, so all time integrals run over [t_min, t_J].
class TimeGrid {
public:
    TimeGrid() = default;

    static TimeGrid geometric(double t_min, double t_max, double ratio)
    {
        if (!(t_min > 0.0) || !(t_max > t_min) || !(ratio > 1.0)) {
            throw ConfigurationError("time grid needs 0 < t_min < t_max and ratio > 1");
        }
        TimeGrid g;
        g.ratio_ = ratio;
        g.t_max_ = t_max;
        int last = static_cast<int>(std::floor(std::log(t_max / t_min) / std::log(ratio) + 1e-9));
        if (last < 1) throw ConfigurationError("time grid must contain at least two nodes");
        g.nodes_.reserve(last + 1);
        for (int j = 0; j <= last; ++j) g.nodes_.push_back(t_min * std::pow(ratio, j));
        g.nodes_.back() = std::min(g.nodes_.back(), t_max);
        return g;
    }

    /// Arbitrary strictly increasing positive nodes (used for resampled grids).
    static TimeGrid from_nodes(std::vector<double> nodes)
    {
        if (nodes.size() < 2) throw ConfigurationError("time grid must contain at least two nodes");
        if (!(nodes.front() > 0.0)) throw ConfigurationError("time nodes must be positive");
        for (std::size_t j = 1; j < nodes.size(); ++j) {
            if (!(nodes[j] > nodes[j - 1])) throw ConfigurationError("time nodes must increase strictly");
        }
        TimeGrid g;
        g.ratio_ = nodes[1] / nodes[0];
        g.t_max_ = nodes.back();
        g.nodes_ = std::move(nodes);
        return g;
    }

    /// Geometric grid with a fixed number of nodes per decade.
    static TimeGrid per_decade(double t_min, double t_max, int nodes_per_decade)
    {
        if (nodes_per_decade < 1) throw ConfigurationError("nodes_per_decade must be >= 1");
        return geometric(t_min, t_max, std::pow(10.0, 1.0 / nodes_per_decade));
    }

    std::size_t size() const { return nodes_.size(); }
    std::size_t slab_count() const { return nodes_.empty() ? 0 : nodes_.size() - 1; }
    double node(std::size_t j) const { return nodes_[j]; }
    const std::vector<double>& nodes() const { return nodes_; }
    double t_min() const { return nodes_.front(); }
    double t_last() const { return nodes_.back(); }
    double t_max() const { return t_max_; }
    double ratio() const { return ratio_; }

    double slab_length(std::size_t k) const { return nodes_[k + 1] - nodes_[k]; }

    /// Representative time of slab k: arithmetic midpoint; the last node maps to itself.
    double representative(std::size_t k) const
    {
        return k + 1 < nodes_.size() ? 0.5 * (nodes_[k] + nodes_[k + 1]) : nodes_[k];
    }

    /// Index of the node equal to t within relative tolerance, or throws.
    std::size_t index_of(double t, double rel_tol = 1e-9) const
    {
        for (std::size_t j = 0; j < nodes_.size(); ++j) {
            if (std::abs(nodes_[j] - t) <= rel_tol * t) return j;
        }
        throw PreconditionError("time " + std::to_string(t) + " is not a grid node");
    }

    /// Largest node index with t_j <= t (relative tolerance), or throws if t < t_min.
    std::size_t last_index_at_or_below(double t, double rel_tol = 1e-9) const
    {
        if (t < nodes_.front() * (1.0 - rel_tol)) {
            throw PreconditionError("time " + std::to_string(t) + " lies below the time grid");
        }
        std::size_t j = 0;
        while (j + 1 < nodes_.size() && nodes_[j + 1] <= t * (1.0 + rel_tol)) ++j;
        return j;
    }

    bool operator==(const TimeGrid& o) const { return nodes_ == o.nodes_; }
    bool operator!=(const TimeGrid& o) const { return !(*this == o); }

private:
    std::vector<double> nodes_;
    double ratio_ = 2.0;
    double t_max_ = 1.0;
};

}  // namespace ktns
