#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "ktns/fft.hpp"
#include "ktns/grid.hpp"
#include "ktns/parallel.hpp"

namespace ktns {

using cplx = std::complex<double>;

/// Real lattice function with values in R (rank 0), R^n (rank 1) or R^n x R^n (rank 2).
///
/// Storage is point-major with the component index fastest; a rank-2 component
/// (j, l) sits at j * n + l.
struct Field {
    Grid grid;
    int rank = 0;
    std::vector<double> values;

    Field() = default;
    Field(const Grid& g, int r) : grid(g), rank(r)
    {
        if (r < 0 || r > 2) throw ConfigurationError("field rank must be 0, 1 or 2");
        values.assign(g.size() * static_cast<std::size_t>(component_count(g.dim(), r)), 0.0);
    }

    int components() const { return component_count(grid.dim(), rank); }
    std::size_t points() const { return grid.size(); }

    double& at(std::size_t p, int c = 0) { return values[p * components() + c]; }
    double at(std::size_t p, int c = 0) const { return values[p * components() + c]; }

    /// Pointwise Euclidean (rank 1) or Frobenius (rank 2) modulus.
    double modulus(std::size_t p) const
    {
        const int nc = components();
        double s = 0.0;
        for (int c = 0; c < nc; ++c) s += values[p * nc + c] * values[p * nc + c];
        return std::sqrt(s);
    }

    Field& operator+=(const Field& o)
    {
        check_same(o);
        for (std::size_t i = 0; i < values.size(); ++i) values[i] += o.values[i];
        return *this;
    }
    Field& operator-=(const Field& o)
    {
        check_same(o);
        for (std::size_t i = 0; i < values.size(); ++i) values[i] -= o.values[i];
        return *this;
    }
    Field& operator*=(double a)
    {
        for (auto& v : values) v *= a;
        return *this;
    }

    void check_same(const Field& o) const
    {
        if (grid != o.grid) throw ConfigurationError("fields live on different grids");
        if (rank != o.rank) throw ConfigurationError("fields have different ranks");
    }
};

inline Field operator+(Field a, const Field& b) { return a += b; }
inline Field operator-(Field a, const Field& b) { return a -= b; }
inline Field operator*(double s, Field a) { return a *= s; }

/// Maximum of the pointwise modulus.
inline double sup_norm(const Field& f)
{
    double m = 0.0;
    for (std::size_t p = 0; p < f.points(); ++p) m = std::max(m, f.modulus(p));
    return m;
}

/// Lattice L^2 norm (sum |f|^2 h^n)^{1/2}.
inline double l2_norm(const Field& f)
{
    double s = 0.0;
    for (double v : f.values) s += v * v;
    return std::sqrt(s * f.grid.cell_volume());
}

/// Lattice mean of one component.
inline double mean(const Field& f, int c = 0)
{
    double s = 0.0;
    for (std::size_t p = 0; p < f.points(); ++p) s += f.at(p, c);
    return s / static_cast<double>(f.points());
}

/// Frequency-space coefficients of a Field; component-planar (component c
/// occupies [c * size, (c + 1) * size)).
struct SpectralField {
    Grid grid;
    int rank = 0;
    std::vector<cplx> coeffs;

    SpectralField() = default;
    SpectralField(const Grid& g, int r) : grid(g), rank(r)
    {
        coeffs.assign(g.size() * static_cast<std::size_t>(component_count(g.dim(), r)), cplx(0.0, 0.0));
    }

    int components() const { return component_count(grid.dim(), rank); }
    std::span<cplx> component(int c) { return {coeffs.data() + c * grid.size(), grid.size()}; }
    std::span<const cplx> component(int c) const { return {coeffs.data() + c * grid.size(), grid.size()}; }
    cplx& at(std::size_t m, int c = 0) { return coeffs[c * grid.size() + m]; }
    cplx at(std::size_t m, int c = 0) const { return coeffs[c * grid.size() + m]; }
};

inline SpectralField to_spectral(const Field& f)
{
    if (f.values.size() != f.grid.size() * static_cast<std::size_t>(f.components())) {
        throw ConfigurationError("field storage does not match its grid");
    }
    SpectralField s(f.grid, f.rank);
    const int nc = f.components();
    for (int c = 0; c < nc; ++c) {
        auto comp = s.component(c);
        for (std::size_t p = 0; p < f.points(); ++p) comp[p] = cplx(f.values[p * nc + c], 0.0);
        FourierEngine::forward(f.grid, comp);
    }
    return s;
}

inline Field to_physical(const SpectralField& s)
{
    if (s.coeffs.size() != s.grid.size() * static_cast<std::size_t>(s.components())) {
        throw ConfigurationError("spectral storage does not match its grid");
    }
    Field f(s.grid, s.rank);
    const int nc = s.components();
    const double scale = 1.0 / static_cast<double>(s.grid.size());
    std::vector<cplx> buffer(s.grid.size());
    for (int c = 0; c < nc; ++c) {
        auto comp = s.component(c);
        std::copy(comp.begin(), comp.end(), buffer.begin());
        FourierEngine::backward(s.grid, buffer);
        for (std::size_t p = 0; p < f.points(); ++p) f.values[p * nc + c] = buffer[p].real() * scale;
    }
    return f;
}

/// Index of the frequency -k for frequency index m.
inline std::size_t conjugate_index(const Grid& g, std::size_t m)
{
    auto idx = g.multi_index(m);
    for (int d = 0; d < g.dim(); ++d) idx[d] = (g.points() - idx[d]) % g.points();
    return g.flat_index(idx);
}

/// max_k |c(-k) - conj(c(k))| relative to max |c|; zero for spectra of real fields.
inline double conjugate_symmetry_defect(const SpectralField& s)
{
    double defect = 0.0;
    double scale = 0.0;
    for (int c = 0; c < s.components(); ++c) {
        for (std::size_t m = 0; m < s.grid.size(); ++m) {
            defect = std::max(defect, std::abs(s.at(conjugate_index(s.grid, m), c) - std::conj(s.at(m, c))));
            scale = std::max(scale, std::abs(s.at(m, c)));
        }
    }
    return scale > 0.0 ? defect / scale : 0.0;
}

/// Lattice frequency data for one frequency index.
struct Mode {
    std::array<double, 3> xi{0.0, 0.0, 0.0};   // 2 pi k / L
    std::array<double, 3> dxi{0.0, 0.0, 0.0};  // derivative wave vector, zero on Nyquist axes
    double lambda = 0.0;                        // |xi|^2
    double dlambda = 0.0;                       // |dxi|^2
    int k2 = 0;                                 // |k|^2 in lattice units
};

/// Mode table of a grid, built once per (n, N, L).
inline const std::vector<Mode>& modes(const Grid& g)
{
    static std::mutex mutex;
    static std::map<std::tuple<int, int, double>, std::shared_ptr<std::vector<Mode>>> cache;
    std::lock_guard<std::mutex> lock(mutex);
    auto key = std::make_tuple(g.dim(), g.points(), g.length());
    auto it = cache.find(key);
    if (it != cache.end()) return *it->second;
    auto table = std::make_shared<std::vector<Mode>>(g.size());
    const double unit = g.wave_unit();
    for (std::size_t m = 0; m < g.size(); ++m) {
        auto idx = g.multi_index(m);
        Mode& md = (*table)[m];
        for (int d = 0; d < g.dim(); ++d) {
            int k = g.wave_number(idx[d]);
            md.xi[d] = unit * k;
            md.dxi[d] = (k == -g.points() / 2) ? 0.0 : unit * k;
            md.lambda += md.xi[d] * md.xi[d];
            md.dlambda += md.dxi[d] * md.dxi[d];
            md.k2 += k * k;
        }
    }
    cache.emplace(key, table);
    return *table;
}

/// Pointwise tensor product (u (x) v)_{jl} = u_j v_l.
inline Field tensor_product(const Field& u, const Field& v)
{
    if (u.grid != v.grid) throw ConfigurationError("tensor_product: grid mismatch");
    if (u.rank != 1 || v.rank != 1) throw ConfigurationError("tensor_product expects two rank-1 fields");
    const int n = u.grid.dim();
    Field t(u.grid, 2);
    for (std::size_t p = 0; p < u.points(); ++p) {
        for (int j = 0; j < n; ++j) {
            for (int l = 0; l < n; ++l) t.at(p, j * n + l) = u.at(p, j) * v.at(p, l);
        }
    }
    return t;
}

/// A Field per time node; all slices share one Grid and one rank.
struct SpaceTimeField {
    TimeGrid time;
    std::vector<Field> slices;

    SpaceTimeField() = default;
    SpaceTimeField(const Grid& g, const TimeGrid& t, int rank) : time(t), slices(t.size(), Field(g, rank)) {}

    const Grid& grid() const { return slices.front().grid; }
    int rank() const { return slices.front().rank; }
    std::size_t size() const { return slices.size(); }
    Field& operator[](std::size_t j) { return slices[j]; }
    const Field& operator[](std::size_t j) const { return slices[j]; }

    SpaceTimeField& operator+=(const SpaceTimeField& o)
    {
        check_same(o);
        for (std::size_t j = 0; j < slices.size(); ++j) slices[j] += o.slices[j];
        return *this;
    }
    SpaceTimeField& operator-=(const SpaceTimeField& o)
    {
        check_same(o);
        for (std::size_t j = 0; j < slices.size(); ++j) slices[j] -= o.slices[j];
        return *this;
    }
    SpaceTimeField& operator*=(double a)
    {
        for (auto& s : slices) s *= a;
        return *this;
    }

    void check_same(const SpaceTimeField& o) const
    {
        if (time != o.time) throw ConfigurationError("space-time fields use different time grids");
        if (slices.size() != o.slices.size()) throw ConfigurationError("space-time fields differ in length");
        if (!slices.empty()) slices.front().check_same(o.slices.front());
    }
};

inline SpaceTimeField operator+(SpaceTimeField a, const SpaceTimeField& b) { return a += b; }
inline SpaceTimeField operator-(SpaceTimeField a, const SpaceTimeField& b) { return a -= b; }
inline SpaceTimeField operator*(double s, SpaceTimeField a) { return a *= s; }

/// Sup of the pointwise modulus over all slices.
inline double sup_norm(const SpaceTimeField& f)
{
    double m = 0.0;
    for (const auto& s : f.slices) m = std::max(m, sup_norm(s));
    return m;
}

/// Slab inner product sum_{k<J} (t_{k+1} - t_k) sum_x F_k(x) . G_k(x) h^n.
inline double pairing(const SpaceTimeField& f, const SpaceTimeField& g)
{
    f.check_same(g);
    double total = 0.0;
    const double cell = f.grid().cell_volume();
    for (std::size_t k = 0; k < f.time.slab_count(); ++k) {
        double s = 0.0;
        const auto& a = f[k].values;
        const auto& b = g[k].values;
        for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
        total += f.time.slab_length(k) * s * cell;
    }
    return total;
}

/// Discrete L^2(space x time) norm with slab quadrature.
inline double l2_norm(const SpaceTimeField& f) { return std::sqrt(std::max(0.0, pairing(f, f))); }

/// Multiplies slab k by tau_k^gamma (tau_k the slab representative time; the
/// last node uses its own time).
inline SpaceTimeField weight_by_time_power(const SpaceTimeField& f, double gamma)
{
    SpaceTimeField out = f;
    for (std::size_t k = 0; k < f.size(); ++k) out[k] *= std::pow(f.time.representative(k), gamma);
    return out;
}

inline std::vector<SpectralField> to_spectral(const SpaceTimeField& f)
{
    std::vector<SpectralField> out(f.size());
    parallel_for(f.size(), [&](std::size_t j) { out[j] = to_spectral(f[j]); });
    return out;
}

inline SpaceTimeField to_physical(const std::vector<SpectralField>& s, const TimeGrid& time)
{
    if (s.size() != time.size()) throw ConfigurationError("spectral slices do not match the time grid");
    SpaceTimeField out;
    out.time = time;
    out.slices.resize(s.size());
    parallel_for(s.size(), [&](std::size_t j) { out.slices[j] = to_physical(s[j]); });
    return out;
}

}  // namespace ktns
