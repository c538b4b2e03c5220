#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "ktns/field.hpp"

namespace ktns {

// Zero-frequency conventions: P is the identity at xi = 0 and (-Delta)^{-sigma}
// vanishes there. Odd symbols use Mode::dxi (Nyquist axes zeroed) and P uses
// the same vector, so div P = 0 holds exactly on the lattice.

namespace detail {

inline void require_time(double t, const char* what)
{
    if (!(t >= 0.0) || !std::isfinite(t)) throw PreconditionError(std::string(what) + ": time must be >= 0");
}

inline void require_rank(const Field& f, int rank, const char* what)
{
    if (f.rank != rank) {
        throw ConfigurationError(std::string(what) + ": expected rank " + std::to_string(rank) + ", got " +
                                 std::to_string(f.rank));
    }
}

/// In-place Leray projection of one mode's vector v[0..n).
inline void project(const Mode& md, int n, cplx* v)
{
    if (md.dlambda <= 0.0) return;
    cplx dot(0.0, 0.0);
    for (int d = 0; d < n; ++d) dot += md.dxi[d] * v[d];
    for (int d = 0; d < n; ++d) v[d] -= md.dxi[d] * dot / md.dlambda;
}

/// One mode of P (i T xi'): the divergence of a tensor followed by P.
inline void leray_div_mode(const Mode& md, int n, const SpectralField& t, std::size_t m, cplx* out)
{
    const cplx i(0.0, 1.0);
    for (int j = 0; j < n; ++j) {
        cplx s(0.0, 0.0);
        for (int l = 0; l < n; ++l) s += md.dxi[l] * t.at(m, j * n + l);
        out[j] = i * s;
    }
    project(md, n, out);
}

}  // namespace detail

/// Multiplies every coefficient of mode m by factor(mode).
inline SpectralField scale_modes(SpectralField s, const std::function<double(const Mode&)>& factor)
{
    const auto& table = modes(s.grid);
    for (std::size_t m = 0; m < s.grid.size(); ++m) {
        double a = factor(table[m]);
        for (int c = 0; c < s.components(); ++c) s.at(m, c) *= a;
    }
    return s;
}

/// P div on spectral rank-2 data, returning rank-1 coefficients.
inline SpectralField leray_div_spectral(const SpectralField& t)
{
    const int n = t.grid.dim();
    SpectralField out(t.grid, 1);
    const auto& table = modes(t.grid);
    cplx v[3];
    for (std::size_t m = 0; m < t.grid.size(); ++m) {
        detail::leray_div_mode(table[m], n, t, m, v);
        for (int j = 0; j < n; ++j) out.at(m, j) = v[j];
    }
    return out;
}

/// grad P on spectral rank-1 data: (grad P g)_{jl} = i xi'_l (P g)_j.
inline SpectralField grad_leray_spectral(const SpectralField& g)
{
    const int n = g.grid.dim();
    SpectralField out(g.grid, 2);
    const auto& table = modes(g.grid);
    const cplx i(0.0, 1.0);
    cplx v[3];
    for (std::size_t m = 0; m < g.grid.size(); ++m) {
        for (int j = 0; j < n; ++j) v[j] = g.at(m, j);
        detail::project(table[m], n, v);
        for (int j = 0; j < n; ++j) {
            for (int l = 0; l < n; ++l) out.at(m, j * n + l) = i * table[m].dxi[l] * v[j];
        }
    }
    return out;
}

/// e^{t Delta} f, componentwise.
inline Field heat(double t, const Field& f)
{
    detail::require_time(t, "heat");
    if (t == 0.0) return f;
    return to_physical(scale_modes(to_spectral(f), [t](const Mode& md) { return std::exp(-t * md.lambda); }));
}

inline Field leray(const Field& f)
{
    detail::require_rank(f, 1, "leray");
    const int n = f.grid.dim();
    SpectralField s = to_spectral(f);
    const auto& table = modes(f.grid);
    cplx v[3];
    for (std::size_t m = 0; m < f.grid.size(); ++m) {
        for (int j = 0; j < n; ++j) v[j] = s.at(m, j);
        detail::project(table[m], n, v);
        for (int j = 0; j < n; ++j) s.at(m, j) = v[j];
    }
    return to_physical(s);
}

/// (div T)_j = sum_l d_l T_{jl} for rank 2; the scalar divergence for rank 1.
inline Field divergence(const Field& f)
{
    if (f.rank == 0) throw ConfigurationError("divergence: rank-0 input");
    const int n = f.grid.dim();
    SpectralField s = to_spectral(f);
    SpectralField out(f.grid, f.rank - 1);
    const auto& table = modes(f.grid);
    const cplx i(0.0, 1.0);
    const int outer = f.rank == 2 ? n : 1;
    for (std::size_t m = 0; m < f.grid.size(); ++m) {
        for (int j = 0; j < outer; ++j) {
            cplx acc(0.0, 0.0);
            for (int l = 0; l < n; ++l) acc += i * table[m].dxi[l] * s.at(m, j * n + l);
            out.at(m, j) = acc;
        }
    }
    return to_physical(out);
}

/// Raises rank by one: (grad f)_{..., l} = d_l f_{...}.
inline Field gradient(const Field& f)
{
    if (f.rank == 2) throw ConfigurationError("gradient: rank-2 input");
    const int n = f.grid.dim();
    SpectralField s = to_spectral(f);
    SpectralField out(f.grid, f.rank + 1);
    const auto& table = modes(f.grid);
    const cplx i(0.0, 1.0);
    const int outer = f.components();
    for (std::size_t m = 0; m < f.grid.size(); ++m) {
        for (int j = 0; j < outer; ++j) {
            for (int l = 0; l < n; ++l) out.at(m, j * n + l) = i * table[m].dxi[l] * s.at(m, j);
        }
    }
    return to_physical(out);
}

/// (-Delta) f.
inline Field neg_laplacian(const Field& f)
{
    return to_physical(scale_modes(to_spectral(f), [](const Mode& md) { return md.lambda; }));
}

/// (-Delta)^{-sigma} f; the zero mode is removed.
inline Field inv_laplacian_power(double sigma, const Field& f)
{
    if (!(sigma > 0.0)) throw ConfigurationError("inv_laplacian_power: sigma must be positive");
    return to_physical(scale_modes(to_spectral(f), [sigma](const Mode& md) {
        return md.lambda > 0.0 ? std::pow(md.lambda, -sigma) : 0.0;
    }));
}

/// e^{t Delta} P div T.
inline Field oseen_div(double t, const Field& tensor)
{
    detail::require_time(t, "oseen_div");
    detail::require_rank(tensor, 2, "oseen_div");
    SpectralField v = leray_div_spectral(to_spectral(tensor));
    return to_physical(scale_modes(std::move(v), [t](const Mode& md) { return std::exp(-t * md.lambda); }));
}

/// Scalar part of the T_s symbol: (s lambda)^{-1} (1 - e^{-2 s lambda}) s^{1/2}; zero at lambda = 0.
inline double ts_factor(double s, double lambda)
{
    if (lambda <= 0.0) return 0.0;
    return -std::expm1(-2.0 * s * lambda) / (s * lambda) * std::sqrt(s);
}

/// T_s = (s(-Delta))^{-1} (I - e^{2 s Delta}) s^{1/2} P div.
inline Field ts_apply(double s, const Field& tensor)
{
    if (!(s > 0.0)) throw PreconditionError("ts_apply: s must be > 0");
    detail::require_rank(tensor, 2, "ts_apply");
    SpectralField v = leray_div_spectral(to_spectral(tensor));
    return to_physical(scale_modes(std::move(v), [s](const Mode& md) { return ts_factor(s, md.lambda); }));
}

/// Operator families addressable as Fourier multipliers (used for kernels and probes).
enum class MultiplierKind {
    Heat,      // e^{t Delta}, scalar
    Oseen,     // e^{t Delta} P, n x n
    OseenDiv,  // t^{1/2} e^{t Delta} P div, n x n^2 (first derivatives of the Oseen kernel)
    Ts,        // T_s, n x n^2
    Kts,       // K(t, s) = e^{(t+s) Delta} P s^{-1/2} div, n x n^2
};

inline std::string to_string(MultiplierKind k)
{
    switch (k) {
    case MultiplierKind::Heat: return "heat";
    case MultiplierKind::Oseen: return "oseen";
    case MultiplierKind::OseenDiv: return "oseen_div";
    case MultiplierKind::Ts: return "ts";
    case MultiplierKind::Kts: return "kts";
    }
    return "unknown";
}

inline MultiplierKind multiplier_kind_from_string(const std::string& s)
{
    if (s == "heat") return MultiplierKind::Heat;
    if (s == "oseen") return MultiplierKind::Oseen;
    if (s == "oseen_div") return MultiplierKind::OseenDiv;
    if (s == "ts") return MultiplierKind::Ts;
    if (s == "kts") return MultiplierKind::Kts;
    throw ConfigurationError("unknown multiplier family '" + s + "'");
}

struct MultiplierSpec {
    MultiplierKind kind = MultiplierKind::Heat;
    double t = 0.0;          // main time parameter (s for Ts)
    double s = 0.0;          // second time for Kts
    double smoothing = 0.0;  // extra factor e^{-smoothing |xi|^2}

    /// Parabolic scale that sets the kernel's spatial extent.
    double scale_time() const { return kind == MultiplierKind::Kts ? t + s : t; }
};

inline int symbol_rows(const MultiplierSpec& spec, int n) { return spec.kind == MultiplierKind::Heat ? 1 : n; }
inline int symbol_cols(const MultiplierSpec& spec, int n)
{
    switch (spec.kind) {
    case MultiplierKind::Heat: return 1;
    case MultiplierKind::Oseen: return n;
    default: return n * n;
    }
}

/// Row-major symbol matrix of one mode; out has rows * cols entries.
inline void symbol_matrix(const MultiplierSpec& spec, const Mode& md, int n, cplx* out)
{
    const cplx i(0.0, 1.0);
    double scalar = std::exp(-spec.smoothing * md.lambda);
    double proj[3][3];
    for (int a = 0; a < n; ++a) {
        for (int b = 0; b < n; ++b) {
            proj[a][b] = (a == b ? 1.0 : 0.0) - (md.dlambda > 0.0 ? md.dxi[a] * md.dxi[b] / md.dlambda : 0.0);
        }
    }
    switch (spec.kind) {
    case MultiplierKind::Heat:
        out[0] = scalar * std::exp(-spec.t * md.lambda);
        return;
    case MultiplierKind::Oseen:
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) out[a * n + b] = scalar * std::exp(-spec.t * md.lambda) * proj[a][b];
        return;
    case MultiplierKind::OseenDiv: scalar *= std::sqrt(spec.t) * std::exp(-spec.t * md.lambda); break;
    case MultiplierKind::Ts: scalar *= ts_factor(spec.t, md.lambda); break;
    case MultiplierKind::Kts: scalar *= std::exp(-(spec.t + spec.s) * md.lambda) / std::sqrt(spec.s); break;
    }
    // P (i T xi'): entry (j, m n + l) = i P_{jm} xi'_l
    for (int j = 0; j < n; ++j)
        for (int m = 0; m < n; ++m)
            for (int l = 0; l < n; ++l) out[j * n * n + m * n + l] = scalar * i * proj[j][m] * md.dxi[l];
}

}  // namespace ktns
