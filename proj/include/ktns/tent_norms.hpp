#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <tuple>
#include <vector>

#include "json.hpp"
#include "ktns/field.hpp"

namespace ktns {

struct NormReport {
    std::string name;
    double value = 0.0;
    std::map<std::string, double> parts;  // named summands when the norm has several
    int dim = 0;
    int points = 0;
    double length = 0.0;
    std::size_t time_nodes = 0;
    double seconds = 0.0;  // wall time; kept out of to_json for reproducible reports

    nlohmann::json to_json() const
    {
        nlohmann::json j;
        j["name"] = name;
        j["value"] = value;
        j["parts"] = parts;
        j["grid"] = {{"n", dim}, {"N", points}, {"L", length}};
        j["time_nodes"] = time_nodes;
        return j;
    }
};

/// Lattice points of the wrapped open ball B(0, r), or the whole torus for r >= L/2.
inline bool in_ball(const Grid& g, double d2, double r)
{
    return r >= 0.5 * g.length() || d2 < r * r;
}

namespace detail {

inline NormReport make_report(const std::string& name, const SpaceTimeField& f, double value)
{
    NormReport r;
    r.name = name;
    r.value = value;
    r.dim = f.grid().dim();
    r.points = f.grid().points();
    r.length = f.grid().length();
    r.time_nodes = f.size();
    return r;
}

/// Spectrum of the indicator of B(0, r), cached per (grid, r).
inline const SpectralField& ball_spectrum(const Grid& g, double r)
{
    static std::mutex mutex;
    static std::map<std::tuple<int, int, double, double>, std::shared_ptr<SpectralField>> cache;
    const double key_r = r >= 0.5 * g.length() ? 0.5 * g.length() : r;
    auto key = std::make_tuple(g.dim(), g.points(), g.length(), key_r);
    {
        std::lock_guard<std::mutex> lock(mutex);
        auto it = cache.find(key);
        if (it != cache.end()) return *it->second;
    }
    Field ind(g, 0);
    for (std::size_t p = 0; p < g.size(); ++p) ind.at(p) = in_ball(g, g.norm2(p), key_r) ? 1.0 : 0.0;
    auto spec = std::make_shared<SpectralField>(to_spectral(ind));
    std::lock_guard<std::mutex> lock(mutex);
    return *cache.emplace(key, spec).first->second;
}

/// Lattice offsets of B(0, r), cached per (grid, r).
inline const std::vector<std::array<int, 3>>& ball_offsets(const Grid& g, double r)
{
    static std::mutex mutex;
    static std::map<std::tuple<int, int, double, double>, std::shared_ptr<std::vector<std::array<int, 3>>>> cache;
    auto key = std::make_tuple(g.dim(), g.points(), g.length(), r);
    {
        std::lock_guard<std::mutex> lock(mutex);
        auto it = cache.find(key);
        if (it != cache.end()) return *it->second;
    }
    auto list = std::make_shared<std::vector<std::array<int, 3>>>();
    for (std::size_t p = 0; p < g.size(); ++p) {
        if (in_ball(g, g.norm2(p), r)) list->push_back(g.multi_index(p));
    }
    std::lock_guard<std::mutex> lock(mutex);
    return *cache.emplace(key, list).first->second;
}

/// Balls with at most this many lattice points are summed directly.
inline constexpr std::size_t direct_ball_limit = 512;

/// (1_B(0,r) * a)(x) = sum_{y in B(x, r)} a(y), a scalar lattice function. Small
/// balls are summed term by term so that sums far from the support of a stay
/// exactly zero instead of carrying FFT round-off.
inline Field ball_sum(const Field& a, double r)
{
    const Grid& g = a.grid;
    if (r < 0.5 * g.length()) {
        const auto& offs = ball_offsets(g, r);
        if (offs.size() <= direct_ball_limit) {
            Field out(g, 0);
            const int N = g.points();
            const int n = g.dim();
            for (std::size_t x = 0; x < g.size(); ++x) {
                const auto c = g.multi_index(x);
                double s = 0.0;
                for (const auto& o : offs) {
                    std::array<int, 3> idx{0, 0, 0};
                    for (int d = 0; d < n; ++d) idx[d] = (c[d] + o[d]) % N;
                    s += a.values[g.flat_index(idx)];
                }
                out.at(x) = s;
            }
            return out;
        }
    }
    const SpectralField& ball = ball_spectrum(g, r);
    SpectralField s = to_spectral(a);
    for (std::size_t m = 0; m < s.coeffs.size(); ++m) s.coeffs[m] *= ball.coeffs[m];
    Field out = to_physical(s);
    for (auto& v : out.values) v = std::max(v, 0.0);
    return out;
}

inline Field modulus_power(const Field& f, double p)
{
    Field out(f.grid, 0);
    for (std::size_t q = 0; q < f.points(); ++q) {
        double m = f.modulus(q);
        out.at(q) = p == 2.0 ? m * m : std::pow(m, p);
    }
    return out;
}

/// Cyclic running max with half-width w along the last axis.
inline std::vector<double> row_max_filter(const Grid& g, const std::vector<double>& a, int w)
{
    const int N = g.points();
    std::vector<double> out(a.size());
    const std::size_t rows = a.size() / N;
    if (2 * w + 1 >= N) {
        for (std::size_t r = 0; r < rows; ++r) {
            double m = *std::max_element(a.begin() + r * N, a.begin() + (r + 1) * N);
            std::fill(out.begin() + r * N, out.begin() + (r + 1) * N, m);
        }
        return out;
    }
    // van Herk / Gil-Werman on the wrapped row of length N + 2w
    const int K = 2 * w + 1;
    const int len = N + 2 * w;
    std::vector<double> ext(len), pre(len), suf(len);
    for (std::size_t r = 0; r < rows; ++r) {
        const double* row = a.data() + r * N;
        for (int i = 0; i < len; ++i) ext[i] = row[((i - w) % N + N) % N];
        for (int i = 0; i < len; ++i) pre[i] = (i % K == 0) ? ext[i] : std::max(pre[i - 1], ext[i]);
        for (int i = len - 1; i >= 0; --i) {
            suf[i] = (i == len - 1 || (i + 1) % K == 0) ? ext[i] : std::max(suf[i + 1], ext[i]);
        }
        for (int x = 0; x < N; ++x) out[r * N + x] = std::max(suf[x], pre[x + K - 1]);
    }
    return out;
}

/// max over y in B(x, r) of a(y), a scalar lattice function.
inline std::vector<double> ball_max(const Grid& g, const std::vector<double>& a, double r)
{
    if (r >= 0.5 * g.length()) {
        return std::vector<double>(a.size(), *std::max_element(a.begin(), a.end()));
    }
    const int n = g.dim();
    const int N = g.points();
    const double h = g.spacing();
    const int reach = std::min(N / 2, static_cast<int>(std::ceil(r / h)));
    std::vector<double> out(a.size(), 0.0);
    std::map<int, std::vector<double>> filtered;
    // leading offsets (all axes but the last); the last axis is handled by row filters
    std::vector<std::array<int, 2>> leads;
    for (int d0 = -reach; d0 <= reach; ++d0) {
        if (n == 2) {
            leads.push_back({d0, 0});
        } else {
            for (int d1 = -reach; d1 <= reach; ++d1) leads.push_back({d0, d1});
        }
    }
    for (const auto& d : leads) {
        double lead2 = 0.0;
        for (int a_ = 0; a_ < n - 1; ++a_) lead2 += double(d[a_]) * d[a_] * h * h;
        if (!(lead2 < r * r)) continue;
        int w = 0;
        while (w + 1 <= N / 2 && lead2 + double(w + 1) * (w + 1) * h * h < r * r) ++w;
        auto it = filtered.find(w);
        if (it == filtered.end()) it = filtered.emplace(w, row_max_filter(g, a, w)).first;
        const auto& fw = it->second;
        const std::size_t rows = a.size() / N;
        for (std::size_t row = 0; row < rows; ++row) {
            std::array<int, 3> idx = g.multi_index(row * N);
            for (int a_ = 0; a_ < n - 1; ++a_) idx[a_] += d[a_];
            std::size_t src = g.flat_index(idx);
            for (int x = 0; x < N; ++x) out[row * N + x] = std::max(out[row * N + x], fw[src + x]);
        }
    }
    return out;
}

}  // namespace detail

/// Window profile at node j: x -> t_j^{-n/2} h^n sum_{k<j} dt_k sum_{y in B(x, sqrt t_j)} |F_k(y)|^p.
inline Field window_profile(const SpaceTimeField& f, double p, std::size_t j)
{
    const Grid& g = f.grid();
    Field acc(g, 0);
    for (std::size_t k = 0; k < j; ++k) {
        Field mp = detail::modulus_power(f[k], p);
        const double w = f.time.slab_length(k);
        for (std::size_t q = 0; q < g.size(); ++q) acc.at(q) += w * mp.at(q);
    }
    const double t = f.time.node(j);
    Field out = detail::ball_sum(acc, std::sqrt(t));
    out *= std::pow(t, -0.5 * g.dim()) * g.cell_volume();
    return out;
}

namespace detail {

inline double tinf_value(const SpaceTimeField& f, double p, std::size_t last_window)
{
    if (p != 1.0 && p != 2.0) throw ConfigurationError("norm_Tinf: p must be 1 or 2");
    const Grid& g = f.grid();
    std::vector<double> best(last_window + 1, 0.0);
    // cumulative slab sums, then one ball convolution per window scale
    std::vector<Field> cumulative(last_window + 1, Field(g, 0));
    for (std::size_t j = 1; j <= last_window; ++j) {
        cumulative[j] = cumulative[j - 1];
        Field mp = modulus_power(f[j - 1], p);
        const double w = f.time.slab_length(j - 1);
        for (std::size_t q = 0; q < g.size(); ++q) cumulative[j].at(q) += w * mp.at(q);
    }
    parallel_for(last_window, [&](std::size_t i) {
        const std::size_t j = i + 1;
        const double t = f.time.node(j);
        Field s = ball_sum(cumulative[j], std::sqrt(t));
        double m = *std::max_element(s.values.begin(), s.values.end());
        best[j] = m * std::pow(t, -0.5 * g.dim()) * g.cell_volume();
    });
    double v = *std::max_element(best.begin(), best.end());
    return p == 2.0 ? std::sqrt(v) : v;
}

inline void require_time(const SpaceTimeField& f, const char* what)
{
    if (f.size() < 2) throw ConfigurationError(std::string(what) + ": empty time grid");
}

}  // namespace detail

/// sup over windows (x, t_j) of (t_j^{-n/2} int_0^{t_j} int_{B(x, sqrt t_j)} |F|^p)^{1/p}.
inline NormReport norm_Tinf(const SpaceTimeField& f, int p)
{
    detail::require_time(f, "norm_Tinf");
    return detail::make_report(p == 1 ? "T_inf_1" : "T_inf_2", f,
                               detail::tinf_value(f, p, f.size() - 1));
}

/// sum_x h^n (sum_{k<J} dt_k t_k^{-n/2} sum_{y in B(x, sqrt t_k)} |F_k(y)|^2 h^n)^{1/2}.
inline NormReport norm_T12(const SpaceTimeField& f)
{
    detail::require_time(f, "norm_T12");
    const Grid& g = f.grid();
    const std::size_t slabs = f.time.slab_count();
    std::vector<Field> parts(slabs);
    parallel_for(slabs, [&](std::size_t k) {
        const double t = f.time.node(k);
        parts[k] = detail::ball_sum(detail::modulus_power(f[k], 2.0), std::sqrt(t));
        parts[k] *= f.time.slab_length(k) * std::pow(t, -0.5 * g.dim()) * g.cell_volume();
    });
    double total = 0.0;
    for (std::size_t q = 0; q < g.size(); ++q) {
        double s = 0.0;
        for (std::size_t k = 0; k < slabs; ++k) s += parts[k].at(q);
        total += std::sqrt(s);
    }
    return detail::make_report("T_1_2", f, total * g.cell_volume());
}

/// N(F)(x) = max over nodes j and y with x in B(y, sqrt t_j) of |F_j(y)|.
inline Field nontangential_max(const SpaceTimeField& f)
{
    detail::require_time(f, "nontangential_max");
    const Grid& g = f.grid();
    std::vector<std::vector<double>> per_node(f.size());
    parallel_for(f.size(), [&](std::size_t j) {
        std::vector<double> m(g.size());
        for (std::size_t q = 0; q < g.size(); ++q) m[q] = f[j].modulus(q);
        per_node[j] = detail::ball_max(g, m, std::sqrt(f.time.node(j)));
    });
    Field out(g, 0);
    for (const auto& m : per_node) {
        for (std::size_t q = 0; q < g.size(); ++q) out.at(q) = std::max(out.at(q), m[q]);
    }
    return out;
}

/// L^1 norm of the nontangential maximal function. The limit condition of the
/// continuous space is not checked.
inline NormReport norm_T1inf(const SpaceTimeField& f)
{
    Field nm = nontangential_max(f);
    double s = 0.0;
    for (double v : nm.values) s += v;
    return detail::make_report("T_1_inf", f, s * f.grid().cell_volume());
}

/// sup_{t_j <= T} t_j^{1/2} |u_j|_inf plus the T^{inf,2} norm over windows t_j <= T.
inline NormReport norm_ET(const SpaceTimeField& u, double T)
{
    detail::require_time(u, "norm_ET");
    if (u.rank() != 1) throw ConfigurationError("norm_ET expects a rank-1 field");
    if (T > u.time.t_max() * (1.0 + 1e-12)) throw PreconditionError("norm_ET: T exceeds t_max");
    const std::size_t last = u.time.last_index_at_or_below(T);
    double sup_part = 0.0;
    for (std::size_t j = 0; j <= last; ++j) sup_part = std::max(sup_part, std::sqrt(u.time.node(j)) * sup_norm(u[j]));
    double carleson = last >= 1 ? detail::tinf_value(u, 2.0, last) : 0.0;
    NormReport r = detail::make_report("E_T", u, sup_part + carleson);
    r.parts["sup"] = sup_part;
    r.parts["carleson"] = carleson;
    r.parts["T"] = u.time.node(last);
    return r;
}

/// G on sigma_j = sqrt(t_j): G_j = tau_j^{1/2} F_j with tau_j the slab midpoint, or
/// G_j = F_j for the T^{1,inf} variant. For p = 2, norm_Tinf(F) is sqrt(2) times the
/// elliptic window norm of G measured with d sigma / sigma, up to O((rho - 1)^2).
inline SpaceTimeField rescale_elliptic(const SpaceTimeField& f, bool t1inf_variant = false)
{
    detail::require_time(f, "rescale_elliptic");
    std::vector<double> sigma(f.size());
    for (std::size_t j = 0; j < f.size(); ++j) sigma[j] = std::sqrt(f.time.node(j));
    SpaceTimeField g;
    g.time = TimeGrid::from_nodes(sigma);
    g.slices = f.slices;
    if (!t1inf_variant) {
        for (std::size_t j = 0; j < f.size(); ++j) g[j] *= std::sqrt(f.time.representative(j));
    }
    return g;
}

}  // namespace ktns
