#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "ktns/bilinear.hpp"
#include "ktns/hardy.hpp"
#include "ktns/report.hpp"
#include "ktns/rng.hpp"
#include "ktns/tent_norms.hpp"

namespace ktns {

enum class ProbeFamily { Smooth, BandLimited, Window };

inline std::string to_string(ProbeFamily f)
{
    switch (f) {
    case ProbeFamily::Smooth: return "smooth";
    case ProbeFamily::BandLimited: return "band_limited";
    case ProbeFamily::Window: return "window";
    }
    return "unknown";
}

/// Resolution-independent description of a random space-time input, so the
/// same input can be sampled on several grids for refinement studies.
///
/// F(t, x) = T(t) S(x) with T(t) = exp(-ln(t/t0)^2 / (2 w_t^2)) and S either a
/// random trigonometric sum or a periodized Gaussian bump.
struct ProbeSpec {
    ProbeFamily family = ProbeFamily::Smooth;
    int rank = 1;
    int dim = 2;
    double t0 = 0.1;
    double log_width = 0.5;
    struct Term {
        std::array<int, 3> k{0, 0, 0};
        std::vector<double> cos_amp, sin_amp;  // per component
    };
    std::vector<Term> terms;
    std::array<double, 3> center{0.0, 0.0, 0.0};
    double width = 1.0;
    std::vector<double> amp;  // window family, per component
};

inline ProbeSpec random_probe(ProbeFamily family, int dim, int rank, double length, Rng& rng)
{
    ProbeSpec p;
    p.family = family;
    p.rank = rank;
    p.dim = dim;
    p.t0 = 0.05 * std::pow(10.0, rng.uniform());
    p.log_width = rng.uniform(0.4, 1.0);
    const int nc = component_count(dim, rank);
    if (family == ProbeFamily::Window) {
        for (int d = 0; d < dim; ++d) p.center[d] = rng.uniform(0.0, length);
        p.width = rng.uniform(0.5, 1.0);
        p.amp.resize(nc);
        for (auto& a : p.amp) a = rng.normal();
        return p;
    }
    const int lo = family == ProbeFamily::Smooth ? 0 : 4;
    const int hi = family == ProbeFamily::Smooth ? 3 : 8;
    const int count = family == ProbeFamily::Smooth ? 6 : 4;
    for (int i = 0; i < count; ++i) {
        ProbeSpec::Term term;
        int inf = 0;
        do {
            inf = 0;
            for (int d = 0; d < dim; ++d) {
                term.k[d] = rng.integer(-hi, hi);
                inf = std::max(inf, std::abs(term.k[d]));
            }
        } while (inf < std::max(lo, 1));
        term.cos_amp.resize(nc);
        term.sin_amp.resize(nc);
        for (int c = 0; c < nc; ++c) {
            term.cos_amp[c] = rng.normal();
            term.sin_amp[c] = rng.normal();
        }
        p.terms.push_back(term);
    }
    return p;
}

inline Field sample_space(const ProbeSpec& p, const Grid& g)
{
    if (g.dim() != p.dim) throw ConfigurationError("probe dimension does not match the grid");
    Field f(g, p.rank);
    const int nc = f.components();
    const double unit = g.wave_unit();
    for (std::size_t q = 0; q < g.size(); ++q) {
        auto x = g.position(q);
        if (p.family == ProbeFamily::Window) {
            double bump = 0.0;
            const int images = p.dim == 2 ? 9 : 27;
            for (int im = 0; im < images; ++im) {
                int r = im;
                double d2 = 0.0;
                for (int d = 0; d < p.dim; ++d) {
                    int shift = r % 3 - 1;
                    r /= 3;
                    double off = std::remainder(x[d] - p.center[d], g.length()) + shift * g.length();
                    d2 += off * off;
                }
                bump += std::exp(-0.5 * d2 / (p.width * p.width));
            }
            for (int c = 0; c < nc; ++c) f.at(q, c) = p.amp[c] * bump;
            continue;
        }
        for (const auto& term : p.terms) {
            double phase = 0.0;
            for (int d = 0; d < p.dim; ++d) phase += unit * term.k[d] * x[d];
            const double cs = std::cos(phase), sn = std::sin(phase);
            for (int c = 0; c < nc; ++c) f.at(q, c) += term.cos_amp[c] * cs + term.sin_amp[c] * sn;
        }
    }
    return f;
}

/// Samples the probe on (grid, time): slab k takes the value at its representative time.
inline SpaceTimeField sample(const ProbeSpec& p, const Grid& g, const TimeGrid& time)
{
    Field space = sample_space(p, g);
    SpaceTimeField f;
    f.time = time;
    f.slices.resize(time.size());
    for (std::size_t k = 0; k < time.size(); ++k) {
        const double l = std::log(time.representative(k) / p.t0) / p.log_width;
        f[k] = std::exp(-0.5 * l * l) * space;
    }
    return f;
}

/// Seeded family cycling through the three probe families.
inline std::vector<ProbeSpec> probe_family(int count, int dim, int rank, double length, std::uint64_t seed)
{
    Rng rng(seed);
    std::vector<ProbeSpec> out;
    const ProbeFamily order[3] = {ProbeFamily::Smooth, ProbeFamily::BandLimited, ProbeFamily::Window};
    for (int i = 0; i < count; ++i) out.push_back(random_probe(order[i % 3], dim, rank, length, rng));
    return out;
}

enum class NormId { L2, Tinf1, Tinf2, Tinf2Half, ET };

inline double evaluate_norm(NormId id, const SpaceTimeField& f)
{
    switch (id) {
    case NormId::L2: return l2_norm(f);
    case NormId::Tinf1: return norm_Tinf(f, 1).value;
    case NormId::Tinf2: return norm_Tinf(f, 2).value;
    case NormId::Tinf2Half: return norm_Tinf(weight_by_time_power(f, 0.5), 2).value;
    case NormId::ET: return norm_ET(f, f.time.t_last()).value;
    }
    return 0.0;
}

/// A probed quantity: the ratio measured on one sampled input (or pair of inputs).
struct ProbeTarget {
    std::string name;
    int rank = 1;         // rank of the probe fields
    int second_rank = 1;  // rank of the second probe when pair is set
    bool pair = false;    // uses two independent probes (u, v)
    bool project = false; // Leray-project rank-1 probes first
    std::function<double(const SpaceTimeField&, const SpaceTimeField&)> ratio;
};

/// Ratio codomain(op x) / domain(x) for a linear operator; zero-norm inputs give 0.
inline ProbeTarget linear_target(const std::string& name, int rank,
                                 std::function<SpaceTimeField(const SpaceTimeField&)> op, NormId domain,
                                 NormId codomain)
{
    ProbeTarget t;
    t.name = name;
    t.rank = rank;
    t.ratio = [op, domain, codomain](const SpaceTimeField& x, const SpaceTimeField&) {
        const double d = evaluate_norm(domain, x);
        if (d == 0.0) return 0.0;
        return evaluate_norm(codomain, op(x)) / d;
    };
    return t;
}

/// Targets by id: identity, zero, mplus_l2, mplus_tinf2, tcal, r_l2, r_tinf2, a2, linear_est1,
/// linear_est2, bilinear, a2_dual.
inline ProbeTarget probe_target(const std::string& id)
{
    auto identity = [](const SpaceTimeField& f) { return f; };
    if (id == "identity") return linear_target(id, 1, identity, NormId::Tinf2, NormId::Tinf2);
    if (id == "zero") {
        return linear_target(id, 1, [](const SpaceTimeField& f) { return 0.0 * f; }, NormId::Tinf2, NormId::Tinf2);
    }
    if (id == "mplus_l2") return linear_target(id, 1, apply_Mplus, NormId::L2, NormId::L2);
    if (id == "mplus_tinf2") return linear_target(id, 1, apply_Mplus, NormId::Tinf2, NormId::Tinf2);
    if (id == "tcal") return linear_target(id, 2, apply_Tcal, NormId::Tinf2, NormId::Tinf2);
    if (id == "r_l2") return linear_target(id, 2, apply_R, NormId::L2, NormId::L2);
    if (id == "r_tinf2") return linear_target(id, 2, apply_R, NormId::Tinf2, NormId::Tinf2);
    if (id == "a2") return linear_target(id, 2, apply_A2, NormId::Tinf1, NormId::Tinf2);
    if (id == "linear_est1" || id == "linear_est2") {
        ProbeTarget t;
        t.name = id;
        t.pair = true;
        t.project = true;
        const bool first = id == "linear_est1";
        t.ratio = [first](const SpaceTimeField& u, const SpaceTimeField& v) {
            auto r = linear_est_check(tensor_product(u, v));
            return first ? r.first.constant : r.second.constant;
        };
        return t;
    }
    if (id == "bilinear") {
        ProbeTarget t;
        t.name = id;
        t.pair = true;
        t.project = true;
        t.ratio = [](const SpaceTimeField& u, const SpaceTimeField& v) {
            const double d = evaluate_norm(NormId::ET, u) * evaluate_norm(NormId::ET, v);
            if (d == 0.0) return 0.0;
            return evaluate_norm(NormId::ET, bilinear_B(u, v)) / d;
        };
        return t;
    }
    if (id == "a2_dual") {
        // |<A2 F, G>| / (|F|_{T^{inf,1}} |G|_{T^{1,2}}), the pairing taken through the adjoint
        ProbeTarget t;
        t.name = id;
        t.rank = 2;
        t.second_rank = 1;
        t.pair = true;
        t.ratio = [](const SpaceTimeField& f, const SpaceTimeField& g) {
            const double d = evaluate_norm(NormId::Tinf1, f) * norm_T12(g).value;
            if (d == 0.0) return 0.0;
            return std::abs(orbit_pairing(-1.0 * s_operator(g), f)) / d;
        };
        return t;
    }
    throw ConfigurationError("unknown operator id '" + id + "'");
}

inline SpaceTimeField sample_for(const ProbeTarget& target, const ProbeSpec& p, const Grid& g, const TimeGrid& time)
{
    SpaceTimeField f = sample(p, g, time);
    if (target.project && f.rank() == 1) {
        for (auto& s : f.slices) s = leray(s);
    }
    return f;
}

/// Max ratio over the probes on one discretization.
inline double probe_max(const ProbeTarget& target, const std::vector<ProbeSpec>& first,
                        const std::vector<ProbeSpec>& second, const Grid& g, const TimeGrid& time,
                        std::vector<double>* each = nullptr)
{
    double best = 0.0;
    for (std::size_t i = 0; i < first.size(); ++i) {
        SpaceTimeField x = sample_for(target, first[i], g, time);
        SpaceTimeField y = target.pair ? sample_for(target, second[i], g, time) : x;
        double r = target.ratio(x, y);
        if (each) each->push_back(r);
        best = std::max(best, r);
    }
    return best;
}

struct ProbeStudyConfig {
    int dim = 2;
    double length = 2.0 * pi;
    int coarse_points = 32;
    int fine_points = 64;
    double t_min = 1e-4;
    double t_max = 1.0;
    int per_decade = 15;
    int trials = 21;
    std::uint64_t seed = 1;
};

/// Max ratio of a target on the base discretization (fine N, per_decade) plus the
/// two refinement studies: N coarse -> fine and time-node doubling. Stable means
/// both relative changes are below 20%.
inline BoundReport operator_norm_estimate(const std::string& id, const ProbeStudyConfig& cfg)
{
    ProbeTarget target = probe_target(id);
    auto first = probe_family(cfg.trials, cfg.dim, target.rank, cfg.length, Rng::sub_seed(cfg.seed, 0));
    auto second = probe_family(cfg.trials, cfg.dim, target.second_rank, cfg.length, Rng::sub_seed(cfg.seed, 1));
    const TimeGrid base_time = TimeGrid::per_decade(cfg.t_min, cfg.t_max, cfg.per_decade);
    const TimeGrid fine_time = TimeGrid::per_decade(cfg.t_min, cfg.t_max, 2 * cfg.per_decade);
    const Grid coarse(cfg.dim, cfg.coarse_points, cfg.length);
    const Grid fine(cfg.dim, cfg.fine_points, cfg.length);

    std::vector<double> each;
    const double c_coarse = probe_max(target, first, second, coarse, base_time);
    const double c_base = probe_max(target, first, second, fine, base_time, &each);
    const double c_time = probe_max(target, first, second, fine, fine_time);

    BoundReport r;
    r.name = "probe_" + id;
    r.constant = c_base;
    r.values["coarse_grid"] = c_coarse;
    r.values["base"] = c_base;
    r.values["doubled_time_nodes"] = c_time;
    r.values["change_space"] = relative_change(c_coarse, c_base);
    r.values["change_time"] = relative_change(c_time, c_base);
    r.values["trials"] = cfg.trials;
    for (std::size_t i = 0; i < each.size(); ++i) {
        r.samples.push_back({{"trial", i}, {"family", to_string(first[i].family)}, {"ratio", each[i]}});
    }
    r.stable = r.values["change_space"] < 0.2 && r.values["change_time"] < 0.2;
    r.passed = r.stable && std::isfinite(c_base);
    return r;
}

}  // namespace ktns
