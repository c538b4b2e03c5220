#pragma once

#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "ktns/grid.hpp"

namespace ktns {

using json = nlohmann::json;

/// Measured constant of an estimate together with the sweep that produced it.
struct BoundReport {
    std::string name;
    double constant = 0.0;
    double exponent = 0.0;         // decay exponent used by the fit, if any
    double target_exponent = 0.0;
    bool stable = false;
    bool passed = false;
    std::map<std::string, double> values;  // named scalar diagnostics
    json samples = json::array();          // per-sample rows for CSV export

    json to_json() const
    {
        json j;
        j["name"] = name;
        j["constant"] = finite_or_null(constant);
        j["exponent"] = exponent;
        j["target_exponent"] = target_exponent;
        j["stable"] = stable;
        j["passed"] = passed;
        json v = json::object();
        for (const auto& [k, x] : values) v[k] = finite_or_null(x);
        j["values"] = v;
        j["samples"] = samples;
        return j;
    }

    static json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }
};

/// max/min of a set of positive values; infinity if any is non-positive.
inline double spread(const std::vector<double>& v)
{
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (double x : v) {
        lo = std::min(lo, x);
        hi = std::max(hi, x);
    }
    return lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
}

/// |a - b| / max(|a|, |b|), zero when both vanish.
inline double relative_change(double a, double b)
{
    double s = std::max(std::abs(a), std::abs(b));
    return s > 0.0 ? std::abs(a - b) / s : 0.0;
}

/// Writes rows (an array of flat objects with identical keys) as CSV.
inline void write_csv(const std::string& path, const json& rows)
{
    std::ofstream out(path);
    if (!out) throw ConfigurationError("cannot write " + path);
    if (!rows.is_array() || rows.empty()) return;
    std::vector<std::string> keys;
    for (auto it = rows.front().begin(); it != rows.front().end(); ++it) keys.push_back(it.key());
    for (std::size_t i = 0; i < keys.size(); ++i) out << (i ? "," : "") << keys[i];
    out << "\n";
    out.precision(17);
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < keys.size(); ++i) {
            if (i) out << ",";
            const auto& v = row.contains(keys[i]) ? row[keys[i]] : json(nullptr);
            if (v.is_string()) out << v.get<std::string>();
            else if (v.is_number()) out << v.get<double>();
            else if (v.is_boolean()) out << (v.get<bool>() ? "true" : "false");
        }
        out << "\n";
    }
}

inline void write_json(const std::string& path, const json& j)
{
    std::ofstream out(path);
    if (!out) throw ConfigurationError("cannot write " + path);
    out << j.dump(2) << "\n";
}

}  // namespace ktns
