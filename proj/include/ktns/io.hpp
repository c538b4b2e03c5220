#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>

#include "ktns/field.hpp"
#include "ktns/report.hpp"

namespace ktns {

// Snapshot format: <name>.bin holds raw little-endian float64 values, point-major
// with the component index fastest; <name>.json is the sidecar {n, N, L, rank, time}.

namespace detail {

inline std::uint64_t to_little(std::uint64_t v)
{
    if constexpr (std::endian::native == std::endian::little) return v;
    std::uint64_t r = 0;
    for (int i = 0; i < 8; ++i) r |= ((v >> (8 * i)) & 0xffu) << (8 * (7 - i));
    return r;
}

}  // namespace detail

inline void write_snapshot(const std::filesystem::path& stem, const Field& f, std::optional<double> time = {})
{
    std::ofstream bin(stem.string() + ".bin", std::ios::binary);
    if (!bin) throw ConfigurationError("cannot write " + stem.string() + ".bin");
    for (double v : f.values) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, 8);
        bits = detail::to_little(bits);
        bin.write(reinterpret_cast<const char*>(&bits), 8);
    }
    json side = {{"n", f.grid.dim()}, {"N", f.grid.points()}, {"L", f.grid.length()}, {"rank", f.rank}};
    if (time) side["time"] = *time;
    write_json(stem.string() + ".json", side);
}

inline Field read_snapshot(const std::filesystem::path& stem)
{
    std::ifstream js(stem.string() + ".json");
    if (!js) throw ConfigurationError("cannot read " + stem.string() + ".json");
    json side = json::parse(js);
    Grid g(side.at("n").get<int>(), side.at("N").get<int>(), side.at("L").get<double>());
    Field f(g, side.at("rank").get<int>());
    std::ifstream bin(stem.string() + ".bin", std::ios::binary);
    if (!bin) throw ConfigurationError("cannot read " + stem.string() + ".bin");
    for (auto& v : f.values) {
        std::uint64_t bits = 0;
        if (!bin.read(reinterpret_cast<char*>(&bits), 8)) throw ConfigurationError("snapshot is shorter than its grid");
        bits = detail::to_little(bits);
        std::memcpy(&v, &bits, 8);
    }
    if (bin.peek() != std::char_traits<char>::eof()) throw ConfigurationError("snapshot is longer than its grid");
    return f;
}

/// Directory of slice snapshots plus manifest.json listing the nodes.
inline void write_space_time(const std::filesystem::path& dir, const SpaceTimeField& f)
{
    std::filesystem::create_directories(dir);
    json nodes = json::array();
    for (std::size_t j = 0; j < f.size(); ++j) {
        std::string name = "slice_" + std::to_string(j);
        write_snapshot(dir / name, f[j], f.time.node(j));
        nodes.push_back({{"index", j}, {"time", f.time.node(j)}, {"file", name}});
    }
    write_json((dir / "manifest.json").string(), {{"nodes", nodes}, {"rank", f.rank()}});
}

inline SpaceTimeField read_space_time(const std::filesystem::path& dir)
{
    std::ifstream in(dir / "manifest.json");
    if (!in) throw ConfigurationError("missing manifest in " + dir.string());
    json man = json::parse(in);
    std::vector<double> times;
    SpaceTimeField f;
    for (const auto& node : man.at("nodes")) {
        times.push_back(node.at("time").get<double>());
        f.slices.push_back(read_snapshot(dir / node.at("file").get<std::string>()));
    }
    f.time = TimeGrid::from_nodes(times);
    for (const auto& s : f.slices) f.slices.front().check_same(s);
    return f;
}

}  // namespace ktns
