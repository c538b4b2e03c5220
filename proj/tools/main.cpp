#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "ktns/experiments.hpp"
#include "ktns/parallel.hpp"

namespace fs = std::filesystem;
using ktns::json;

namespace {

constexpr int exit_assertion = 1;
constexpr int exit_config = 2;

struct Overrides {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
    std::optional<int> grid;
    std::optional<int> dim;
};

int config_error(const std::string& field, const std::string& message, const std::string& out_dir)
{
    json e = {{"error", "invalid_config"}, {"field", field}, {"message", message}};
    std::cerr << e.dump() << '\n';
    if (!out_dir.empty()) {
        std::error_code ec;
        fs::create_directories(out_dir, ec);
        if (!ec) ktns::write_json((fs::path(out_dir) / "error.json").string(), e);
    }
    return exit_config;
}

json load_config(const Overrides& o, const std::string& sub)
{
    json j = json::object();
    if (!o.config.empty()) {
        std::ifstream in(o.config);
        if (!in) throw ktns::ConfigFieldError("config", "cannot open config file '" + o.config + "'");
        try {
            j = json::parse(in);
        } catch (const json::parse_error& e) {
            throw ktns::ConfigFieldError("config", std::string("config is not valid JSON: ") + e.what());
        }
        if (!j.is_object()) throw ktns::ConfigFieldError("config", "config must be a JSON object");
    }
    if (j.contains("experiment") && j["experiment"].is_string() && j["experiment"] != sub) {
        throw ktns::ConfigFieldError("experiment", "config is for '" + j["experiment"].get<std::string>() +
                                                       "', not '" + sub + "'");
    }
    j["experiment"] = sub;
    if (o.seed) j["seed"] = *o.seed;
    if (o.threads) j["threads"] = *o.threads;
    if (o.grid) j["grid"]["N"] = *o.grid;
    if (o.dim) j["grid"]["n"] = *o.dim;
    if (!o.out.empty()) j["output"] = o.out;
    return j;
}

std::string utc_now()
{
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

int run(const std::string& sub, const Overrides& o)
{
    ktns::RunConfig cfg;
    try {
        cfg = ktns::parse_config(load_config(o, sub));
        cfg.require_seed();
    } catch (const ktns::ConfigFieldError& e) {
        return config_error(e.field(), e.what(), o.out);
    }
    ktns::set_thread_count(cfg.threads);
    const fs::path dir = fs::path(cfg.output) / sub;
    fs::create_directories(dir);

    const std::string started = utc_now();
    const auto t0 = std::chrono::steady_clock::now();
    ktns::ExperimentResult res;
    try {
        res = ktns::run_experiment(sub, cfg);
    } catch (const ktns::ConfigFieldError& e) {
        return config_error(e.field(), e.what(), dir.string());
    }
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    json report = res.report(cfg);
    report["subcommand"] = sub;
    json tables = json::array();
    for (const auto& [name, rows] : res.tables) {
        ktns::write_csv((dir / (name + ".csv")).string(), rows);
        tables.push_back(name + ".csv");
    }
    report["tables"] = tables;
    ktns::write_json((dir / "report.json").string(), report);
    ktns::write_json((dir / "timing.json").string(),
                     {{"started_utc", started}, {"wall_seconds", wall}, {"sections", res.timing}});

    int failed = 0;
    for (const auto& a : res.checks.items()) {
        if (!a["passed"].get<bool>()) {
            ++failed;
            std::cerr << "FAIL " << a["name"].get<std::string>() << " value=" << a["value"].dump()
                      << " limits=" << a["limits"].dump() << '\n';
        }
    }
    std::cout << sub << ": " << (failed == 0 ? "PASS" : "FAIL") << " (" << res.checks.items().size() - failed << "/"
              << res.checks.items().size() << " assertions) -> " << (dir / "report.json").string() << '\n';
    return failed == 0 ? 0 : exit_assertion;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Pseudo-spectral checks of the tent-space well-posedness argument"};
    app.require_subcommand(1);
    Overrides o;
    app.add_option("--config", o.config, "JSON configuration file");
    app.add_option("--out", o.out, "output directory");
    app.add_option("--seed", o.seed, "master RNG seed");
    app.add_option("--threads", o.threads, "worker threads");
    app.add_option("--grid", o.grid, "points per axis");
    app.add_option("--dim", o.dim, "spatial dimension (2 or 3)");

    const std::map<std::string, std::string> help = {
        {"norms", "tent norms against brute-force scans and Hoelder inequalities"},
        {"decompose", "three-term decomposition and its identities"},
        {"bounds", "operator probing, kernel decay and Schur constants"},
        {"hardy", "atoms, square function and the adjoint pairing"},
        {"solve", "Picard iteration for the mild formulation"},
        {"counterexample", "divergence of the Q(eps) quotient"}};
    for (const auto& name : ktns::subcommands()) {
        auto* s = app.add_subcommand(name, help.at(name));
        s->fallthrough();
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        return config_error("arguments", e.what(), "");
    }
    for (auto* s : app.get_subcommands()) {
        try {
            return run(s->get_name(), o);
        } catch (const ktns::PreconditionError& e) {
            return config_error("input", e.what(), o.out);
        }
    }
    return exit_config;
}
