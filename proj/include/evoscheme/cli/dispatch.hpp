#pragma once

#include <cerrno>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "evoscheme/cli/config.hpp"
#include "evoscheme/cli/output.hpp"
#include "evoscheme/cli/subprocess.hpp"
#include "evoscheme/harness.hpp"
#include "evoscheme/hybrid.hpp"
#include "evoscheme/landscape.hpp"

namespace evoscheme::cli {

enum ExitCode : int { kOk = 0, kConfigError = 1, kRuntimeError = 2 };

inline constexpr const char* kSeedEnv = "EVOSCHEME_SEED";
inline constexpr std::size_t kDefaultRuns = 30;
inline constexpr std::size_t kDefaultDimension = 10;

struct Options {
    std::string command;
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> runs;
    std::string out;
    std::size_t workers = 1;
    std::string fn;
    std::optional<std::size_t> dim;
    std::vector<std::string> slice;
    std::optional<std::size_t> lhs;
    bool scan = false;
};

namespace detail {

inline std::uint64_t env_seed() {
    const char* v = std::getenv(kSeedEnv);
    if (!v || !*v) return 0;
    char* end = nullptr;
    errno = 0;
    const unsigned long long s = std::strtoull(v, &end, 10);
    if (*end != '\0' || errno != 0 || v[0] == '-')
        throw ConfigError(ConfigError::Kind::invariant, std::string(kSeedEnv) + ": expected an unsigned integer");
    return s;
}

inline SliceSettings parse_slice_tokens(const std::vector<std::string>& tokens, std::size_t n) {
    SliceSettings s;
    for (const auto& t : tokens) {
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError(ConfigError::Kind::schema, "--slice: expected key=value, got '" + t + "'");
        const std::string key = t.substr(0, eq);
        std::size_t value;
        try {
            std::size_t used = 0;
            value = std::stoul(t.substr(eq + 1), &used);
            if (used != t.size() - eq - 1) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            throw ConfigError(ConfigError::Kind::schema, "--slice: '" + t + "' needs a non-negative integer value");
        }
        if (key == "i") s.i = value;
        else if (key == "j") s.j = value;
        else if (key == "r") s.resolution = value;
        else throw ConfigError(ConfigError::Kind::schema, "--slice: unknown key '" + key + "' (use i, j, r)");
    }
    if (s.i >= n || s.j >= n) throw ConfigError(ConfigError::Kind::invariant, "--slice: dimension index out of range");
    if (s.i == s.j) throw ConfigError(ConfigError::Kind::invariant, "--slice: i and j must differ");
    if (s.resolution < 2) throw ConfigError(ConfigError::Kind::invariant, "--slice: r must be at least 2");
    return s;
}

/// Configuration file (if any) with command-line overrides applied.
inline RunConfig resolve(const Options& o) {
    const std::uint64_t fallback = env_seed();
    json doc;
    if (!o.config.empty()) {
        std::ifstream in(o.config);
        if (!in) throw ConfigError(ConfigError::Kind::io, "cannot read config file '" + o.config + "'");
        std::stringstream ss;
        ss << in.rdbuf();
        doc = parse_json_text(ss.str());
        if (!doc.is_object()) throw ConfigError(ConfigError::Kind::schema, "config: expected an object");
    } else {
        if (o.fn.empty()) throw ConfigError(ConfigError::Kind::schema, "either --config or --fn is required");
        doc = {{"schema_version", kSchemaVersion}};
    }
    if (!o.fn.empty()) doc["problem"] = o.fn;
    if (o.dim) doc["n"] = *o.dim;
    else if (!doc.contains("n") && o.config.empty()) doc["n"] = kDefaultDimension;

    RunConfig c = parse_config(doc, fallback);
    if (o.seed) c.seed = *o.seed;
    if (!o.out.empty()) c.output.directory = o.out;
    if (!o.slice.empty()) c.landscape.slice = parse_slice_tokens(o.slice, c.n);
    if (o.lhs) c.landscape.lhs_samples = *o.lhs;
    if (o.scan) c.landscape.scan = true;
    c.ga.workers = std::max<std::size_t>(1, o.workers);
    return c;
}

struct Problem {
    BenchmarkFunction fn;
    std::shared_ptr<SubprocessObjective> process;
};

inline Problem open_problem(const RunConfig& c) {
    if (c.problem.command.empty()) return {make_problem(c), nullptr};
    auto process = std::make_shared<SubprocessObjective>(c.problem.command);
    return {make_problem(c, SubprocessObjective::function(process)), process};
}

inline void run_command(const Options& o, RunConfig c, std::ostream& out) {
    namespace fs = std::filesystem;
    if (o.command == "hybrid" && !c.hybrid) c.hybrid = HybridConfig{};
    const fs::path dir = c.output.directory;
    fs::create_directories(dir);
    write_json(dir / "resolved_config.json", to_json(c));

    Problem problem = open_problem(c);
    const SearchSpace space = c.space();

    if (o.command == "run" || o.command == "hybrid") {
        const bool hybrid = o.command == "hybrid";
        const SolverConfig solver = c.solver(hybrid);
        Objective obj = problem.fn.objective();
        const RunTrace trace = solve(obj, space, solver);
        if (c.output.csv) write_text(dir / "trace.csv", trace_csv(trace));
        if (c.output.json) write_json(dir / "best.json", best_json(trace));
        out << o.command << ": best fitness " << format_decimal17(*trace.best.fitness) << " after "
            << trace.generations() << " generations, " << trace.evaluations << " evaluations\n";
        return;
    }

    if (o.command == "landscape") {
        const auto& l = c.landscape;
        RngStream rng(c.seed);
        RngStream lhs_rng = rng.split();
        RngStream probe_rng = rng.split();
        Objective obj = problem.fn.objective();
        if (l.lhs_samples > 0 && c.output.csv) {
            const auto design = lhs_sample(space, l.lhs_samples, lhs_rng);
            write_text(dir / "lhs.csv", lhs_csv(design, evaluate_points(obj, design.points, c.ga.workers)));
        }
        if (l.slice) {
            Point base = l.slice->base.value_or(Point{});
            if (base.empty())
                for (const auto& b : space.bounds()) base.push_back(b.lower + 0.5 * b.width());
            const auto grid = slice_grid(obj, space, base, l.slice->i, l.slice->j, l.slice->resolution, c.ga.workers);
            if (c.output.csv) write_text(dir / "slice.csv", slice_csv(grid));
        }
        const auto rep = separability_probe(obj, space, l.separability_trials, l.separability_tolerance, probe_rng);
        if (c.output.json) write_json(dir / "separability.json", separability_json(rep));
        out << "landscape: " << (rep.separable ? "additively separable" : "not additively separable")
            << " at tolerance " << rep.tolerance << "\n";
        if (l.scan) {
            GaConfig ga = c.ga;
            ga.seed = c.seed;
            const auto ranked = ga_scan(obj, space, ga, l.dedup_radius);
            if (c.output.json) write_json(dir / "scan.json", scan_json(ranked));
            out << "landscape: scan kept " << ranked.size() << " distinct individuals\n";
        }
        return;
    }

    const std::size_t runs = o.runs.value_or(kDefaultRuns);
    if (runs < 1) throw ConfigError(ConfigError::Kind::invariant, "--runs must be at least 1");
    const SolverConfig solver = c.solver(c.hybrid.has_value());
    const std::size_t workers = c.ga.workers;

    if (o.command == "bench") {
        if (!c.problem.known_optimum)
            throw ConfigError(ConfigError::Kind::invariant, "problem.known_optimum is required for bench");
        const auto rep = run_replicates(problem.fn, solver, runs, c.seed, workers);
        const auto q = score_quality(rep.runs, *c.problem.known_optimum);
        if (c.output.json) write_json(dir / "quality.json", quality_json(q));
        out << "bench: mean quality " << q.mean_quality << " over " << q.runs.size() << " runs ("
            << (q.pass ? "pass" : "fail") << " at " << q.threshold << ")\n";
        return;
    }

    if (o.command == "tune") {
        const auto rep = population_size_study(problem.fn, solver, runs, c.seed, workers);
        if (c.output.json) write_json(dir / "tuning.json", tuning_json(rep));
        out << "tune: recommendation " << to_string(rep.recommendation) << "\n";
        return;
    }
    throw ConfigError(ConfigError::Kind::schema, "unknown command '" + o.command + "'");
}

}  // namespace detail

/// Command-line entry point. Returns 0 on success, 1 for configuration or
/// usage errors and 2 for failures while running.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"GA-centred global optimization toolkit", "evoscheme"};
    app.require_subcommand(1);
    Options o;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--config", o.config, "Run configuration (JSON)");
        sub->add_option("--seed", o.seed, "Seed; overrides the config and " + std::string(kSeedEnv));
        sub->add_option("--out", o.out, "Output directory");
        sub->add_option("--workers", o.workers, "Threads used for evaluation")->check(CLI::PositiveNumber);
        sub->add_option("--fn", o.fn, "Builtin benchmark (sphere, rastrigin, rosenbrock, ackley)");
        sub->add_option("--dim", o.dim, "Problem dimension");
    };
    auto* run = app.add_subcommand("run", "Plain GA run: trace.csv, best.json");
    auto* hybrid = app.add_subcommand("hybrid", "GA with local search: trace.csv, best.json");
    auto* landscape = app.add_subcommand("landscape", "LHS design, slices, separability probe, GA scan");
    auto* bench = app.add_subcommand("bench", "Replicated runs scored against the known optimum: quality.json");
    auto* tune = app.add_subcommand("tune", "Population size study at N/2, N, 2N: tuning.json");
    for (auto* sub : {run, hybrid, landscape, bench, tune}) common(sub);
    for (auto* sub : {bench, tune}) sub->add_option("--runs", o.runs, "Replicate runs");
    landscape->add_option("--slice", o.slice, "Two-variable slice, e.g. --slice i=0 j=1 r=50")->expected(1, 3);
    landscape->add_option("--lhs", o.lhs, "Latin hypercube sample count");
    landscape->add_flag("--scan", o.scan, "Also run the GA scanner");

    std::vector<const char*> argv{"evoscheme"};
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? kOk : kConfigError;
    }
    o.command = app.get_subcommands().front()->get_name();

    RunConfig config;
    try {
        config = detail::resolve(o);
    } catch (const ConfigError& e) {
        err << "evoscheme: " << e.what() << "\n";
        return kConfigError;
    }
    try {
        detail::run_command(o, config, out);
    } catch (const ConfigError& e) {
        err << "evoscheme: " << e.what() << "\n";
        return kConfigError;
    } catch (const std::invalid_argument& e) {
        err << "evoscheme: " << e.what() << "\n";
        return kConfigError;
    } catch (const std::exception& e) {
        err << "evoscheme: " << e.what() << "\n";
        return kRuntimeError;
    }
    return kOk;
}

}  // namespace evoscheme::cli
