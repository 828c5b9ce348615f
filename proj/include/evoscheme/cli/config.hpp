#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "evoscheme/engine.hpp"
#include "evoscheme/harness.hpp"
#include "evoscheme/hybrid.hpp"

namespace evoscheme::cli {

using nlohmann::json;

inline constexpr int kSchemaVersion = 1;

/// Problems with the run configuration. `kind` tells a malformed document
/// (parse) from an unexpected or mistyped field (schema) from a value that
/// breaks a module invariant.
struct ConfigError : std::runtime_error {
    enum class Kind { io, parse, schema, invariant };
    ConfigError(Kind k, const std::string& what) : std::runtime_error(what), kind(k) {}
    Kind kind;
};

struct ProblemSpec {
    /// Builtin benchmark name, empty for external problems.
    std::string builtin;
    /// External command (argv) speaking the line protocol.
    std::vector<std::string> command;
    std::optional<double> known_optimum;
};

struct SliceSettings {
    std::size_t i = 0;
    std::size_t j = 1;
    std::size_t resolution = 50;
    std::optional<Point> base;
};

struct LandscapeSettings {
    std::size_t lhs_samples = 100;
    std::optional<SliceSettings> slice;
    std::size_t separability_trials = 8;
    std::optional<double> separability_tolerance;
    bool scan = false;
    std::optional<double> dedup_radius;
};

struct OutputSettings {
    std::string directory = "out";
    bool csv = true;
    bool json = true;
};

struct RunConfig {
    ProblemSpec problem;
    std::size_t n = 0;
    std::vector<Interval> bounds;
    std::uint64_t seed = 0;
    GaConfig ga;
    std::optional<HybridConfig> hybrid;
    LandscapeSettings landscape;
    OutputSettings output;

    SearchSpace space() const { return SearchSpace(bounds); }
    SolverConfig solver(bool with_hybrid) const {
        SolverConfig s{ga, with_hybrid ? std::optional<HybridConfig>(hybrid.value_or(HybridConfig{})) : std::nullopt};
        s.ga.seed = seed;
        return s;
    }
};

namespace detail {

/// Strict view over one JSON object: every key must be consumed.
class Section {
public:
    Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(ConfigError::Kind::schema, name() + ": expected an object");
    }

    bool has(const std::string& key) const { return j_.contains(key); }

    const json& raw(const std::string& key) {
        seen_.insert(key);
        return j_.at(key);
    }

    std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    double number(const std::string& key, double def) {
        if (!has(key)) return def;
        const auto& v = raw(key);
        if (!v.is_number()) throw schema(key, "expected a number");
        return v.get<double>();
    }

    std::optional<double> optional_number(const std::string& key, std::optional<double> def) {
        if (!has(key)) return def;
        if (j_.at(key).is_null()) {
            seen_.insert(key);
            return std::nullopt;
        }
        return number(key, 0.0);
    }

    std::uint64_t integer(const std::string& key, std::uint64_t def) {
        if (!has(key)) return def;
        const auto& v = raw(key);
        if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0))
            throw schema(key, "expected a non-negative integer");
        return v.get<std::uint64_t>();
    }

    std::optional<std::uint64_t> optional_integer(const std::string& key, std::optional<std::uint64_t> def) {
        if (!has(key)) return def;
        if (j_.at(key).is_null()) {
            seen_.insert(key);
            return std::nullopt;
        }
        return integer(key, 0);
    }

    bool boolean(const std::string& key, bool def) {
        if (!has(key)) return def;
        const auto& v = raw(key);
        if (!v.is_boolean()) throw schema(key, "expected true or false");
        return v.get<bool>();
    }

    std::string string(const std::string& key, const std::string& def) {
        if (!has(key)) return def;
        const auto& v = raw(key);
        if (!v.is_string()) throw schema(key, "expected a string");
        return v.get<std::string>();
    }

    std::string choice(const std::string& key, const std::string& def, std::initializer_list<const char*> allowed) {
        const std::string v = string(key, def);
        for (const char* a : allowed)
            if (v == a) return v;
        std::string list;
        for (const char* a : allowed) list += (list.empty() ? "" : ", ") + std::string(a);
        throw schema(key, "expected one of " + list + ", got '" + v + "'");
    }

    std::vector<double> numbers(const std::string& key) {
        const auto& v = raw(key);
        if (!v.is_array()) throw schema(key, "expected an array of numbers");
        std::vector<double> out;
        for (const auto& e : v) {
            if (!e.is_number()) throw schema(key, "expected an array of numbers");
            out.push_back(e.get<double>());
        }
        return out;
    }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!seen_.count(it.key()))
                throw ConfigError(ConfigError::Kind::schema, "unknown key '" + field(it.key()) + "'");
    }

    ConfigError schema(const std::string& key, const std::string& msg) const {
        return ConfigError(ConfigError::Kind::schema, field(key) + ": " + msg);
    }
    ConfigError invariant(const std::string& key, const std::string& msg) const {
        return ConfigError(ConfigError::Kind::invariant, field(key) + ": " + msg);
    }

private:
    std::string name() const { return path_.empty() ? "config" : path_; }

    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

inline std::vector<Interval> parse_bounds(Section& s, std::size_t n, const std::string& what) {
    auto read = [&](const std::string& key) -> std::vector<double> {
        if (!s.has(key)) throw s.schema(key, "required");
        const auto& v = s.raw(key);
        if (v.is_number()) return std::vector<double>(n, v.get<double>());
        std::vector<double> out;
        if (!v.is_array()) throw s.schema(key, "expected a number or an array of numbers");
        for (const auto& e : v) {
            if (!e.is_number()) throw s.schema(key, "expected a number or an array of numbers");
            out.push_back(e.get<double>());
        }
        if (out.size() != n) throw s.invariant(key, "expected " + std::to_string(n) + " values for " + what);
        return out;
    };
    const auto lo = read("lower");
    const auto hi = read("upper");
    std::vector<Interval> b(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(lo[i]) || !std::isfinite(hi[i]) || !(lo[i] < hi[i]))
            throw s.invariant("lower", "bounds of dimension " + std::to_string(i) + " must be finite with lower < upper");
        b[i] = {lo[i], hi[i]};
    }
    return b;
}

inline void check_unit(Section& s, const std::string& key, double v) {
    if (!(v >= 0.0 && v <= 1.0)) throw s.invariant(key, "must lie in [0, 1]");
}

inline GaConfig parse_ga(const json& j, std::size_t n, const std::vector<Interval>& bounds) {
    Section s(j, "ga");
    GaConfig c = default_config(n);
    c.pop_size = s.integer("pop_size", c.pop_size);
    const auto enc = s.choice("encoding", "real", {"real", "binary"});
    c.encoding.kind = enc == "binary" ? EncodingKind::binary : EncodingKind::real;
    c.encoding.bits_per_variable = s.integer("bits_per_variable", c.encoding.bits_per_variable);
    c.variation.pc = s.number("pc", c.variation.pc);
    check_unit(s, "pc", c.variation.pc);
    c.variation.pm = s.number("pm", c.variation.pm);
    check_unit(s, "pm", c.variation.pm);
    c.variation.sigma_rel = s.number("sigma_rel", c.variation.sigma_rel);
    if (!(c.variation.sigma_rel > 0.0)) throw s.invariant("sigma_rel", "must be positive");
    c.variation.gamma = s.number("gamma", c.variation.gamma);
    if (!(c.variation.gamma > 0.0 && c.variation.gamma <= 1.0)) throw s.invariant("gamma", "must lie in (0, 1]");
    c.elitism = s.integer("elitism", c.elitism);
    const auto sel = s.choice("selection", "tournament", {"tournament", "rank"});
    c.selection.kind = sel == "rank" ? SelectionKind::rank : SelectionKind::tournament;
    c.selection.tournament_size = s.integer("tournament_size", c.selection.tournament_size);
    c.stopping.max_generations = s.integer("max_generations", c.stopping.max_generations);
    c.stopping.max_evaluations = s.optional_integer("max_evaluations", c.stopping.max_evaluations);
    c.stopping.stagnation_window = s.optional_integer("stagnation_window", c.stopping.stagnation_window);
    c.stopping.stagnation_epsilon = s.number("stagnation_epsilon", c.stopping.stagnation_epsilon);
    if (s.has("seed_regions")) {
        const auto& arr = s.raw("seed_regions");
        if (!arr.is_array()) throw s.schema("seed_regions", "expected an array");
        for (std::size_t k = 0; k < arr.size(); ++k) {
            Section r(arr[k], "ga.seed_regions[" + std::to_string(k) + "]");
            SeedRegion region;
            region.bounds = parse_bounds(r, n, "the seed region");
            region.fraction = r.number("fraction", 0.0);
            r.finish();
            c.seed_regions.push_back(std::move(region));
        }
    }
    s.finish();

    if (c.pop_size < 2) throw s.invariant("pop_size", "must be at least 2");
    if (c.elitism >= c.pop_size) throw s.invariant("elitism", "must be smaller than ga.pop_size");
    if (c.selection.tournament_size < 2) throw s.invariant("tournament_size", "must be at least 2");
    if (c.stopping.stagnation_window && *c.stopping.stagnation_window < 1)
        throw s.invariant("stagnation_window", "must be at least 1");
    if (!(c.stopping.stagnation_epsilon >= 0.0)) throw s.invariant("stagnation_epsilon", "must be non-negative");
    try {
        c.validate(SearchSpace(bounds));
    } catch (const std::invalid_argument& e) {
        throw ConfigError(ConfigError::Kind::invariant, e.what());
    }
    return c;
}

inline HybridConfig parse_hybrid(const json& j, const GaConfig& ga) {
    Section s(j, "hybrid");
    HybridConfig h;
    const auto mode = s.choice("mode", "lamarckian", {"lamarckian", "baldwinian", "mixed"});
    h.mode = mode == "baldwinian" ? HybridMode::baldwinian : mode == "mixed" ? HybridMode::mixed : HybridMode::lamarckian;
    h.lamarckian_fraction = s.number("lamarckian_fraction", h.lamarckian_fraction);
    check_unit(s, "lamarckian_fraction", h.lamarckian_fraction);
    const auto searcher = s.choice("searcher", "hill_climb", {"hill_climb", "sa"});
    h.searcher = searcher == "sa" ? Searcher::simulated_annealing : Searcher::hill_climb;
    const auto placement = s.choice("placement", "post", {"post", "interleaved"});
    h.placement = placement == "interleaved" ? Placement::interleaved : Placement::post;
    h.top_k = s.integer("top_k", h.top_k);
    if (h.top_k > ga.pop_size) throw s.invariant("top_k", "must not exceed ga.pop_size");
    h.application_probability = s.number("application_probability", h.application_probability);
    check_unit(s, "application_probability", h.application_probability);
    if (s.has("sa")) {
        Section a(s.raw("sa"), "hybrid.sa");
        h.sa.t0 = a.number("t0", h.sa.t0);
        if (!(h.sa.t0 > 0.0)) throw a.invariant("t0", "must be positive");
        h.sa.beta = a.number("beta", h.sa.beta);
        if (!(h.sa.beta > 0.0 && h.sa.beta < 1.0)) throw a.invariant("beta", "must lie in (0, 1)");
        h.sa.steps_per_temperature = a.integer("steps_per_temperature", h.sa.steps_per_temperature);
        if (h.sa.steps_per_temperature < 1) throw a.invariant("steps_per_temperature", "must be positive");
        h.sa.total_steps = a.integer("total_steps", h.sa.total_steps);
        h.sa.sigma_rel = a.number("sigma_rel", h.sa.sigma_rel);
        if (!(h.sa.sigma_rel > 0.0)) throw a.invariant("sigma_rel", "must be positive");
        a.finish();
    }
    if (s.has("hill_climb")) {
        Section a(s.raw("hill_climb"), "hybrid.hill_climb");
        h.hill_climb.initial_step = a.number("initial_step", h.hill_climb.initial_step);
        if (!(h.hill_climb.initial_step > 0.0)) throw a.invariant("initial_step", "must be positive");
        h.hill_climb.shrink = a.number("shrink", h.hill_climb.shrink);
        if (!(h.hill_climb.shrink > 0.0 && h.hill_climb.shrink < 1.0)) throw a.invariant("shrink", "must lie in (0, 1)");
        h.hill_climb.max_iterations = a.integer("max_iterations", h.hill_climb.max_iterations);
        if (h.hill_climb.max_iterations < 1) throw a.invariant("max_iterations", "must be positive");
        h.hill_climb.tolerance = a.number("tolerance", h.hill_climb.tolerance);
        if (!(h.hill_climb.tolerance > 0.0)) throw a.invariant("tolerance", "must be positive");
        a.finish();
    }
    s.finish();
    return h;
}

inline LandscapeSettings parse_landscape(const json& j, const std::vector<Interval>& bounds) {
    Section s(j, "landscape");
    LandscapeSettings l;
    const std::size_t n = bounds.size();
    l.lhs_samples = s.integer("lhs_samples", l.lhs_samples);
    if (s.has("slice")) {
        Section a(s.raw("slice"), "landscape.slice");
        SliceSettings sl;
        sl.i = a.integer("i", sl.i);
        sl.j = a.integer("j", sl.j);
        sl.resolution = a.integer("resolution", sl.resolution);
        if (a.has("base")) sl.base = a.numbers("base");
        a.finish();
        if (sl.i >= n || sl.j >= n) throw a.invariant("i", "dimension index out of range");
        if (sl.i == sl.j) throw a.invariant("j", "must differ from landscape.slice.i");
        if (sl.resolution < 2) throw a.invariant("resolution", "must be at least 2");
        if (sl.base && !SearchSpace(bounds).contains(*sl.base))
            throw a.invariant("base", "must have " + std::to_string(n) + " coordinates inside the bounds");
        l.slice = sl;
    }
    l.separability_trials = s.integer("separability_trials", l.separability_trials);
    if (l.separability_trials < 1) throw s.invariant("separability_trials", "must be positive");
    l.separability_tolerance = s.optional_number("separability_tolerance", std::nullopt);
    if (l.separability_tolerance && !(*l.separability_tolerance > 0.0))
        throw s.invariant("separability_tolerance", "must be positive");
    l.scan = s.boolean("scan", l.scan);
    l.dedup_radius = s.optional_number("dedup_radius", std::nullopt);
    if (l.dedup_radius && !(*l.dedup_radius >= 0.0)) throw s.invariant("dedup_radius", "must be non-negative");
    s.finish();
    return l;
}

inline OutputSettings parse_output(const json& j) {
    Section s(j, "output");
    OutputSettings o;
    o.directory = s.string("directory", o.directory);
    if (s.has("formats")) {
        const auto& f = s.raw("formats");
        if (!f.is_array()) throw s.schema("formats", "expected an array of \"csv\" / \"json\"");
        o.csv = o.json = false;
        for (const auto& e : f) {
            if (e == "csv") o.csv = true;
            else if (e == "json") o.json = true;
            else throw s.schema("formats", "expected an array of \"csv\" / \"json\"");
        }
    }
    s.finish();
    return o;
}

}  // namespace detail

/// Parses and validates a configuration document. Missing optional sections
/// take module defaults; `fallback_seed` is used when the document has none.
inline RunConfig parse_config(const json& doc, std::uint64_t fallback_seed = 0) {
    detail::Section s(doc, "");
    if (!s.has("schema_version")) throw s.schema("schema_version", "required");
    const auto version = s.integer("schema_version", 0);
    if (version != kSchemaVersion)
        throw s.schema("schema_version", "unsupported version " + std::to_string(version));

    RunConfig c;
    if (!s.has("problem")) throw s.schema("problem", "required");
    const auto& p = s.raw("problem");
    if (p.is_string()) {
        c.problem.builtin = p.get<std::string>();
    } else {
        detail::Section ps(p, "problem");
        c.problem.builtin = ps.string("builtin", "");
        if (ps.has("command")) {
            const auto& cmd = ps.raw("command");
            if (!cmd.is_array() || cmd.empty()) throw ps.schema("command", "expected a non-empty array of strings");
            for (const auto& a : cmd) {
                if (!a.is_string()) throw ps.schema("command", "expected a non-empty array of strings");
                c.problem.command.push_back(a.get<std::string>());
            }
        }
        c.problem.known_optimum = ps.optional_number("known_optimum", std::nullopt);
        ps.finish();
        if (c.problem.builtin.empty() == c.problem.command.empty())
            throw ps.schema("builtin", "exactly one of problem.builtin and problem.command is required");
    }

    if (!s.has("n")) throw s.schema("n", "required");
    c.n = s.integer("n", 0);
    if (c.n < 1) throw s.invariant("n", "must be at least 1");

    std::optional<BenchmarkFunction> builtin;
    if (!c.problem.builtin.empty()) {
        builtin = find_builtin(c.problem.builtin, c.n);
        if (!builtin) throw s.schema("problem", "unknown builtin function '" + c.problem.builtin + "'");
        if (!c.problem.known_optimum) c.problem.known_optimum = builtin->f_opt;
    }
    if (s.has("space")) {
        detail::Section sp(s.raw("space"), "space");
        c.bounds = detail::parse_bounds(sp, c.n, "the search space");
        sp.finish();
    } else if (builtin) {
        c.bounds = builtin->space.bounds();
    } else {
        throw s.schema("space", "required for external problems");
    }

    c.seed = s.integer("seed", fallback_seed);
    c.ga = detail::parse_ga(s.has("ga") ? s.raw("ga") : json::object(), c.n, c.bounds);
    if (s.has("hybrid")) c.hybrid = detail::parse_hybrid(s.raw("hybrid"), c.ga);
    c.landscape = detail::parse_landscape(s.has("landscape") ? s.raw("landscape") : json::object(), c.bounds);
    c.output = detail::parse_output(s.has("output") ? s.raw("output") : json::object());
    s.finish();
    return c;
}

inline json parse_json_text(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(ConfigError::Kind::parse, std::string("config parse error: ") + e.what());
    }
}

/// Reads, parses and validates a configuration file.
inline RunConfig load_config(const std::string& path, std::uint64_t fallback_seed = 0) {
    std::ifstream in(path);
    if (!in) throw ConfigError(ConfigError::Kind::io, "cannot read config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(parse_json_text(ss.str()), fallback_seed);
}

/// Fully resolved document; parse_config(to_json(c)) reproduces c.
inline json to_json(const RunConfig& c) {
    json doc;
    doc["schema_version"] = kSchemaVersion;
    json problem = json::object();
    if (!c.problem.builtin.empty()) problem["builtin"] = c.problem.builtin;
    else problem["command"] = c.problem.command;
    problem["known_optimum"] = c.problem.known_optimum ? json(*c.problem.known_optimum) : json(nullptr);
    doc["problem"] = problem;
    doc["n"] = c.n;
    json lo = json::array(), hi = json::array();
    for (const auto& b : c.bounds) {
        lo.push_back(b.lower);
        hi.push_back(b.upper);
    }
    doc["space"] = {{"lower", lo}, {"upper", hi}};
    doc["seed"] = c.seed;

    const auto& g = c.ga;
    json ga;
    ga["pop_size"] = g.pop_size;
    ga["encoding"] = g.encoding.kind == EncodingKind::binary ? "binary" : "real";
    ga["bits_per_variable"] = g.encoding.bits_per_variable;
    ga["pc"] = g.variation.pc;
    ga["pm"] = g.variation.pm;
    ga["sigma_rel"] = g.variation.sigma_rel;
    ga["gamma"] = g.variation.gamma;
    ga["elitism"] = g.elitism;
    ga["selection"] = g.selection.kind == SelectionKind::rank ? "rank" : "tournament";
    ga["tournament_size"] = g.selection.tournament_size;
    ga["max_generations"] = g.stopping.max_generations;
    ga["max_evaluations"] = g.stopping.max_evaluations ? json(*g.stopping.max_evaluations) : json(nullptr);
    ga["stagnation_window"] = g.stopping.stagnation_window ? json(*g.stopping.stagnation_window) : json(nullptr);
    ga["stagnation_epsilon"] = g.stopping.stagnation_epsilon;
    json regions = json::array();
    for (const auto& r : g.seed_regions) {
        json rl = json::array(), ru = json::array();
        for (const auto& b : r.bounds) {
            rl.push_back(b.lower);
            ru.push_back(b.upper);
        }
        regions.push_back({{"lower", rl}, {"upper", ru}, {"fraction", r.fraction}});
    }
    ga["seed_regions"] = regions;
    doc["ga"] = ga;

    if (c.hybrid) {
        const auto& h = *c.hybrid;
        json hy;
        hy["mode"] = h.mode == HybridMode::baldwinian ? "baldwinian" : h.mode == HybridMode::mixed ? "mixed" : "lamarckian";
        hy["lamarckian_fraction"] = h.lamarckian_fraction;
        hy["searcher"] = h.searcher == Searcher::simulated_annealing ? "sa" : "hill_climb";
        hy["placement"] = h.placement == Placement::interleaved ? "interleaved" : "post";
        hy["top_k"] = h.top_k;
        hy["application_probability"] = h.application_probability;
        hy["sa"] = {{"t0", h.sa.t0},
                    {"beta", h.sa.beta},
                    {"steps_per_temperature", h.sa.steps_per_temperature},
                    {"total_steps", h.sa.total_steps},
                    {"sigma_rel", h.sa.sigma_rel}};
        hy["hill_climb"] = {{"initial_step", h.hill_climb.initial_step},
                            {"shrink", h.hill_climb.shrink},
                            {"max_iterations", h.hill_climb.max_iterations},
                            {"tolerance", h.hill_climb.tolerance}};
        doc["hybrid"] = hy;
    }

    const auto& l = c.landscape;
    json land;
    land["lhs_samples"] = l.lhs_samples;
    if (l.slice) {
        json sl = {{"i", l.slice->i}, {"j", l.slice->j}, {"resolution", l.slice->resolution}};
        if (l.slice->base) sl["base"] = *l.slice->base;
        land["slice"] = sl;
    }
    land["separability_trials"] = l.separability_trials;
    land["separability_tolerance"] = l.separability_tolerance ? json(*l.separability_tolerance) : json(nullptr);
    land["scan"] = l.scan;
    land["dedup_radius"] = l.dedup_radius ? json(*l.dedup_radius) : json(nullptr);
    doc["landscape"] = land;

    json formats = json::array();
    if (c.output.csv) formats.push_back("csv");
    if (c.output.json) formats.push_back("json");
    doc["output"] = {{"directory", c.output.directory}, {"formats", formats}};
    return doc;
}

/// Objective-producing view of the configured problem.
inline BenchmarkFunction make_problem(const RunConfig& c, Objective::Function external = {}) {
    if (!c.problem.builtin.empty()) {
        auto fn = *find_builtin(c.problem.builtin, c.n);
        BenchmarkFunction out{fn.name, c.space(), fn.fn, fn.f_opt, fn.optimizer};
        // Custom bounds that exclude the reference optimizer drop the location.
        if (!out.space.contains(out.optimizer)) out.optimizer.clear();
        return out;
    }
    if (!external) throw ConfigError(ConfigError::Kind::invariant, "external problem requires a running command");
    return {"external", c.space(), std::move(external), c.problem.known_optimum.value_or(0.0), {}};
}

}  // namespace evoscheme::cli
