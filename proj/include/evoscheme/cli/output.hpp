#pragma once

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "evoscheme/core.hpp"
#include "evoscheme/harness.hpp"
#include "evoscheme/landscape.hpp"

namespace evoscheme::cli {

/// Fixed (non-exponent) notation carrying 17 significant digits.
inline std::string format_decimal17(double v) {
    if (v == 0.0) v = 0.0;  // drop the sign of negative zero
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.16e", v);
    const char* e = std::strchr(buf, 'e');
    const int exponent = e ? std::atoi(e + 1) : 0;
    const int decimals = std::max(0, 16 - exponent);
    std::vector<char> out(static_cast<std::size_t>(decimals) + 400);
    std::snprintf(out.data(), out.size(), "%.*f", decimals, v);
    return out.data();
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    out << text;
    if (!out) throw std::runtime_error("error while writing '" + path.string() + "'");
}

inline void write_json(const std::filesystem::path& path, const nlohmann::json& doc) {
    write_text(path, doc.dump(2) + "\n");
}

inline std::string trace_csv(const RunTrace& trace) {
    std::string s = "generation,best_fitness,mean_fitness,std_fitness,cumulative_evaluations\n";
    for (const auto& r : trace.records) {
        s += std::to_string(r.generation) + ',' + format_decimal17(r.best_fitness) + ',' +
             format_decimal17(r.mean_fitness) + ',' + format_decimal17(r.std_fitness) + ',' +
             std::to_string(r.cumulative_evaluations) + '\n';
    }
    return s;
}

inline std::string lhs_csv(const LhsDesign& d, const std::vector<double>& fitness) {
    std::string s;
    const std::size_t n = d.points.empty() ? 0 : d.points.front().size();
    for (std::size_t i = 0; i < n; ++i) s += "x" + std::to_string(i + 1) + ',';
    s += "fitness\n";
    for (std::size_t k = 0; k < d.points.size(); ++k) {
        for (double x : d.points[k]) s += format_decimal17(x) + ',';
        s += format_decimal17(fitness[k]) + '\n';
    }
    return s;
}

inline std::string slice_csv(const SliceGrid& g) {
    std::string s = "x" + std::to_string(g.i + 1) + ",x" + std::to_string(g.j + 1) + ",fitness\n";
    for (std::size_t a = 0; a < g.resolution; ++a)
        for (std::size_t b = 0; b < g.resolution; ++b)
            s += format_decimal17(g.xi[a]) + ',' + format_decimal17(g.xj[b]) + ',' + format_decimal17(g.at(a, b)) + '\n';
    return s;
}

inline nlohmann::json best_json(const RunTrace& t) {
    return {{"phenotype", t.best.phenotype},
            {"fitness", *t.best.fitness},
            {"evaluations", t.evaluations},
            {"local_search_evaluations", t.local_search_evaluations},
            {"generations", t.generations()},
            {"stop_reason", to_string(t.stop_reason)},
            {"seed", t.seed}};
}

inline nlohmann::json quality_json(const QualityReport& q) {
    nlohmann::json runs = nlohmann::json::array();
    for (const auto& r : q.runs)
        runs.push_back({{"seed", r.seed},
                        {"best_fitness", r.best_fitness},
                        {"baseline_fitness", r.baseline_fitness},
                        {"quality", r.quality}});
    return {{"runs", runs},
            {"run_count", q.runs.size()},
            {"f_opt", q.f_opt},
            {"mean_quality", q.mean_quality},
            {"threshold", q.threshold},
            {"pass", q.pass}};
}

inline nlohmann::json tuning_json(const TuningReport& t) {
    nlohmann::json variants = nlohmann::json::array();
    for (const auto& v : t.variants)
        variants.push_back({{"pop_size", v.pop_size},
                            {"mean_best", v.mean_best},
                            {"std_best", v.std_best},
                            {"max_generations", v.max_generations}});
    return {{"variants", variants},
            {"replicates", t.replicates},
            {"pooled_standard_error", t.pooled_standard_error},
            {"recommendation", to_string(t.recommendation)}};
}

inline nlohmann::json separability_json(const SeparabilityReport& r) {
    nlohmann::json pairs = nlohmann::json::array();
    for (const auto& p : r.pairs)
        pairs.push_back({{"i", p.i}, {"j", p.j}, {"residual", p.residual}, {"separable", p.separable}});
    return {{"pairs", pairs}, {"tolerance", r.tolerance}, {"separable", r.separable}};
}

inline nlohmann::json scan_json(const std::vector<Individual>& ranked) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& ind : ranked) out.push_back({{"phenotype", ind.phenotype}, {"fitness", *ind.fitness}});
    return out;
}

}  // namespace evoscheme::cli
