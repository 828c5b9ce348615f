#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "evoscheme/core.hpp"
#include "evoscheme/engine.hpp"
#include "evoscheme/hybrid.hpp"

namespace evoscheme {

// ---------------------------------------------------------------------------
// Benchmark functions (stored negated: every optimum is a maximum of 0)

struct BenchmarkFunction {
    std::string name;
    SearchSpace space;
    Objective::Function fn;
    double f_opt = 0.0;
    Point optimizer;

    std::size_t dimension() const noexcept { return space.dimension(); }
    /// Fresh objective with its own evaluation counter.
    Objective objective() const {
        if (optimizer.empty()) return Objective(dimension(), fn);
        return Objective(dimension(), fn, KnownOptimum{f_opt, optimizer});
    }
};

namespace bench {

inline double sphere(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return -s;
}

inline double rastrigin(std::span<const double> x) {
    double s = 10.0 * static_cast<double>(x.size());
    for (double v : x) s += v * v - 10.0 * std::cos(2.0 * std::numbers::pi * v);
    return -s;
}

inline double rosenbrock(std::span<const double> x) {
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < x.size(); ++i) {
        const double a = x[i + 1] - x[i] * x[i];
        const double b = 1.0 - x[i];
        s += 100.0 * a * a + b * b;
    }
    return -s;
}

inline double ackley(std::span<const double> x) {
    const double n = static_cast<double>(x.size());
    double sq = 0.0, cs = 0.0;
    for (double v : x) {
        sq += v * v;
        cs += std::cos(2.0 * std::numbers::pi * v);
    }
    const double f = -20.0 * std::exp(-0.2 * std::sqrt(sq / n)) - std::exp(cs / n) + 20.0 + std::numbers::e;
    return -std::max(f, 0.0);
}

}  // namespace bench

inline std::vector<BenchmarkFunction> builtin_functions(std::size_t n) {
    if (n < 1) throw InvariantError("builtin_functions: dimension must be positive");
    return {
        {"sphere", SearchSpace::cube(n, -5.12, 5.12), bench::sphere, 0.0, Point(n, 0.0)},
        {"rastrigin", SearchSpace::cube(n, -5.12, 5.12), bench::rastrigin, 0.0, Point(n, 0.0)},
        {"rosenbrock", SearchSpace::cube(n, -2.048, 2.048), bench::rosenbrock, 0.0, Point(n, 1.0)},
        {"ackley", SearchSpace::cube(n, -32.768, 32.768), bench::ackley, 0.0, Point(n, 0.0)},
    };
}

inline std::optional<BenchmarkFunction> find_builtin(const std::string& name, std::size_t n) {
    for (auto& f : builtin_functions(n))
        if (f.name == name) return f;
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Solver selection

/// Plain GA, or GA plus local search when `hybrid` is set.
struct SolverConfig {
    GaConfig ga;
    std::optional<HybridConfig> hybrid;
};

inline RunTrace solve(Objective& obj, const SearchSpace& space, const SolverConfig& cfg) {
    return cfg.hybrid ? run_hybrid(obj, space, cfg.ga, *cfg.hybrid) : run_ga(obj, space, cfg.ga);
}

// ---------------------------------------------------------------------------
// Replicates

struct RunSummary {
    std::uint64_t seed;
    double best_fitness;
    /// Mean fitness of the initial population.
    double baseline_fitness;
    std::uint64_t evaluations;
    std::size_t generations;
};

struct ReplicateReport {
    std::vector<RunSummary> runs;
    double mean_best = 0.0;
    /// Sample standard deviation (divisor R - 1; zero for a single run).
    double std_best = 0.0;
    double min_best = 0.0;
    double max_best = 0.0;
    double mean_evaluations = 0.0;
};

namespace detail {

inline double sample_std(std::span<const double> v, double mean) {
    if (v.size() < 2) return 0.0;
    double s = 0.0;
    for (double x : v) s += (x - mean) * (x - mean);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
}

inline double mean_of(std::span<const double> v) {
    double m = 0.0;
    std::size_t k = 0;
    for (double x : v) m += (x - m) / static_cast<double>(++k);
    return m;
}

}  // namespace detail

/// One independent run per seed. Runs are spread over `workers` threads;
/// each run gets its own objective instance and evaluates sequentially.
inline ReplicateReport run_replicates(const BenchmarkFunction& fn, const SolverConfig& cfg,
                                      std::span<const std::uint64_t> seeds, std::size_t workers = 1) {
    if (seeds.empty()) throw InvariantError("run_replicates: at least one run required");
    ReplicateReport rep;
    rep.runs.resize(seeds.size());
    parallel_for(seeds.size(), workers, [&](std::size_t k) {
        SolverConfig c = cfg;
        c.ga.seed = seeds[k];
        if (workers > 1) c.ga.workers = 1;
        Objective obj = fn.objective();
        const RunTrace t = solve(obj, fn.space, c);
        rep.runs[k] = {seeds[k], *t.best.fitness, t.records.front().mean_fitness, t.evaluations, t.generations()};
    });
    std::vector<double> best, evals;
    for (const auto& r : rep.runs) {
        best.push_back(r.best_fitness);
        evals.push_back(static_cast<double>(r.evaluations));
    }
    rep.mean_best = detail::mean_of(best);
    rep.std_best = detail::sample_std(best, rep.mean_best);
    rep.min_best = *std::min_element(best.begin(), best.end());
    rep.max_best = *std::max_element(best.begin(), best.end());
    rep.mean_evaluations = detail::mean_of(evals);
    return rep;
}

inline std::vector<std::uint64_t> consecutive_seeds(std::uint64_t base, std::size_t count) {
    std::vector<std::uint64_t> s(count);
    for (std::size_t k = 0; k < count; ++k) s[k] = base + k;
    return s;
}

inline ReplicateReport run_replicates(const BenchmarkFunction& fn, const SolverConfig& cfg, std::size_t runs,
                                      std::uint64_t base_seed, std::size_t workers = 1) {
    if (runs < 1) throw InvariantError("run_replicates: at least one run required");
    const auto seeds = consecutive_seeds(base_seed, runs);
    return run_replicates(fn, cfg, seeds, workers);
}

// ---------------------------------------------------------------------------
// Quality against a known optimum

/// Fraction of the gap between the baseline (initial population mean) and
/// the known optimum that the run closed, clipped to [0, 1].
inline double quality_ratio(double f_best, double f_base, double f_opt) {
    if (f_opt == f_base) return 1.0;
    return std::clamp((f_best - f_base) / (f_opt - f_base), 0.0, 1.0);
}

struct QualityReport {
    struct Run {
        std::uint64_t seed;
        double best_fitness;
        double baseline_fitness;
        double quality;
    };
    std::vector<Run> runs;
    double f_opt = 0.0;
    double mean_quality = 0.0;
    double threshold = 0.99;
    bool pass = false;
};

inline constexpr double kQualityThreshold = 0.99;

/// Scores already-completed runs. Throws when the optimum metadata is
/// evidently wrong: a run beat f_opt, or every baseline was already above it.
inline QualityReport score_quality(std::span<const RunSummary> runs, double f_opt,
                                   double threshold = kQualityThreshold) {
    if (runs.empty()) throw InvariantError("benchmark_quality: at least one run required");
    QualityReport rep;
    rep.f_opt = f_opt;
    rep.threshold = threshold;
    const double slack = 1e-9 * (1.0 + std::abs(f_opt));
    bool all_base_above = true;
    for (const auto& r : runs) {
        if (r.best_fitness > f_opt + slack)
            throw InvariantError("benchmark_quality: a run exceeded the known optimum; check f_opt");
        all_base_above = all_base_above && f_opt < r.baseline_fitness;
        rep.runs.push_back({r.seed, r.best_fitness, r.baseline_fitness,
                            quality_ratio(std::min(r.best_fitness, f_opt), r.baseline_fitness, f_opt)});
    }
    if (all_base_above) throw InvariantError("benchmark_quality: known optimum lies below every baseline; check f_opt");
    std::vector<double> q;
    for (const auto& r : rep.runs) q.push_back(r.quality);
    rep.mean_quality = detail::mean_of(q);
    rep.pass = rep.mean_quality >= threshold;
    return rep;
}

inline QualityReport benchmark_quality(const BenchmarkFunction& fn, const SolverConfig& cfg, std::size_t runs,
                                    std::uint64_t base_seed, std::size_t workers = 1) {
    const auto rep = run_replicates(fn, cfg, runs, base_seed, workers);
    return score_quality(rep.runs, fn.f_opt);
}

// ---------------------------------------------------------------------------
// Population size study

struct TuningVariant {
    std::size_t pop_size;
    double mean_best;
    double std_best;
    std::size_t max_generations;
};

enum class Recommendation { increase, keep };

inline const char* to_string(Recommendation r) { return r == Recommendation::increase ? "increase" : "keep"; }

struct TuningReport {
    /// N/2, N, 2N in that order.
    std::vector<TuningVariant> variants;
    std::size_t replicates = 0;
    /// sqrt(s_N^2 / R + s_2N^2 / R)
    double pooled_standard_error = 0.0;
    Recommendation recommendation = Recommendation::keep;
};

/// Increase when the 2N mean beats the N mean by more than one pooled
/// standard error.
inline Recommendation recommend(const TuningVariant& at_n, const TuningVariant& at_2n, std::size_t replicates,
                                double* pooled_se = nullptr) {
    const double r = static_cast<double>(replicates);
    const double se = std::sqrt(at_n.std_best * at_n.std_best / r + at_2n.std_best * at_2n.std_best / r);
    if (pooled_se) *pooled_se = se;
    return at_2n.mean_best - at_n.mean_best > se ? Recommendation::increase : Recommendation::keep;
}

/// Reruns the solver with floor(N/2), N and 2N members on the same seeds and
/// generation budget.
inline TuningReport population_size_study(const BenchmarkFunction& fn, const SolverConfig& cfg,
                                          std::size_t replicates, std::uint64_t base_seed, std::size_t workers = 1) {
    const std::size_t n = cfg.ga.pop_size;
    if (n < 4) throw InvariantError("population_size_study: ga.pop_size must be at least 4");
    if (replicates < 1) throw InvariantError("population_size_study: at least one replicate required");
    TuningReport rep;
    rep.replicates = replicates;
    for (std::size_t size : {n / 2, n, 2 * n}) {
        SolverConfig c = cfg;
        c.ga.pop_size = size;
        c.ga.elitism = std::min(c.ga.elitism, size - 1);
        if (c.hybrid) c.hybrid->top_k = std::min(c.hybrid->top_k, size);
        const auto r = run_replicates(fn, c, replicates, base_seed, workers);
        rep.variants.push_back({size, r.mean_best, r.std_best, c.ga.stopping.max_generations});
    }
    rep.recommendation = recommend(rep.variants[1], rep.variants[2], replicates, &rep.pooled_standard_error);
    return rep;
}

}  // namespace evoscheme
