#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "evoscheme/core.hpp"
#include "evoscheme/engine.hpp"
#include "evoscheme/operators.hpp"

namespace evoscheme {

// ---------------------------------------------------------------------------
// Simulated annealing

struct SaSchedule {
    double t0 = 1.0;
    double beta = 0.9;
    std::size_t steps_per_temperature = 10;
    std::size_t total_steps = 500;
    double sigma_rel = 0.05;

    void validate() const {
        if (!(t0 > 0.0) || !std::isfinite(t0)) throw InvariantError("sa.t0 must be positive");
        if (!(beta > 0.0 && beta < 1.0)) throw InvariantError("sa.beta must lie in (0, 1)");
        if (steps_per_temperature < 1) throw InvariantError("sa.steps_per_temperature must be positive");
        if (!(sigma_rel > 0.0) || !std::isfinite(sigma_rel)) throw InvariantError("sa.sigma_rel must be positive");
    }
};

/// Geometric cooling: every cool() multiplies the temperature by beta.
class Temperature {
public:
    Temperature(double t0, double beta) : t_(t0), beta_(beta) {
        if (!(t0 > 0.0)) throw InvariantError("initial temperature must be positive");
        if (!(beta > 0.0 && beta < 1.0)) throw InvariantError("cooling factor must lie in (0, 1)");
    }
    double value() const noexcept { return t_; }
    std::size_t cooling_events() const noexcept { return events_; }
    void cool() noexcept {
        t_ *= beta_;
        ++events_;
    }

private:
    double t_;
    double beta_;
    std::size_t events_ = 0;
};

/// Probability of accepting a move that changes fitness by delta
/// (f_new - f_current) at temperature T, under maximization.
inline double sa_accept_prob(double delta, double temperature) {
    if (!(temperature > 0.0)) throw InvariantError("sa_accept_prob: temperature must be positive");
    if (delta >= 0.0) return 1.0;
    return std::exp(delta / temperature);
}

struct LocalResult {
    Point x;
    double fitness;
    std::uint64_t evaluations = 0;
};

struct SaStep {
    std::size_t step;
    double current_fitness;
    double temperature;
    bool accepted;
};

namespace detail {
struct NoObserver {
    void operator()(const SaStep&) const {}
};
}  // namespace detail

/// Annealing walk from x0 with clamped Gaussian proposals. Returns the best
/// point visited, which is never worse than x0.
template <class Observer = detail::NoObserver>
LocalResult sa_local_search(const Point& x0, Objective& obj, const SearchSpace& space, const SaSchedule& sched,
                            RngStream& rng, Observer&& observe = {}) {
    sched.validate();
    if (!space.contains(x0)) throw InvariantError("sa_local_search: start point outside the search space");
    const std::uint64_t start = obj.evaluations();

    Point current = x0;
    double f_current = obj(current);
    LocalResult best{current, f_current};
    Temperature temp(sched.t0, sched.beta);

    for (std::size_t step = 1; step <= sched.total_steps; ++step) {
        Point proposal = current;
        for (std::size_t i = 0; i < proposal.size(); ++i)
            proposal[i] += sched.sigma_rel * space[i].width() * rng.normal();
        proposal = clamp_to_bounds(std::move(proposal), space);
        const double f_new = obj(proposal);
        const bool accepted = rng.uniform01() < sa_accept_prob(f_new - f_current, temp.value());
        if (accepted) {
            current = std::move(proposal);
            f_current = f_new;
            if (f_current > best.fitness) {
                best.x = current;
                best.fitness = f_current;
            }
        }
        observe(SaStep{step, f_current, temp.value(), accepted});
        if (step % sched.steps_per_temperature == 0) temp.cool();
    }
    best.evaluations = obj.evaluations() - start;
    return best;
}

// ---------------------------------------------------------------------------
// Hill climbing

struct HillClimbConfig {
    /// Steps are fractions of each coordinate's range.
    double initial_step = 0.1;
    double shrink = 0.5;
    std::size_t max_iterations = 1000;
    double tolerance = 1e-9;

    void validate() const {
        if (!(initial_step > 0.0)) throw InvariantError("hill_climb.initial_step must be positive");
        if (!(shrink > 0.0 && shrink < 1.0)) throw InvariantError("hill_climb.shrink must lie in (0, 1)");
        if (max_iterations < 1) throw InvariantError("hill_climb.max_iterations must be positive");
        if (!(tolerance > 0.0)) throw InvariantError("hill_climb.tolerance must be positive");
    }
};

/// Deterministic compass search: probe +/- step along every axis, move to
/// the best strictly improving probe, otherwise shrink the step.
inline LocalResult hill_climb(const Point& x0, Objective& obj, const SearchSpace& space, const HillClimbConfig& cfg) {
    cfg.validate();
    if (!space.contains(x0)) throw InvariantError("hill_climb: start point outside the search space");
    const std::uint64_t start = obj.evaluations();

    LocalResult cur{x0, obj(x0)};
    double step = cfg.initial_step;
    for (std::size_t it = 0; it < cfg.max_iterations && step >= cfg.tolerance; ++it) {
        std::optional<std::pair<Point, double>> move;
        for (std::size_t i = 0; i < cur.x.size(); ++i) {
            for (double sign : {-1.0, 1.0}) {
                Point probe = cur.x;
                probe[i] = std::clamp(probe[i] + sign * step * space[i].width(), space[i].lower, space[i].upper);
                if (probe[i] == cur.x[i]) continue;
                const double f = obj(probe);
                if (f > (move ? move->second : cur.fitness)) move.emplace(std::move(probe), f);
            }
        }
        if (move) {
            cur.x = std::move(move->first);
            cur.fitness = move->second;
        } else {
            step *= cfg.shrink;
        }
    }
    cur.evaluations = obj.evaluations() - start;
    return cur;
}

// ---------------------------------------------------------------------------
// Replacement semantics

enum class LearningMode { lamarckian, baldwinian };

/// Writes a local-search result back into an individual. Lamarckian
/// replaces genotype and phenotype with the improved point; Baldwinian keeps
/// them and only takes over the improved fitness. A result that does not
/// improve on the stored fitness leaves the individual unchanged.
///
/// Binary individuals need `codec`, and a Lamarckian point must then be
/// exactly representable on the codec lattice.
inline Individual apply_local_search(const Individual& ind, const LocalResult& result, LearningMode mode,
                                     const SearchSpace& space, const BinaryCodec* codec = nullptr) {
    if (!space.contains(result.x)) throw InvariantError("apply_local_search: improved point outside the search space");
    if (!(result.fitness > ind.fitness_or_throw())) return ind;
    Individual out = ind;
    out.fitness = result.fitness;
    if (mode == LearningMode::baldwinian) {
        out.acquired_fitness = true;
        return out;
    }
    if (ind.is_binary()) {
        if (!codec) throw InvariantError("apply_local_search: binary individual requires a codec");
        BinaryGenotype g = codec->encode(result.x);
        if (codec->decode(g) != result.x)
            throw InvariantError("apply_local_search: point is not representable by the binary codec");
        out.genotype = std::move(g);
    } else {
        out.genotype = RealGenotype{result.x};
    }
    out.phenotype = result.x;
    out.acquired_fitness = false;
    return out;
}

// ---------------------------------------------------------------------------
// Hybrid driver

enum class HybridMode { lamarckian, baldwinian, mixed };
enum class Searcher { hill_climb, simulated_annealing };
enum class Placement { post, interleaved };

struct HybridConfig {
    HybridMode mode = HybridMode::lamarckian;
    double lamarckian_fraction = 0.1;
    Searcher searcher = Searcher::hill_climb;
    Placement placement = Placement::post;
    std::size_t top_k = 5;
    double application_probability = 0.1;
    SaSchedule sa;
    HillClimbConfig hill_climb;

    void validate(const GaConfig& ga) const {
        if (!(lamarckian_fraction >= 0.0 && lamarckian_fraction <= 1.0))
            throw InvariantError("hybrid.lamarckian_fraction must lie in [0, 1]");
        if (!(application_probability >= 0.0 && application_probability <= 1.0))
            throw InvariantError("hybrid.application_probability must lie in [0, 1]");
        if (top_k > ga.pop_size) throw InvariantError("hybrid.top_k must not exceed ga.pop_size");
        if (searcher == Searcher::simulated_annealing) sa.validate();
        else hill_climb.validate();
    }
};

namespace detail {

inline LocalResult run_searcher(const Point& x0, Objective& obj, const SearchSpace& space, const HybridConfig& cfg,
                                RngStream& rng) {
    if (cfg.searcher == Searcher::simulated_annealing) return sa_local_search(x0, obj, space, cfg.sa, rng);
    return hill_climb(x0, obj, space, cfg.hill_climb);
}

/// Binary runs keep phenotypes on the codec lattice, so the searched point
/// is snapped onto it (and re-measured if snapping moved it).
inline LocalResult snap_to_codec(LocalResult r, Objective& obj, const BinaryCodec* codec) {
    if (!codec) return r;
    Point snapped = codec->decode(codec->encode(r.x));
    if (snapped != r.x) {
        r.fitness = obj(snapped);
        r.x = std::move(snapped);
        ++r.evaluations;
    }
    return r;
}

struct Job {
    std::size_t index;
    LearningMode mode;
    RngStream rng;
};

/// Runs the local-search jobs (possibly in parallel, each with its own
/// stream), writes results back in index order and returns the evaluations
/// spent.
inline std::uint64_t run_jobs(std::vector<Job>& jobs, Population& pop, Objective& obj, const SearchSpace& space,
                              const GaConfig& ga, const HybridConfig& cfg, BestTracker& best) {
    std::optional<BinaryCodec> codec;
    if (ga.encoding.kind == EncodingKind::binary) codec.emplace(space, ga.encoding.bits_per_variable);
    std::vector<LocalResult> results(jobs.size());
    parallel_for(jobs.size(), ga.workers, [&](std::size_t k) {
        auto r = run_searcher(pop.members[jobs[k].index].phenotype, obj, space, cfg, jobs[k].rng);
        results[k] = snap_to_codec(std::move(r), obj, codec ? &*codec : nullptr);
    });
    std::uint64_t used = 0;
    for (std::size_t k = 0; k < jobs.size(); ++k) {
        auto& ind = pop.members[jobs[k].index];
        used += results[k].evaluations;
        Individual measured = individual_from_point(results[k].x, space, ga);
        measured.fitness = results[k].fitness;
        best.offer(measured);
        ind = apply_local_search(ind, results[k], jobs[k].mode, space, codec ? &*codec : nullptr);
    }
    return used;
}

inline LearningMode draw_mode(const HybridConfig& cfg, RngStream& rng) {
    switch (cfg.mode) {
        case HybridMode::lamarckian: return LearningMode::lamarckian;
        case HybridMode::baldwinian: return LearningMode::baldwinian;
        case HybridMode::mixed:
            return rng.bernoulli(cfg.lamarckian_fraction) ? LearningMode::lamarckian : LearningMode::baldwinian;
    }
    return LearningMode::lamarckian;
}

}  // namespace detail

/// GA combined with a local searcher.
///
/// Post placement runs the plain GA and then refines the top_k distinct
/// members of the final population. Interleaved placement refines each
/// member of every new generation with the application probability, before
/// the generation is recorded.
///
/// Hybrid decisions draw from a stream separate from the GA stream, so with
/// local search disabled the run reproduces run_ga exactly.
inline RunTrace run_hybrid(Objective& obj, const SearchSpace& space, const GaConfig& ga, const HybridConfig& cfg) {
    cfg.validate(ga);
    RngStream hybrid_rng(splitmix64(ga.seed ^ 0x6879627269640000ULL));
    std::uint64_t ls_evals = 0;

    if (cfg.placement == Placement::interleaved) {
        auto hook = [&](Population& pop, detail::BestTracker& best) {
            std::vector<detail::Job> jobs;
            for (std::size_t i = 0; i < pop.size(); ++i) {
                if (!hybrid_rng.bernoulli(cfg.application_probability)) continue;
                const LearningMode mode = detail::draw_mode(cfg, hybrid_rng);
                jobs.push_back({i, mode, hybrid_rng.split()});
            }
            ls_evals += detail::run_jobs(jobs, pop, obj, space, ga, cfg, best);
        };
        RunTrace trace = evolve(obj, space, ga, hook);
        trace.local_search_evaluations = ls_evals;
        return trace;
    }

    RunTrace trace = evolve(obj, space, ga);
    const std::uint64_t before = obj.evaluations();
    if (cfg.top_k > 0) {
        auto& pop = trace.final_population;
        std::vector<detail::Job> jobs;
        std::vector<const Point*> chosen;
        for (std::size_t i : ranked_indices(pop)) {
            if (jobs.size() == cfg.top_k) break;
            const Point& x = pop.members[i].phenotype;
            if (std::any_of(chosen.begin(), chosen.end(), [&](const Point* p) { return *p == x; })) continue;
            chosen.push_back(&x);
            const LearningMode mode = detail::draw_mode(cfg, hybrid_rng);
            jobs.push_back({i, mode, hybrid_rng.split()});
        }
        detail::BestTracker best{trace.best, true};
        ls_evals = detail::run_jobs(jobs, pop, obj, space, ga, cfg, best);
        trace.best = best.best;
    }
    trace.local_search_evaluations = ls_evals;
    trace.evaluations += obj.evaluations() - before;
    return trace;
}

}  // namespace evoscheme
