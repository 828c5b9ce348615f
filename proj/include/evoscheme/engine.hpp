#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "evoscheme/core.hpp"
#include "evoscheme/operators.hpp"

namespace evoscheme {

// ---------------------------------------------------------------------------
// Configuration

enum class EncodingKind { real, binary };

struct Encoding {
    EncodingKind kind = EncodingKind::real;
    std::size_t bits_per_variable = 16;
};

enum class SelectionKind { tournament, rank };

struct Selection {
    SelectionKind kind = SelectionKind::tournament;
    std::size_t tournament_size = 2;
};

struct StoppingRule {
    std::size_t max_generations = 200;
    std::optional<std::uint64_t> max_evaluations;
    /// Stop once the best fitness improved by less than `stagnation_epsilon`
    /// over the last `stagnation_window` generations.
    std::optional<std::size_t> stagnation_window = 50;
    double stagnation_epsilon = 1e-12;
};

/// Sub-box of the search space from which a fraction of the initial
/// population is drawn.
struct SeedRegion {
    std::vector<Interval> bounds;
    double fraction = 0.0;
};

struct GaConfig {
    std::size_t pop_size = 20;
    Encoding encoding;
    VariationConfig variation;
    std::size_t elitism = 1;
    Selection selection;
    StoppingRule stopping;
    std::uint64_t seed = 0;
    std::vector<SeedRegion> seed_regions;
    /// Threads used for fitness evaluation. Does not affect results.
    std::size_t workers = 1;

    void validate(const SearchSpace& space) const {
        if (pop_size < 2) throw InvariantError("ga.pop_size must be at least 2");
        if (elitism >= pop_size) throw InvariantError("ga.elitism must be smaller than ga.pop_size");
        if (selection.kind == SelectionKind::tournament && selection.tournament_size < 2)
            throw InvariantError("ga.tournament_size must be at least 2");
        if (encoding.kind == EncodingKind::binary) {
            if (encoding.bits_per_variable < 1 || encoding.bits_per_variable > 52)
                throw InvariantError("ga.bits_per_variable must lie in [1, 52]");
            if (encoding.bits_per_variable * space.dimension() < 2)
                throw InvariantError("binary genotype needs at least 2 bits for crossover");
        }
        variation.validate();
        if (stopping.stagnation_window && *stopping.stagnation_window < 1)
            throw InvariantError("ga.stagnation_window must be at least 1");
        if (!(stopping.stagnation_epsilon >= 0.0)) throw InvariantError("ga.stagnation_epsilon must be non-negative");
        double total = 0.0;
        for (const auto& r : seed_regions) {
            if (r.bounds.size() != space.dimension()) throw DimensionError("seed region dimension mismatch");
            for (std::size_t i = 0; i < r.bounds.size(); ++i) {
                const auto& b = r.bounds[i];
                if (!(b.lower <= b.upper) || b.lower < space[i].lower || b.upper > space[i].upper)
                    throw InvariantError("seed region must lie inside the search space");
            }
            if (!(r.fraction >= 0.0)) throw InvariantError("seed region fraction must be non-negative");
            total += r.fraction;
        }
        if (total > 1.0 + 1e-12) throw InvariantError("seed region fractions sum to more than 1");
    }
};

/// Starting-point parameters for an n-variable problem: population equal to
/// the problem size (kept within [20, 200]), pc = 0.9, pm = 1/n, one elite,
/// binary tournaments.
inline GaConfig default_config(std::size_t n) {
    if (n < 1) throw InvariantError("default_config: dimension must be positive");
    GaConfig c;
    c.pop_size = std::clamp<std::size_t>(n, 20, 200);
    c.variation.pc = 0.9;
    c.variation.pm = 1.0 / static_cast<double>(n);
    c.variation.sigma_rel = 0.1;
    c.variation.gamma = 0.99;
    c.elitism = 1;
    c.selection = {SelectionKind::tournament, 2};
    c.stopping = StoppingRule{};
    return c;
}

// ---------------------------------------------------------------------------
// Individuals

inline Individual make_individual(Genotype g, const SearchSpace& space, const GaConfig& config) {
    Individual ind;
    if (auto* bits = std::get_if<BinaryGenotype>(&g)) {
        ind.phenotype = BinaryCodec(space, config.encoding.bits_per_variable).decode(*bits);
    } else {
        ind.phenotype = clamp_to_bounds(std::get<RealGenotype>(g).values, space);
        std::get<RealGenotype>(g).values = ind.phenotype;
    }
    ind.genotype = std::move(g);
    return ind;
}

inline Individual individual_from_point(const Point& x, const SearchSpace& space, const GaConfig& config) {
    if (config.encoding.kind == EncodingKind::binary)
        return make_individual(BinaryCodec(space, config.encoding.bits_per_variable).encode(x), space, config);
    return make_individual(RealGenotype{x}, space, config);
}

/// Indices ordered by fitness, best first; ties keep the lower index first.
inline std::vector<std::size_t> ranked_indices(const Population& pop) {
    std::vector<std::size_t> idx(pop.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        return pop.members[a].fitness_or_throw() > pop.members[b].fitness_or_throw();
    });
    return idx;
}

// ---------------------------------------------------------------------------
// Initialization

/// Seed-region draws come first (floor(fraction * N) per region), the rest
/// is uniform over the whole space. All members are evaluated.
inline Population init_population(const SearchSpace& space, const GaConfig& config, Objective& obj, RngStream& rng) {
    config.validate(space);
    if (obj.dimension() != space.dimension()) throw DimensionError("objective and search space dimensions differ");
    Population pop;
    pop.members.reserve(config.pop_size);
    for (const auto& region : config.seed_regions) {
        const auto count = static_cast<std::size_t>(std::floor(region.fraction * static_cast<double>(config.pop_size)));
        for (std::size_t k = 0; k < count && pop.members.size() < config.pop_size; ++k) {
            Point x(space.dimension());
            for (std::size_t i = 0; i < x.size(); ++i) x[i] = rng.uniform(region.bounds[i].lower, region.bounds[i].upper);
            pop.members.push_back(individual_from_point(x, space, config));
        }
    }
    while (pop.members.size() < config.pop_size) {
        if (config.encoding.kind == EncodingKind::binary) {
            const BinaryCodec codec(space, config.encoding.bits_per_variable);
            pop.members.push_back(make_individual(random_bits(codec.length(), rng), space, config));
        } else {
            pop.members.push_back(make_individual(RealGenotype{random_point(space, rng)}, space, config));
        }
    }
    evaluate_pending(obj, pop.members, config.workers);
    return pop;
}

// ---------------------------------------------------------------------------
// Selection

inline std::size_t select_parent_index(const Population& pop, const Selection& scheme, RngStream& rng) {
    const std::size_t n = pop.size();
    if (n == 0) throw InvariantError("select_parent: empty population");
    if (scheme.kind == SelectionKind::tournament) {
        if (scheme.tournament_size < 2) throw InvariantError("tournament size must be at least 2");
        // Contestants are drawn without replacement (Floyd's algorithm), so a
        // tournament of size N always contains the whole population.
        const std::size_t s = std::min(scheme.tournament_size, n);
        std::vector<std::size_t> contestants;
        contestants.reserve(s);
        for (std::size_t j = n - s; j < n; ++j) {
            const auto t = static_cast<std::size_t>(rng.index(j + 1));
            const bool seen = std::find(contestants.begin(), contestants.end(), t) != contestants.end();
            contestants.push_back(seen ? j : t);
        }
        std::size_t winner = contestants.front();
        for (std::size_t c : contestants) {
            const double fc = pop.members[c].fitness_or_throw();
            const double fw = pop.members[winner].fitness_or_throw();
            if (fc > fw || (fc == fw && c < winner)) winner = c;
        }
        return winner;
    }
    // Rank-proportional: rank r (1 = best) has weight N - r + 1.
    const auto order = ranked_indices(pop);
    const double total = static_cast<double>(n) * static_cast<double>(n + 1) / 2.0;
    double u = rng.uniform01() * total;
    for (std::size_t r = 0; r < n; ++r) {
        u -= static_cast<double>(n - r);
        if (u < 0.0) return order[r];
    }
    return order.back();
}

inline const Individual& select_parent(const Population& pop, const Selection& scheme, RngStream& rng) {
    return pop.members[select_parent_index(pop, scheme, rng)];
}

// ---------------------------------------------------------------------------
// One generation

namespace detail {

inline std::pair<Genotype, Genotype> recombine(const Individual& a, const Individual& b, RngStream& rng) {
    if (a.is_binary()) {
        auto [c1, c2] = one_point_crossover(std::get<BinaryGenotype>(a.genotype), std::get<BinaryGenotype>(b.genotype), rng);
        return {std::move(c1), std::move(c2)};
    }
    const RealGenotype parents[2] = {std::get<RealGenotype>(a.genotype), std::get<RealGenotype>(b.genotype)};
    const double alpha = rng.uniform01();
    return {intermediate_recombine(parents, RecombinationWeights::pair(alpha)),
            intermediate_recombine(parents, RecombinationWeights::pair(1.0 - alpha))};
}

inline Genotype mutate(Genotype g, const GaConfig& config, const SearchSpace& space, std::size_t generation,
                       RngStream& rng) {
    const auto& v = config.variation;
    if (auto* bits = std::get_if<BinaryGenotype>(&g)) return bitflip_mutate(std::move(*bits), v.pm, rng);
    const double sigma = sigma_at_generation(v.sigma_rel, v.gamma, generation);
    if (!(sigma > 0.0)) return g;  // scale underflowed after very many generations
    return gaussian_mutate(std::move(std::get<RealGenotype>(g)), sigma, v.pm, space, rng);
}

}  // namespace detail

/// Produces the next generation: elites are copied unchanged, the remaining
/// slots are filled with mutated children of selected parent pairs, and the
/// children are evaluated.
inline Population step_generation(const Population& pop, const SearchSpace& space, const GaConfig& config,
                                  Objective& obj, RngStream& rng) {
    const std::size_t n = config.pop_size;
    if (pop.size() != n) throw InvariantError("step_generation: population size differs from ga.pop_size");
    Population next;
    next.generation = pop.generation + 1;
    next.members.reserve(n);

    const auto order = ranked_indices(pop);
    for (std::size_t k = 0; k < config.elitism; ++k) next.members.push_back(pop.members[order[k]]);

    while (next.members.size() < n) {
        const Individual& a = select_parent(pop, config.selection, rng);
        const Individual& b = select_parent(pop, config.selection, rng);
        std::pair<Genotype, Genotype> children = rng.bernoulli(config.variation.pc)
                                                     ? detail::recombine(a, b, rng)
                                                     : std::pair<Genotype, Genotype>{a.genotype, b.genotype};
        for (Genotype* child : {&children.first, &children.second}) {
            if (next.members.size() == n) break;
            next.members.push_back(
                make_individual(detail::mutate(std::move(*child), config, space, pop.generation, rng), space, config));
        }
    }
    evaluate_pending(obj, next.members, config.workers);
    return next;
}

// ---------------------------------------------------------------------------
// Run loop

namespace detail {

struct BestTracker {
    Individual best;
    bool has = false;

    void offer(const Individual& ind) {
        if (ind.acquired_fitness || !ind.fitness) return;
        if (!has || *ind.fitness > *best.fitness) {
            best = ind;
            has = true;
        }
    }
    void offer(const Population& pop) {
        for (const auto& ind : pop.members) offer(ind);
    }
};

inline GenerationRecord make_record(const Population& pop, std::uint64_t evaluations) {
    const auto s = population_stats(pop);
    return {pop.generation, s.best, s.mean, s.std, evaluations};
}

struct NoHook {
    void operator()(Population&, BestTracker&) const {}
};

}  // namespace detail

/// Generational GA. `after_step` runs on every population produced by
/// step_generation (not on the initial one) before it is recorded; the
/// hybrid driver uses it for interleaved local search.
template <class Hook = detail::NoHook>
RunTrace evolve(Objective& obj, const SearchSpace& space, const GaConfig& config, Hook&& after_step = {}) {
    config.validate(space);
    if (obj.dimension() != space.dimension()) throw DimensionError("objective and search space dimensions differ");
    const auto t0 = std::chrono::steady_clock::now();
    const std::uint64_t start = obj.evaluations();
    auto used = [&] { return obj.evaluations() - start; };

    RngStream rng(config.seed);
    RunTrace trace;
    trace.seed = config.seed;
    detail::BestTracker best;

    Population pop = init_population(space, config, obj, rng);
    best.offer(pop);
    trace.records.push_back(detail::make_record(pop, used()));

    const auto& stop = config.stopping;
    trace.stop_reason = StopReason::max_generations;
    for (std::size_t g = 0; g < stop.max_generations; ++g) {
        if (stop.max_evaluations && used() + (config.pop_size - config.elitism) > *stop.max_evaluations) {
            trace.stop_reason = StopReason::max_evaluations;
            break;
        }
        pop = step_generation(pop, space, config, obj, rng);
        best.offer(pop);
        after_step(pop, best);
        trace.records.push_back(detail::make_record(pop, used()));

        if (stop.stagnation_window && trace.records.size() > *stop.stagnation_window) {
            const auto& now = trace.records.back();
            const auto& then = trace.records[trace.records.size() - 1 - *stop.stagnation_window];
            if (now.best_fitness - then.best_fitness < stop.stagnation_epsilon) {
                trace.stop_reason = StopReason::stagnation;
                break;
            }
        }
    }

    trace.best = best.best;
    trace.final_population = std::move(pop);
    trace.evaluations = used();
    trace.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return trace;
}

inline RunTrace run_ga(Objective& obj, const SearchSpace& space, const GaConfig& config) {
    return evolve(obj, space, config);
}

}  // namespace evoscheme
