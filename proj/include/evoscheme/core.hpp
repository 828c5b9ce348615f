#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <variant>
#include <vector>

#include "evoscheme/rng.hpp"

namespace evoscheme {

using Point = std::vector<double>;

// ---------------------------------------------------------------------------
// Errors

/// Argument sizes disagree with the problem dimension.
struct DimensionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// A configuration or argument violates a documented invariant.
struct InvariantError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// The objective returned a non-finite value (or failed) at `point`.
struct EvaluationError : std::runtime_error {
    EvaluationError(const std::string& what, Point at)
        : std::runtime_error(what), point(std::move(at)) {}
    Point point;
};

namespace detail {
inline std::string format_point(std::span<const double> x) {
    std::ostringstream os;
    os.precision(17);
    os << '(';
    for (std::size_t i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x[i];
    os << ')';
    return os.str();
}
}  // namespace detail

// ---------------------------------------------------------------------------
// Search space

struct Interval {
    double lower;
    double upper;
    double width() const noexcept { return upper - lower; }
};

/// Box-bounded continuous domain.
class SearchSpace {
public:
    explicit SearchSpace(std::vector<Interval> bounds) : bounds_(std::move(bounds)) {
        if (bounds_.empty()) throw InvariantError("search space needs at least one dimension");
        for (std::size_t i = 0; i < bounds_.size(); ++i) {
            const auto& b = bounds_[i];
            if (!std::isfinite(b.lower) || !std::isfinite(b.upper))
                throw InvariantError("bounds of dimension " + std::to_string(i) + " must be finite");
            if (!(b.lower < b.upper))
                throw InvariantError("dimension " + std::to_string(i) + ": lower bound must be below upper bound");
        }
    }

    /// Same interval in every dimension.
    static SearchSpace cube(std::size_t n, double lower, double upper) {
        return SearchSpace(std::vector<Interval>(n, Interval{lower, upper}));
    }

    std::size_t dimension() const noexcept { return bounds_.size(); }
    const Interval& operator[](std::size_t i) const { return bounds_[i]; }
    const std::vector<Interval>& bounds() const noexcept { return bounds_; }

    bool contains(std::span<const double> x) const noexcept {
        if (x.size() != bounds_.size()) return false;
        for (std::size_t i = 0; i < x.size(); ++i)
            if (!(x[i] >= bounds_[i].lower && x[i] <= bounds_[i].upper)) return false;
        return true;
    }

    double diagonal() const noexcept {
        double s = 0.0;
        for (const auto& b : bounds_) s += b.width() * b.width();
        return std::sqrt(s);
    }

    bool operator==(const SearchSpace& other) const noexcept {
        if (bounds_.size() != other.bounds_.size()) return false;
        for (std::size_t i = 0; i < bounds_.size(); ++i)
            if (bounds_[i].lower != other.bounds_[i].lower || bounds_[i].upper != other.bounds_[i].upper)
                return false;
        return true;
    }

private:
    std::vector<Interval> bounds_;
};

inline void check_dimension(std::span<const double> x, std::size_t n, const char* what) {
    if (x.size() != n)
        throw DimensionError(std::string(what) + ": expected dimension " + std::to_string(n) + ", got " +
                             std::to_string(x.size()));
}

// ---------------------------------------------------------------------------
// Objective

struct KnownOptimum {
    double value;
    Point location;
};

/// Fitness function in the maximization sense, with an evaluation counter.
///
/// The counter is atomic so that a batch of evaluations may be spread over
/// worker threads; the wrapped callable must then be safe to call
/// concurrently.
class Objective {
public:
    using Function = std::function<double(std::span<const double>)>;

    Objective(std::size_t dimension, Function fn, std::optional<KnownOptimum> optimum = std::nullopt)
        : dimension_(dimension), fn_(std::move(fn)), optimum_(std::move(optimum)) {
        if (dimension_ == 0) throw InvariantError("objective dimension must be positive");
        if (!fn_) throw InvariantError("objective callback is empty");
    }

    Objective(const Objective& o)
        : dimension_(o.dimension_), fn_(o.fn_), optimum_(o.optimum_), count_(o.count_.load()) {}
    Objective& operator=(const Objective&) = delete;

    std::size_t dimension() const noexcept { return dimension_; }
    std::uint64_t evaluations() const noexcept { return count_.load(std::memory_order_relaxed); }
    const std::optional<KnownOptimum>& known_optimum() const noexcept { return optimum_; }

    double operator()(std::span<const double> x) {
        check_dimension(x, dimension_, "evaluate");
        count_.fetch_add(1, std::memory_order_relaxed);
        double f;
        try {
            f = fn_(x);
        } catch (const EvaluationError&) {
            throw;
        } catch (const std::exception& e) {
            throw EvaluationError(std::string("objective failed at ") + detail::format_point(x) + ": " + e.what(),
                                  Point(x.begin(), x.end()));
        }
        if (!std::isfinite(f))
            throw EvaluationError("objective returned a non-finite value at " + detail::format_point(x),
                                  Point(x.begin(), x.end()));
        return f;
    }

private:
    std::size_t dimension_;
    Function fn_;
    std::optional<KnownOptimum> optimum_;
    std::atomic<std::uint64_t> count_{0};
};

inline double evaluate(Objective& obj, std::span<const double> x) { return obj(x); }

// ---------------------------------------------------------------------------
// Individuals and populations

/// Bit string; one byte per gene holding 0 or 1.
struct BinaryGenotype {
    std::vector<std::uint8_t> bits;
    bool operator==(const BinaryGenotype&) const = default;
};

struct RealGenotype {
    Point values;
    bool operator==(const RealGenotype&) const = default;
};

using Genotype = std::variant<BinaryGenotype, RealGenotype>;

struct Individual {
    Genotype genotype;
    Point phenotype;
    std::optional<double> fitness;
    /// Set when `fitness` was inherited from a local search (Baldwinian
    /// learning) rather than measured at `phenotype`.
    bool acquired_fitness = false;

    static Individual real(Point x) {
        Individual ind;
        ind.genotype = RealGenotype{x};
        ind.phenotype = std::move(x);
        return ind;
    }

    bool is_binary() const noexcept { return std::holds_alternative<BinaryGenotype>(genotype); }

    double fitness_or_throw() const {
        if (!fitness) throw InvariantError("individual has not been evaluated");
        return *fitness;
    }
};

struct Population {
    std::vector<Individual> members;
    std::size_t generation = 0;

    std::size_t size() const noexcept { return members.size(); }
};

// ---------------------------------------------------------------------------
// Sampling and repair

inline Point random_point(const SearchSpace& space, RngStream& rng) {
    Point x(space.dimension());
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = rng.uniform(space[i].lower, space[i].upper);
    return x;
}

inline Point clamp_to_bounds(Point x, const SearchSpace& space) {
    check_dimension(x, space.dimension(), "clamp_to_bounds");
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::clamp(x[i], space[i].lower, space[i].upper);
    return x;
}

// ---------------------------------------------------------------------------
// Statistics

struct PopulationStats {
    double best;
    double mean;
    double std;
};

/// Best, mean and population standard deviation (divisor N) of the stored
/// fitness values. Welford's update keeps a constant population exact.
inline PopulationStats population_stats(const Population& pop) {
    if (pop.members.empty()) throw InvariantError("population_stats: empty population");
    double best = -std::numeric_limits<double>::infinity();
    double mean = 0.0, m2 = 0.0;
    std::size_t k = 0;
    for (const auto& ind : pop.members) {
        const double f = ind.fitness_or_throw();
        best = std::max(best, f);
        ++k;
        const double delta = f - mean;
        mean += delta / static_cast<double>(k);
        m2 += delta * (f - mean);
    }
    return {best, mean, std::sqrt(std::max(0.0, m2 / static_cast<double>(k)))};
}

struct GenerationRecord {
    std::size_t generation;
    double best_fitness;
    double mean_fitness;
    double std_fitness;
    std::uint64_t cumulative_evaluations;
    bool operator==(const GenerationRecord&) const = default;
};

enum class StopReason { max_generations, max_evaluations, stagnation };

inline const char* to_string(StopReason r) {
    switch (r) {
        case StopReason::max_generations: return "max_generations";
        case StopReason::max_evaluations: return "max_evaluations";
        case StopReason::stagnation: return "stagnation";
    }
    return "unknown";
}

struct RunTrace {
    std::vector<GenerationRecord> records;
    /// Best point actually evaluated during the run.
    Individual best;
    Population final_population;
    /// Objective evaluations consumed by the run, local searches included.
    std::uint64_t evaluations = 0;
    std::uint64_t local_search_evaluations = 0;
    std::uint64_t seed = 0;
    StopReason stop_reason = StopReason::max_generations;
    double wall_seconds = 0.0;

    std::size_t generations() const noexcept { return records.empty() ? 0 : records.size() - 1; }
};

// ---------------------------------------------------------------------------
// Parallel helper

/// Runs body(i) for i in [0, n) on up to `workers` threads. Each index is
/// handled exactly once; if several indices throw, the exception of the lowest
/// index is rethrown so failures match a sequential run.
template <class Body>
void parallel_for(std::size_t n, std::size_t workers, Body&& body) {
    if (workers <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    workers = std::min(workers, n);
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
                try {
                    body(i);
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            }
        });
    }
    pool.clear();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

/// Evaluates every individual lacking a fitness value.
inline void evaluate_pending(Objective& obj, std::vector<Individual>& members, std::size_t workers = 1) {
    std::vector<std::size_t> pending;
    for (std::size_t i = 0; i < members.size(); ++i)
        if (!members[i].fitness) pending.push_back(i);
    std::vector<double> values(pending.size());
    parallel_for(pending.size(), workers, [&](std::size_t k) { values[k] = obj(members[pending[k]].phenotype); });
    for (std::size_t k = 0; k < pending.size(); ++k) {
        members[pending[k]].fitness = values[k];
        members[pending[k]].acquired_fitness = false;
    }
}

}  // namespace evoscheme
