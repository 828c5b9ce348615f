#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <vector>

#include "evoscheme/core.hpp"
#include "evoscheme/engine.hpp"

namespace evoscheme {

// ---------------------------------------------------------------------------
// Latin hypercube sampling

struct LhsDesign {
    /// points[k] is sample k.
    std::vector<Point> points;
    /// strata[d][k] is the stratum index of sample k along dimension d.
    std::vector<std::vector<std::size_t>> strata;

    std::size_t size() const noexcept { return points.size(); }
};

/// Index of the equal-width stratum (out of n) containing x in [lo, hi].
inline std::size_t stratum_of(double x, double lo, double hi, std::size_t n) {
    const double w = (hi - lo) / static_cast<double>(n);
    const double k = std::floor((x - lo) / w);
    return static_cast<std::size_t>(std::clamp(k, 0.0, static_cast<double>(n - 1)));
}

/// One uniform draw inside each of N strata per dimension, strata randomly
/// permuted across dimensions.
inline LhsDesign lhs_sample(const SearchSpace& space, std::size_t n, RngStream& rng) {
    if (n < 1) throw InvariantError("lhs_sample: sample count must be positive");
    const std::size_t dim = space.dimension();
    LhsDesign d;
    d.points.assign(n, Point(dim));
    d.strata.assign(dim, std::vector<std::size_t>(n));
    for (std::size_t i = 0; i < dim; ++i) {
        auto& perm = d.strata[i];
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        for (std::size_t k = n; k > 1; --k) std::swap(perm[k - 1], perm[static_cast<std::size_t>(rng.index(k))]);
        const double lo = space[i].lower, hi = space[i].upper;
        const double w = (hi - lo) / static_cast<double>(n);
        for (std::size_t k = 0; k < n; ++k) {
            const std::size_t s = perm[k];
            double x = lo + (static_cast<double>(s) + rng.uniform01()) * w;
            x = std::clamp(x, lo, hi);
            // Rounding may land a draw on the neighbouring stratum's edge.
            while (stratum_of(x, lo, hi, n) > s) x = std::nextafter(x, lo);
            while (stratum_of(x, lo, hi, n) < s) x = std::nextafter(x, hi);
            d.points[k][i] = x;
        }
    }
    return d;
}

inline std::vector<double> evaluate_points(Objective& obj, const std::vector<Point>& points, std::size_t workers = 1) {
    std::vector<double> f(points.size());
    parallel_for(points.size(), workers, [&](std::size_t k) { f[k] = obj(points[k]); });
    return f;
}

// ---------------------------------------------------------------------------
// Two-variable slices

struct SliceGrid {
    Point base;
    std::size_t i = 0, j = 0;
    std::size_t resolution = 0;
    std::vector<double> xi, xj;
    /// Row-major: fitness[a * resolution + b] is f at (xi[a], xj[b]).
    std::vector<double> fitness;

    double at(std::size_t a, std::size_t b) const { return fitness[a * resolution + b]; }
};

inline std::vector<double> lattice(const Interval& b, std::size_t r) {
    std::vector<double> v(r);
    for (std::size_t k = 0; k < r; ++k)
        v[k] = b.lower + (b.width() * static_cast<double>(k)) / static_cast<double>(r - 1);
    v.back() = b.upper;
    return v;
}

/// Evaluates f on an r x r lattice over dimensions i and j (endpoints
/// included), all other coordinates frozen at `base`.
inline SliceGrid slice_grid(Objective& obj, const SearchSpace& space, const Point& base, std::size_t i, std::size_t j,
                            std::size_t r, std::size_t workers = 1) {
    check_dimension(base, space.dimension(), "slice_grid");
    if (i >= space.dimension() || j >= space.dimension()) throw InvariantError("slice_grid: dimension index out of range");
    if (i == j) throw InvariantError("slice_grid: the two free dimensions must differ");
    if (r < 2) throw InvariantError("slice_grid: resolution must be at least 2");
    if (!space.contains(base)) throw InvariantError("slice_grid: base point outside the search space");
    SliceGrid g{base, i, j, r, lattice(space[i], r), lattice(space[j], r), std::vector<double>(r * r)};
    parallel_for(r * r, workers, [&](std::size_t k) {
        Point x = base;
        x[i] = g.xi[k / r];
        x[j] = g.xj[k % r];
        g.fitness[k] = obj(x);
    });
    return g;
}

// ---------------------------------------------------------------------------
// Additive separability

struct PairResidual {
    std::size_t i, j;
    double residual;
    bool separable;
};

struct SeparabilityReport {
    std::vector<PairResidual> pairs;
    double tolerance = 0.0;
    bool separable = true;
};

/// Pairwise second mixed difference test. For each pair (i, j) and trial,
/// with a random base z and values a, b per coordinate:
///   R = |f(z[i<-a_i, j<-a_j]) + f(z[i<-b_i, j<-b_j]) - f(z[i<-a_i, j<-b_j]) - f(z[i<-b_i, j<-a_j])|
/// which vanishes whenever f is a sum of per-coordinate terms. Without an
/// explicit tolerance, 1e-6 * (max |f| sampled + 1) is used.
inline SeparabilityReport separability_probe(Objective& obj, const SearchSpace& space, std::size_t trials,
                                             std::optional<double> tol, RngStream& rng) {
    if (trials < 1) throw InvariantError("separability_probe: trials must be positive");
    if (tol && !(*tol > 0.0)) throw InvariantError("separability_probe: tolerance must be positive");
    const std::size_t n = space.dimension();
    SeparabilityReport rep;
    double max_abs = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            double worst = 0.0;
            for (std::size_t t = 0; t < trials; ++t) {
                const Point z = random_point(space, rng);
                const double ai = rng.uniform(space[i].lower, space[i].upper);
                const double bi = rng.uniform(space[i].lower, space[i].upper);
                const double aj = rng.uniform(space[j].lower, space[j].upper);
                const double bj = rng.uniform(space[j].lower, space[j].upper);
                auto at = [&](double vi, double vj) {
                    Point x = z;
                    x[i] = vi;
                    x[j] = vj;
                    const double f = obj(x);
                    max_abs = std::max(max_abs, std::abs(f));
                    return f;
                };
                const double r = std::abs(at(ai, aj) + at(bi, bj) - at(ai, bj) - at(bi, aj));
                worst = std::max(worst, r);
            }
            rep.pairs.push_back({i, j, worst, true});
        }
    }
    rep.tolerance = tol ? *tol : 1e-6 * (max_abs + 1.0);
    for (auto& p : rep.pairs) {
        p.separable = p.residual <= rep.tolerance;
        rep.separable = rep.separable && p.separable;
    }
    return rep;
}

// ---------------------------------------------------------------------------
// GA as a landscape scanner

/// Sorts by fitness (best first, ties by index) and keeps an individual only
/// if it lies farther than `radius` from every individual already kept.
inline std::vector<Individual> dedup_ranked(const Population& pop, double radius) {
    std::vector<Individual> kept;
    for (std::size_t idx : ranked_indices(pop)) {
        const auto& cand = pop.members[idx];
        const bool twin = std::any_of(kept.begin(), kept.end(), [&](const Individual& k) {
            double d2 = 0.0;
            for (std::size_t c = 0; c < cand.phenotype.size(); ++c) {
                const double d = cand.phenotype[c] - k.phenotype[c];
                d2 += d * d;
            }
            return std::sqrt(d2) <= radius;
        });
        if (!twin) kept.push_back(cand);
    }
    return kept;
}

/// Runs the GA and returns its final population, deduplicated and ranked.
/// The default radius is 1e-6 times the box diagonal.
inline std::vector<Individual> ga_scan(Objective& obj, const SearchSpace& space, const GaConfig& config,
                                       std::optional<double> dedup_radius = std::nullopt) {
    const double radius = dedup_radius ? *dedup_radius : 1e-6 * space.diagonal();
    if (!(radius >= 0.0)) throw InvariantError("ga_scan: dedup radius must be non-negative");
    const RunTrace trace = run_ga(obj, space, config);
    return dedup_ranked(trace.final_population, radius);
}

}  // namespace evoscheme
