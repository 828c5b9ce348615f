#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

#include "evoscheme/core.hpp"

namespace evoscheme {

// ---------------------------------------------------------------------------
// Parameters

struct VariationConfig {
    double pc = 0.9;
    double pm = 0.1;
    double sigma_rel = 0.1;
    double gamma = 0.99;

    void validate() const {
        if (!(pc >= 0.0 && pc <= 1.0)) throw InvariantError("pc must lie in [0, 1]");
        if (!(pm >= 0.0 && pm <= 1.0)) throw InvariantError("pm must lie in [0, 1]");
        if (!(sigma_rel > 0.0) || !std::isfinite(sigma_rel)) throw InvariantError("sigma_rel must be positive");
        if (!(gamma > 0.0 && gamma <= 1.0)) throw InvariantError("gamma must lie in (0, 1]");
    }
};

/// Convex (by default) mixing weights, one per parent.
class RecombinationWeights {
public:
    explicit RecombinationWeights(std::vector<double> w, bool require_convex = true) : w_(std::move(w)) {
        if (w_.empty()) throw InvariantError("recombination weights are empty");
        const double sum = std::accumulate(w_.begin(), w_.end(), 0.0);
        if (!(std::abs(sum - 1.0) <= 1e-12)) throw InvariantError("recombination weights must sum to 1");
        if (require_convex)
            for (double a : w_)
                if (!(a >= 0.0 && a <= 1.0)) throw InvariantError("convex recombination weights must lie in [0, 1]");
    }

    /// The two-parent form alpha, 1 - alpha.
    static RecombinationWeights pair(double alpha) { return RecombinationWeights({alpha, 1.0 - alpha}); }

    std::size_t size() const noexcept { return w_.size(); }
    bool convex() const noexcept {
        return std::all_of(w_.begin(), w_.end(), [](double a) { return a >= 0.0 && a <= 1.0; });
    }
    double operator[](std::size_t i) const { return w_[i]; }
    std::span<const double> values() const noexcept { return w_; }

private:
    std::vector<double> w_;
};

// ---------------------------------------------------------------------------
// Binary encoding

/// Maps b-bit slices (most significant bit first) linearly onto each
/// coordinate interval: integer 0 to the lower bound, 2^b - 1 to the upper.
class BinaryCodec {
public:
    BinaryCodec(SearchSpace space, std::size_t bits_per_variable) : space_(std::move(space)), bits_(bits_per_variable) {
        if (bits_ < 1 || bits_ > 52) throw InvariantError("bits_per_variable must lie in [1, 52]");
    }

    std::size_t bits_per_variable() const noexcept { return bits_; }
    std::size_t length() const noexcept { return bits_ * space_.dimension(); }
    const SearchSpace& space() const noexcept { return space_; }
    std::uint64_t max_level() const noexcept { return (std::uint64_t{1} << bits_) - 1; }

    Point decode(const BinaryGenotype& g) const {
        if (g.bits.size() != length())
            throw DimensionError("decode_binary: expected " + std::to_string(length()) + " bits, got " +
                                 std::to_string(g.bits.size()));
        Point x(space_.dimension());
        for (std::size_t i = 0; i < x.size(); ++i) {
            std::uint64_t level = 0;
            for (std::size_t k = 0; k < bits_; ++k) level = (level << 1) | (g.bits[i * bits_ + k] & 1u);
            x[i] = level_to_value(i, level);
        }
        return x;
    }

    /// Nearest representable genotype for x (coordinates are clamped first).
    BinaryGenotype encode(std::span<const double> x) const {
        check_dimension(x, space_.dimension(), "encode_binary");
        BinaryGenotype g;
        g.bits.resize(length());
        const auto top = static_cast<double>(max_level());
        for (std::size_t i = 0; i < x.size(); ++i) {
            const auto& b = space_[i];
            const double t = (std::clamp(x[i], b.lower, b.upper) - b.lower) / b.width();
            const auto level = static_cast<std::uint64_t>(std::clamp(std::round(t * top), 0.0, top));
            for (std::size_t k = 0; k < bits_; ++k)
                g.bits[i * bits_ + k] = static_cast<std::uint8_t>((level >> (bits_ - 1 - k)) & 1u);
        }
        return g;
    }

    double level_to_value(std::size_t i, std::uint64_t level) const {
        const auto& b = space_[i];
        if (level >= max_level()) return b.upper;
        const double v = b.lower + (b.width() * static_cast<double>(level)) / static_cast<double>(max_level());
        return std::clamp(v, b.lower, b.upper);
    }

private:
    SearchSpace space_;
    std::size_t bits_;
};

inline Point decode_binary(const BinaryGenotype& g, const BinaryCodec& codec) { return codec.decode(g); }

inline BinaryGenotype random_bits(std::size_t m, RngStream& rng) {
    BinaryGenotype g;
    g.bits.resize(m);
    for (auto& b : g.bits) b = static_cast<std::uint8_t>(rng.next_u64() >> 63);
    return g;
}

// ---------------------------------------------------------------------------
// Binary variation

inline BinaryGenotype bitflip_mutate(BinaryGenotype g, double pm, RngStream& rng) {
    for (auto& b : g.bits)
        if (rng.bernoulli(pm)) b ^= 1u;
    return g;
}

/// Children swap suffixes at `cut` (1 <= cut <= m - 1).
inline std::pair<BinaryGenotype, BinaryGenotype> one_point_crossover_at(const BinaryGenotype& a,
                                                                        const BinaryGenotype& b, std::size_t cut) {
    if (a.bits.size() != b.bits.size()) throw DimensionError("one_point_crossover: parent lengths differ");
    const std::size_t m = a.bits.size();
    if (m < 2) throw InvariantError("one_point_crossover: genotype needs at least 2 bits");
    if (cut < 1 || cut > m - 1) throw InvariantError("one_point_crossover: cut point out of range");
    BinaryGenotype c1 = a, c2 = b;
    std::copy(b.bits.begin() + static_cast<std::ptrdiff_t>(cut), b.bits.end(),
              c1.bits.begin() + static_cast<std::ptrdiff_t>(cut));
    std::copy(a.bits.begin() + static_cast<std::ptrdiff_t>(cut), a.bits.end(),
              c2.bits.begin() + static_cast<std::ptrdiff_t>(cut));
    return {std::move(c1), std::move(c2)};
}

inline std::pair<BinaryGenotype, BinaryGenotype> one_point_crossover(const BinaryGenotype& a, const BinaryGenotype& b,
                                                                     RngStream& rng) {
    if (a.bits.size() != b.bits.size()) throw DimensionError("one_point_crossover: parent lengths differ");
    if (a.bits.size() < 2) throw InvariantError("one_point_crossover: genotype needs at least 2 bits");
    const std::size_t cut = 1 + static_cast<std::size_t>(rng.index(a.bits.size() - 1));
    return one_point_crossover_at(a, b, cut);
}

// ---------------------------------------------------------------------------
// Real variation

/// child_i = sum_j w_j * parent_j,i
inline RealGenotype intermediate_recombine(std::span<const RealGenotype> parents, const RecombinationWeights& w) {
    if (parents.size() < 2) throw InvariantError("intermediate_recombine: need at least two parents");
    if (w.size() != parents.size()) throw DimensionError("intermediate_recombine: one weight per parent required");
    const std::size_t n = parents.front().values.size();
    for (const auto& p : parents)
        if (p.values.size() != n) throw DimensionError("intermediate_recombine: parent lengths differ");
    RealGenotype child{Point(n, 0.0)};
    for (std::size_t i = 0; i < n; ++i) {
        double v = 0.0;
        double lo = parents.front().values[i], hi = lo;
        for (std::size_t j = 0; j < parents.size(); ++j) {
            v += w[j] * parents[j].values[i];
            lo = std::min(lo, parents[j].values[i]);
            hi = std::max(hi, parents[j].values[i]);
        }
        // Rounding in the weighted sum can step one ulp outside the hull.
        child.values[i] = w.convex() ? std::clamp(v, lo, hi) : v;
    }
    return child;
}

/// x_i + sigma_rel * (upper_i - lower_i) * N(0, 1) on each coordinate picked
/// with probability pm, then clamped to the box.
inline RealGenotype gaussian_mutate(RealGenotype x, double sigma_rel, double pm, const SearchSpace& space,
                                    RngStream& rng) {
    check_dimension(x.values, space.dimension(), "gaussian_mutate");
    if (!(sigma_rel > 0.0)) throw InvariantError("gaussian_mutate: sigma_rel must be positive");
    if (!(pm >= 0.0 && pm <= 1.0)) throw InvariantError("gaussian_mutate: pm must lie in [0, 1]");
    for (std::size_t i = 0; i < x.values.size(); ++i) {
        if (!rng.bernoulli(pm)) continue;
        x.values[i] += sigma_rel * space[i].width() * rng.normal();
    }
    x.values = clamp_to_bounds(std::move(x.values), space);
    return x;
}

/// Geometric decay of the mutation scale: sigma_rel0 * gamma^t.
inline double sigma_at_generation(double sigma_rel0, double gamma, std::size_t t) {
    if (!(gamma > 0.0 && gamma <= 1.0)) throw InvariantError("gamma must lie in (0, 1]");
    return sigma_rel0 * std::pow(gamma, static_cast<double>(t));
}

}  // namespace evoscheme
