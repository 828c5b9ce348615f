#include <cmath>
#include <limits>
#include <stdexcept>

#include <gtest/gtest.h>

#include "evoscheme/core.hpp"

using namespace evoscheme;

namespace {

Objective sphere(std::size_t n) {
    return Objective(n, [](std::span<const double> x) {
        double s = 0.0;
        for (double v : x) s += v * v;
        return -s;
    });
}

Population with_fitness(std::initializer_list<double> values) {
    Population pop;
    for (double f : values) {
        auto ind = Individual::real({0.0});
        ind.fitness = f;
        pop.members.push_back(ind);
    }
    return pop;
}

}  // namespace

TEST(Evaluate, SphereValues) {
    auto obj = sphere(2);
    EXPECT_EQ(evaluate(obj, Point{0.0, 0.0}), 0.0);
    EXPECT_EQ(evaluate(obj, Point{1.0, 2.0}), -5.0);
}

TEST(Evaluate, CounterIncrementsPerCall) {
    auto obj = sphere(2);
    const auto c = obj.evaluations();
    evaluate(obj, Point{0.3, 0.1});
    evaluate(obj, Point{0.3, 0.1});
    EXPECT_EQ(obj.evaluations(), c + 2);
}

TEST(Evaluate, NonFiniteIsAnErrorCarryingThePoint) {
    Objective obj(2, [](std::span<const double> x) { return x[0] > 0 ? std::numeric_limits<double>::quiet_NaN() : 1.0; });
    try {
        evaluate(obj, Point{0.5, -1.0});
        FAIL() << "expected EvaluationError";
    } catch (const EvaluationError& e) {
        EXPECT_EQ(e.point, (Point{0.5, -1.0}));
    }
    Objective inf(1, [](std::span<const double>) { return std::numeric_limits<double>::infinity(); });
    EXPECT_THROW(evaluate(inf, Point{0.0}), EvaluationError);
}

TEST(Evaluate, DimensionMismatch) {
    auto obj = sphere(3);
    EXPECT_THROW(evaluate(obj, Point{1.0, 2.0}), DimensionError);
}

TEST(SearchSpace, RejectsInvalidBounds) {
    EXPECT_THROW(SearchSpace({}), InvariantError);
    EXPECT_THROW(SearchSpace({{1.0, 1.0}}), InvariantError);
    EXPECT_THROW(SearchSpace({{2.0, 1.0}}), InvariantError);
    EXPECT_THROW(SearchSpace({{0.0, std::numeric_limits<double>::infinity()}}), InvariantError);
    EXPECT_NO_THROW(SearchSpace({{-1.0, 1.0}, {0.0, 5.0}}));
}

TEST(RandomPoint, StaysInBounds) {
    const auto space = SearchSpace::cube(2, 0.0, 1.0);
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        RngStream rng(seed);
        EXPECT_TRUE(space.contains(random_point(space, rng)));
    }
}

TEST(RandomPoint, DegenerateWidth) {
    const double eps = 1e-12;
    const SearchSpace space({{5.0, 5.0 + eps}, {5.0, 5.0 + eps}});
    RngStream rng(3);
    for (int k = 0; k < 100; ++k) {
        const auto x = random_point(space, rng);
        for (double v : x) EXPECT_NEAR(v, 5.0, eps);
    }
}

TEST(RandomPoint, UniformMean) {
    const auto space = SearchSpace::cube(1, 0.0, 1.0);
    RngStream rng(11);
    double sum = 0.0;
    const int draws = 100000;
    for (int k = 0; k < draws; ++k) sum += random_point(space, rng)[0];
    EXPECT_NEAR(sum / draws, 0.5, 0.01);
}

TEST(Clamp, IdentityInside) {
    const auto space = SearchSpace::cube(2, 0.0, 1.0);
    EXPECT_EQ(clamp_to_bounds({0.25, 0.75}, space), (Point{0.25, 0.75}));
}

TEST(Clamp, ProjectsToNearestBound) {
    const auto space = SearchSpace::cube(1, 0.0, 1.0);
    EXPECT_EQ(clamp_to_bounds({2.0}, space), Point{1.0});
    EXPECT_EQ(clamp_to_bounds({-3.0}, space), Point{0.0});
    EXPECT_THROW(clamp_to_bounds({1.0, 2.0}, space), DimensionError);
}

TEST(Clamp, Idempotent) {
    const auto space = SearchSpace({{-1.0, 1.0}, {10.0, 20.0}, {0.0, 1e-3}});
    RngStream rng(5);
    for (int k = 0; k < 1000; ++k) {
        Point x{rng.uniform(-5, 5), rng.uniform(0, 30), rng.uniform(-1, 1)};
        const auto once = clamp_to_bounds(x, space);
        EXPECT_EQ(clamp_to_bounds(once, space), once);
        EXPECT_TRUE(space.contains(once));
    }
}

TEST(PopulationStats, Singleton) {
    const auto s = population_stats(with_fitness({3.0}));
    EXPECT_EQ(s.best, 3.0);
    EXPECT_EQ(s.mean, 3.0);
    EXPECT_EQ(s.std, 0.0);
}

TEST(PopulationStats, PopulationDivisor) {
    const auto s = population_stats(with_fitness({0.0, 2.0}));
    EXPECT_EQ(s.best, 2.0);
    EXPECT_EQ(s.mean, 1.0);
    EXPECT_EQ(s.std, 1.0);
}

TEST(PopulationStats, ConstantIsExact) {
    for (double c : {0.1, -7.3, 1e10, 3.0}) {
        const auto s = population_stats(with_fitness({c, c, c, c, c, c, c}));
        EXPECT_EQ(s.best, c);
        EXPECT_EQ(s.mean, c);
        EXPECT_EQ(s.std, 0.0);
    }
}

TEST(PopulationStats, UnevaluatedIsAnError) {
    auto pop = with_fitness({1.0});
    pop.members.push_back(Individual::real({0.0}));
    EXPECT_THROW(population_stats(pop), InvariantError);
}

TEST(RngStream, SameSeedSameSequence) {
    RngStream a(99), b(99);
    for (int k = 0; k < 1000; ++k) {
        ASSERT_EQ(a.next_u64(), b.next_u64());
        ASSERT_EQ(a.normal(), b.normal());
        ASSERT_EQ(a.index(7), b.index(7));
    }
}

TEST(RngStream, Mt19937_64ReferenceValue) {
    // The standard fixes the 10000th output of a default-seeded mt19937_64.
    std::mt19937_64 ref;
    ref.discard(9999);
    RngStream rng(5489);
    for (int k = 0; k < 9999; ++k) rng.next_u64();
    EXPECT_EQ(rng.next_u64(), 9981545732273789042ULL);
    EXPECT_EQ(ref(), 9981545732273789042ULL);
}

TEST(RngStream, NormalMoments) {
    RngStream rng(1);
    double s = 0.0, s2 = 0.0;
    const int n = 200000;
    for (int k = 0; k < n; ++k) {
        const double z = rng.normal();
        s += z;
        s2 += z * z;
    }
    EXPECT_NEAR(s / n, 0.0, 0.01);
    EXPECT_NEAR(s2 / n, 1.0, 0.02);
}

TEST(RngStream, IndexCoversRange) {
    RngStream rng(2);
    std::vector<int> hits(5, 0);
    for (int k = 0; k < 5000; ++k) ++hits[rng.index(5)];
    for (int h : hits) EXPECT_GT(h, 800);
}

TEST(ParallelFor, MatchesSequentialAndRethrowsLowestIndex) {
    std::vector<int> out(100, 0);
    parallel_for(out.size(), 4, [&](std::size_t i) { out[i] = static_cast<int>(i * i); });
    for (std::size_t i = 0; i < out.size(); ++i) EXPECT_EQ(out[i], static_cast<int>(i * i));

    try {
        parallel_for(50, 4, [](std::size_t i) {
            if (i == 7 || i == 30) throw std::runtime_error(std::to_string(i));
        });
        FAIL();
    } catch (const std::runtime_error& e) {
        EXPECT_STREQ(e.what(), "7");
    }
}
