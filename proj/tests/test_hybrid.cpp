#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "evoscheme/harness.hpp"
#include "evoscheme/hybrid.hpp"

using namespace evoscheme;

namespace {

Individual evaluated(Point x, double f) {
    auto ind = Individual::real(std::move(x));
    ind.fitness = f;
    return ind;
}

}  // namespace

TEST(SaAcceptProb, Examples) {
    EXPECT_EQ(sa_accept_prob(0.0, 1.0), 1.0);
    EXPECT_EQ(sa_accept_prob(0.0, 1e-9), 1.0);
    EXPECT_NEAR(sa_accept_prob(-1.0, 1.0), 0.36787944117144233, 1e-15);
    EXPECT_EQ(sa_accept_prob(5.0, 0.01), 1.0);
    EXPECT_THROW(sa_accept_prob(-1.0, 0.0), InvariantError);
    EXPECT_THROW(sa_accept_prob(-1.0, -2.0), InvariantError);
}

TEST(SaAcceptProb, Monotonicity) {
    RngStream rng(1);
    for (int k = 0; k < 2000; ++k) {
        const double d1 = -rng.uniform(0.0, 10.0), d2 = -rng.uniform(0.0, 10.0);
        const double t1 = rng.uniform(0.01, 5.0), t2 = rng.uniform(0.01, 5.0);
        const double p = sa_accept_prob(d1, t1);
        EXPECT_GT(p, 0.0);
        EXPECT_LE(p, 1.0);
        if (d1 < d2) {
            EXPECT_LE(p, sa_accept_prob(d2, t1));
        }
        if (t1 < t2) {
            EXPECT_LE(p, sa_accept_prob(d1, t2));
        }
    }
    EXPECT_LT(sa_accept_prob(-1.0, 1.0), sa_accept_prob(-0.5, 1.0));
    EXPECT_LT(sa_accept_prob(-1.0, 1.0), sa_accept_prob(-1.0, 2.0));
}

TEST(SaAcceptProb, EmpiricalFrequency) {
    RngStream rng(42);
    const int trials = 100000;
    for (auto [delta, t] : {std::pair{-1.0, 1.0}, std::pair{-0.3, 2.0}, std::pair{-4.0, 1.5}}) {
        const double p = sa_accept_prob(delta, t);
        int hits = 0;
        for (int k = 0; k < trials; ++k) hits += rng.uniform01() < p;
        EXPECT_NEAR(static_cast<double>(hits) / trials, p, 5 * std::sqrt(p * (1 - p) / trials));
    }
}

TEST(Temperature, GeometricCooling) {
    Temperature t(1.0, 0.9);
    for (int k = 0; k < 3; ++k) t.cool();
    EXPECT_EQ(t.cooling_events(), 3u);
    EXPECT_NEAR(t.value(), 0.729, 1e-15);
    Temperature u(2.5, 0.5);
    for (int k = 0; k < 10; ++k) u.cool();
    EXPECT_EQ(u.value(), 2.5 / 1024.0);
    EXPECT_THROW(Temperature(0.0, 0.5), InvariantError);
    EXPECT_THROW(Temperature(1.0, 1.0), InvariantError);
}

TEST(SaLocalSearch, ZeroSteps) {
    const auto space = SearchSpace::cube(2, -5, 5);
    Objective obj(2, bench::sphere);
    SaSchedule s;
    s.total_steps = 0;
    RngStream rng(1);
    const auto r = sa_local_search({1.0, 1.0}, obj, space, s, rng);
    EXPECT_EQ(r.x, (Point{1.0, 1.0}));
    EXPECT_EQ(r.fitness, -2.0);
    EXPECT_EQ(r.evaluations, 1u);
}

TEST(SaLocalSearch, FrozenTemperatureOnlyImproves) {
    const auto space = SearchSpace::cube(3, -5, 5);
    Objective obj(3, bench::rastrigin);
    SaSchedule s;
    s.t0 = 1e-12;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        RngStream rng(seed);
        double prev = -1e300;
        sa_local_search({1.2, -0.7, 3.1}, obj, space, s, rng, [&](const SaStep& st) {
            EXPECT_GE(st.current_fitness, prev);
            prev = st.current_fitness;
        });
    }
}

TEST(SaLocalSearch, NeverWorseThanStart) {
    const auto space = SearchSpace::cube(2, -5, 5);
    SaSchedule s;
    s.t0 = 1.0;
    s.beta = 0.9;
    s.total_steps = 500;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        Objective obj(2, bench::sphere);
        RngStream rng(seed);
        const auto r = sa_local_search({1.0, 1.0}, obj, space, s, rng);
        EXPECT_GE(r.fitness, -2.0);
        EXPECT_EQ(r.fitness, bench::sphere(r.x));
        EXPECT_TRUE(space.contains(r.x));
        EXPECT_EQ(r.evaluations, 501u);
    }
}

TEST(SaLocalSearch, CoolsEveryStepsPerTemperature) {
    const auto space = SearchSpace::cube(1, -1, 1);
    Objective obj(1, bench::sphere);
    SaSchedule s;
    s.t0 = 2.0;
    s.beta = 0.5;
    s.steps_per_temperature = 4;
    s.total_steps = 12;
    RngStream rng(3);
    std::vector<double> temps;
    sa_local_search({0.5}, obj, space, s, rng, [&](const SaStep& st) { temps.push_back(st.temperature); });
    ASSERT_EQ(temps.size(), 12u);
    for (std::size_t k = 0; k < 12; ++k) EXPECT_EQ(temps[k], 2.0 * std::pow(0.5, static_cast<double>(k / 4)));
}

TEST(HillClimb, FixedPoint) {
    const auto space = SearchSpace::cube(2, -1, 1);
    Objective obj(2, bench::sphere);
    HillClimbConfig c;
    c.initial_step = 1e-3;
    const auto r = hill_climb({0.0, 0.0}, obj, space, c);
    EXPECT_EQ(r.x, (Point{0.0, 0.0}));
    EXPECT_EQ(r.fitness, 0.0);
}

TEST(HillClimb, ConvergesOnParabola) {
    const auto space = SearchSpace::cube(1, -4, 4);
    Objective obj(1, [](std::span<const double> x) { return -x[0] * x[0]; });
    // Steps are range fractions; 0.5 / 8 is an absolute step of 0.5.
    for (double step : {0.5 / 8.0, 0.5}) {
        HillClimbConfig c;
        c.initial_step = step;
        c.shrink = 0.5;
        c.tolerance = 1e-6;
        const auto r = hill_climb({1.0}, obj, space, c);
        EXPECT_LE(std::abs(r.x[0]), 1e-5);
    }
}

TEST(HillClimb, DeterministicAndNeverWorse) {
    const auto space = SearchSpace::cube(4, -5.12, 5.12);
    Objective obj(4, bench::rastrigin);
    RngStream rng(9);
    for (int k = 0; k < 30; ++k) {
        const auto x0 = random_point(space, rng);
        const auto a = hill_climb(x0, obj, space, {});
        const auto b = hill_climb(x0, obj, space, {});
        EXPECT_EQ(a.x, b.x);
        EXPECT_EQ(a.fitness, b.fitness);
        EXPECT_GE(a.fitness, bench::rastrigin(x0));
    }
}

TEST(ApplyLocalSearch, NoImprovementIsIdentity) {
    const auto space = SearchSpace::cube(2, -1, 1);
    const auto ind = evaluated({0.5, 0.5}, -0.5);
    for (auto mode : {LearningMode::lamarckian, LearningMode::baldwinian}) {
        const auto out = apply_local_search(ind, {{0.5, 0.5}, -0.5}, mode, space);
        EXPECT_EQ(out.phenotype, ind.phenotype);
        EXPECT_EQ(*out.fitness, -0.5);
        EXPECT_FALSE(out.acquired_fitness);
    }
}

TEST(ApplyLocalSearch, Lamarckian) {
    const auto space = SearchSpace::cube(2, -1, 1);
    const auto out = apply_local_search(evaluated({0.5, 0.5}, -0.5), {{0.1, 0.0}, -0.01}, LearningMode::lamarckian, space);
    EXPECT_EQ(out.phenotype, (Point{0.1, 0.0}));
    EXPECT_EQ(std::get<RealGenotype>(out.genotype).values, (Point{0.1, 0.0}));
    EXPECT_EQ(*out.fitness, -0.01);
}

TEST(ApplyLocalSearch, Baldwinian) {
    const auto space = SearchSpace::cube(2, -1, 1);
    const auto out = apply_local_search(evaluated({0.5, 0.5}, -0.5), {{0.1, 0.0}, -0.01}, LearningMode::baldwinian, space);
    EXPECT_EQ(out.phenotype, (Point{0.5, 0.5}));
    EXPECT_EQ(std::get<RealGenotype>(out.genotype).values, (Point{0.5, 0.5}));
    EXPECT_EQ(*out.fitness, -0.01);
    EXPECT_TRUE(out.acquired_fitness);
}

TEST(ApplyLocalSearch, BinaryGenotype) {
    const auto space = SearchSpace::cube(1, 0, 7);
    const BinaryCodec codec(space, 3);
    Individual ind;
    ind.genotype = codec.encode(Point{2.0});
    ind.phenotype = {2.0};
    ind.fitness = -4.0;
    const auto bald = apply_local_search(ind, {{1.0}, -1.0}, LearningMode::baldwinian, space, &codec);
    EXPECT_EQ(std::get<BinaryGenotype>(bald.genotype).bits, std::get<BinaryGenotype>(ind.genotype).bits);
    const auto lam = apply_local_search(ind, {{1.0}, -1.0}, LearningMode::lamarckian, space, &codec);
    EXPECT_EQ(codec.decode(std::get<BinaryGenotype>(lam.genotype)), Point{1.0});
    EXPECT_THROW(apply_local_search(ind, {{1.5}, -1.0}, LearningMode::lamarckian, space, &codec), InvariantError);
}

TEST(ApplyLocalSearch, OutOfBounds) {
    const auto space = SearchSpace::cube(1, 0, 1);
    EXPECT_THROW(apply_local_search(evaluated({0.5}, 0.0), {{1.5}, 1.0}, LearningMode::lamarckian, space), InvariantError);
}

TEST(RunHybrid, DisabledMatchesPlainGa) {
    const auto space = SearchSpace::cube(4, -5.12, 5.12);
    auto ga = default_config(4);
    ga.seed = 77;
    ga.stopping.max_generations = 50;
    for (auto placement : {Placement::post, Placement::interleaved}) {
        HybridConfig h;
        h.placement = placement;
        h.top_k = 0;
        h.application_probability = 0.0;
        Objective a(4, bench::rastrigin), b(4, bench::rastrigin);
        const auto plain = run_ga(a, space, ga);
        const auto hyb = run_hybrid(b, space, ga, h);
        ASSERT_EQ(plain.records.size(), hyb.records.size());
        for (std::size_t g = 0; g < plain.records.size(); ++g) {
            EXPECT_EQ(plain.records[g].best_fitness, hyb.records[g].best_fitness);
            EXPECT_EQ(plain.records[g].mean_fitness, hyb.records[g].mean_fitness);
        }
        EXPECT_EQ(plain.best.phenotype, hyb.best.phenotype);
        EXPECT_EQ(plain.evaluations, hyb.evaluations);
        EXPECT_EQ(hyb.local_search_evaluations, 0u);
    }
}

TEST(RunHybrid, PostNeverWorseThanPlain) {
    const auto space = SearchSpace::cube(5, -5.12, 5.12);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        auto ga = default_config(5);
        ga.seed = seed;
        ga.stopping.max_generations = 30;
        for (auto searcher : {Searcher::hill_climb, Searcher::simulated_annealing}) {
            HybridConfig h;
            h.searcher = searcher;
            h.sa.total_steps = 100;
            Objective a(5, bench::rastrigin), b(5, bench::rastrigin);
            const auto plain = run_ga(a, space, ga);
            const auto hyb = run_hybrid(b, space, ga, h);
            EXPECT_GE(*hyb.best.fitness, *plain.best.fitness);
            EXPECT_EQ(*hyb.best.fitness, bench::rastrigin(hyb.best.phenotype));
            EXPECT_EQ(b.evaluations(), hyb.evaluations);
            EXPECT_EQ(hyb.evaluations, plain.evaluations + hyb.local_search_evaluations);
        }
    }
}

TEST(RunHybrid, InterleavedLamarckianMonotone) {
    const auto space = SearchSpace::cube(5, -5.12, 5.12);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        auto ga = default_config(5);
        ga.seed = seed;
        ga.stopping.max_generations = 25;
        HybridConfig h;
        h.placement = Placement::interleaved;
        h.mode = HybridMode::mixed;
        h.lamarckian_fraction = 1.0;
        h.application_probability = 0.2;
        h.hill_climb.max_iterations = 20;
        Objective obj(5, bench::sphere);
        const auto t = run_hybrid(obj, space, ga, h);
        for (std::size_t g = 1; g < t.records.size(); ++g)
            EXPECT_GE(t.records[g].best_fitness, t.records[g - 1].best_fitness);
        EXPECT_GT(t.local_search_evaluations, 0u);
        EXPECT_EQ(obj.evaluations(), t.evaluations);
        EXPECT_EQ(t.records.back().cumulative_evaluations, t.evaluations);
    }
}

TEST(RunHybrid, BaldwinianKeepsBestTrulyEvaluated) {
    const auto space = SearchSpace::cube(3, -5.12, 5.12);
    auto ga = default_config(3);
    ga.seed = 5;
    ga.stopping.max_generations = 20;
    HybridConfig h;
    h.placement = Placement::interleaved;
    h.mode = HybridMode::baldwinian;
    h.application_probability = 0.5;
    Objective obj(3, bench::rastrigin);
    const auto t = run_hybrid(obj, space, ga, h);
    EXPECT_EQ(*t.best.fitness, bench::rastrigin(t.best.phenotype));
}

TEST(RunHybrid, BinaryEncodingStaysOnLattice) {
    const auto space = SearchSpace::cube(3, -5.12, 5.12);
    auto ga = default_config(3);
    ga.encoding = {EncodingKind::binary, 12};
    ga.seed = 8;
    ga.stopping.max_generations = 20;
    HybridConfig h;
    h.placement = Placement::interleaved;
    h.application_probability = 0.3;
    Objective obj(3, bench::sphere);
    const auto t = run_hybrid(obj, space, ga, h);
    const BinaryCodec codec(space, 12);
    for (const auto& m : t.final_population.members)
        EXPECT_EQ(codec.decode(std::get<BinaryGenotype>(m.genotype)), m.phenotype);
    EXPECT_EQ(*t.best.fitness, bench::sphere(t.best.phenotype));
}

TEST(HybridConfig, Validation) {
    const auto ga = default_config(3);
    HybridConfig h;
    h.top_k = ga.pop_size + 1;
    EXPECT_THROW(h.validate(ga), InvariantError);
    h = {};
    h.lamarckian_fraction = 1.5;
    EXPECT_THROW(h.validate(ga), InvariantError);
    h = {};
    h.searcher = Searcher::simulated_annealing;
    h.sa.beta = 1.0;
    EXPECT_THROW(h.validate(ga), InvariantError);
}
