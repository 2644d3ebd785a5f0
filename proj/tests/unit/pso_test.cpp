#include <gtest/gtest.h>

#include <cmath>

#include "dminer/pso.hpp"
#include "dminer/random_search.hpp"

namespace dminer {
namespace {

FitnessFn sphere(double c, double g) {
  return [=](const HPSetting& h) {
    return -((h.log2_cost - c) * (h.log2_cost - c) + (h.log2_gamma - g) * (h.log2_gamma - g));
  };
}

TEST(Swarm, WarmStartIsWekaDefault) {
  const auto state = init_swarm(SwarmConfig{}, HPSpace{});
  EXPECT_EQ(state.particles[0].position.log2_cost, 0.0);
  EXPECT_NEAR(state.particles[0].position.log2_gamma, -6.6439, 1e-4);
  // The fixture rounds it to (0, -6.6).
  EXPECT_NEAR(state.particles[0].position.log2_gamma, -6.6, 0.05);
}

TEST(Swarm, InitIsDeterministic) {
  SwarmConfig cfg;
  cfg.seed = 17;
  const auto a = init_swarm(cfg, HPSpace{});
  const auto b = init_swarm(cfg, HPSpace{});
  for (std::size_t p = 0; p < cfg.population; ++p) {
    EXPECT_TRUE(a.particles[p].position.same_point(b.particles[p].position));
    EXPECT_EQ(a.particles[p].velocity, b.particles[p].velocity);
    EXPECT_EQ(a.particles[p].informants, b.particles[p].informants);
  }
}

TEST(Swarm, InformantsValid) {
  SwarmConfig cfg;
  cfg.informant_count = 3;
  const auto state = init_swarm(cfg, HPSpace{});
  for (std::size_t p = 0; p < state.particles.size(); ++p) {
    const auto& inf = state.particles[p].informants;
    EXPECT_NE(std::find(inf.begin(), inf.end(), p), inf.end());
    for (auto a : inf) EXPECT_LT(a, state.particles.size());
  }
}

TEST(Step, FixedPoint) {
  SwarmConfig cfg;
  auto state = init_swarm(cfg, HPSpace{});
  const HPSetting at{1.0, 2.0, Provenance::pso, ""};
  for (auto& p : state.particles) {
    p.position = at;
    p.best_position = at;
    p.best_fitness = 0.0;
    p.velocity = {0.0, 0.0};
  }
  state.global_best = at;
  state.global_best_fitness = 0.0;
  pso_step(state, cfg, HPSpace{}, sphere(1.0, 2.0));
  for (const auto& p : state.particles) EXPECT_TRUE(p.position.same_point(at));
}

TEST(Step, ConfinementClampsAndZeroesVelocity) {
  SwarmConfig cfg;
  auto state = init_swarm(cfg, HPSpace{});
  for (auto& p : state.particles) {
    p.position = {14.9, 0.0, Provenance::pso, ""};
    p.best_position = p.position;
    p.best_fitness = 0.0;
    p.velocity = {50.0, 0.0};
  }
  pso_step(state, cfg, HPSpace{}, [](const HPSetting&) { return 0.0; });
  for (const auto& p : state.particles) {
    EXPECT_EQ(p.position.log2_cost, 15.0);
    EXPECT_EQ(p.velocity[0], 0.0);
  }
}

TEST(Run, BudgetThreeHundred) {
  const auto trace = pso_run(SwarmConfig{}, HPSpace{}, sphere(3.0, -2.0));
  EXPECT_EQ(trace.evaluations.size(), 300u);
  EXPECT_EQ(trace.generations, 30u);
}

TEST(Run, BudgetTenIsInitialOnly) {
  SwarmConfig cfg;
  cfg.budget_evaluations = 10;
  cfg.seed = 4;
  const auto f = sphere(5.0, 5.0);
  const auto trace = pso_run(cfg, HPSpace{}, f);
  ASSERT_EQ(trace.evaluations.size(), 10u);
  double best = -1e300;
  for (const auto& e : trace.evaluations) {
    EXPECT_EQ(e.iteration, 0u);
    best = std::max(best, e.fitness);
  }
  EXPECT_EQ(trace.best_fitness, best);
}

TEST(Run, ConstantFitnessKeepsWarmStart) {
  const auto trace = pso_run(SwarmConfig{}, HPSpace{}, [](const HPSetting&) { return 0.5; });
  EXPECT_TRUE(trace.best.same_point(weka_default()));
}

TEST(Run, BestMonotoneAndPositionsInside) {
  const HPSpace space;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    SwarmConfig cfg;
    cfg.seed = seed;
    const auto trace = pso_run(cfg, space, sphere(14.0, -14.5));
    double best = -1e300;
    for (const auto& e : trace.evaluations) {
      EXPECT_TRUE(space.contains(e.setting));
      best = std::max(best, e.fitness);
    }
    EXPECT_EQ(best, trace.best_fitness);
  }
}

TEST(Run, ConvergesNearInteriorTarget) {
  int close = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(derive_seed(55, "target", seed));
    const double c = rng.uniform(-12.0, 12.0), g = rng.uniform(-12.0, 12.0);
    SwarmConfig cfg;
    cfg.seed = seed;
    const auto trace = pso_run(cfg, HPSpace{}, [=](const HPSetting& h) {
      return -std::hypot(h.log2_cost - c, h.log2_gamma - g);
    });
    close += -trace.best_fitness <= 1.0;
  }
  EXPECT_GE(close, 9);
}

TEST(Run, FailureCarriesOffendingSetting) {
  int calls = 0;
  try {
    pso_run(SwarmConfig{}, HPSpace{}, [&](const HPSetting&) -> double {
      if (++calls == 14) throw std::runtime_error("boom");
      return 0.0;
    });
    FAIL();
  } catch (const OptimizationError& e) {
    ASSERT_EQ(e.trace().evaluations.size(), 14u);
    EXPECT_TRUE(e.trace().evaluations.back().failed);
  }
}

TEST(Config, RejectsBadValues) {
  SwarmConfig cfg;
  cfg.population = 1;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

}  // namespace
}  // namespace dminer
