#include "dminer/pso.hpp"

#include <chrono>
#include <cmath>

#include <fmt/format.h>
#include <json.hpp>

namespace dminer {

HPSetting weka_default() {
  return HPSetting{0.0, std::log2(0.01), Provenance::tool_default, "weka"};
}

void SwarmConfig::validate() const {
  if (population < 2) throw ConfigError("population", "must be at least 2");
  if (max_iterations < 1) throw ConfigError("max_iterations", "must be at least 1");
  if (budget_evaluations < 1) throw ConfigError("budget_evaluations", "must be at least 1");
  if (!(inertia > 0.0)) throw ConfigError("inertia", "must be positive");
  if (!(acceleration > 0.0)) throw ConfigError("acceleration", "must be positive");
  if (max_seconds < 0.0) throw ConfigError("max_seconds", "must be non-negative");
}

void draw_informants(SwarmState& state, std::size_t informant_count) {
  const std::size_t n = state.particles.size();
  std::vector<std::vector<bool>> informs(n, std::vector<bool>(n, false));  // informs[a][b]: a informs b
  for (std::size_t a = 0; a < n; ++a) {
    informs[a][a] = true;
    for (std::size_t t = 0; t < informant_count; ++t) informs[a][state.rng.index(n)] = true;
  }
  for (std::size_t b = 0; b < n; ++b) {
    auto& list = state.particles[b].informants;
    list.clear();
    for (std::size_t a = 0; a < n; ++a)
      if (informs[a][b]) list.push_back(a);
  }
}

SwarmState init_swarm(const SwarmConfig& config, const HPSpace& space) {
  config.validate();
  space.validate();
  if (config.warm_start) validate(*config.warm_start, space);

  SwarmState state;
  state.rng = Rng(config.seed);
  state.particles.resize(config.population);
  for (std::size_t p = 0; p < config.population; ++p) {
    auto& particle = state.particles[p];
    if (p == 0 && config.warm_start) {
      particle.position = *config.warm_start;
    } else {
      particle.position.log2_cost = state.rng.uniform(space.cost.lower, space.cost.upper);
      particle.position.log2_gamma = state.rng.uniform(space.gamma.lower, space.gamma.upper);
    }
    particle.position.provenance = Provenance::pso;
    const double half_cost = space.cost.width() / 2.0;
    const double half_gamma = space.gamma.width() / 2.0;
    particle.velocity = {state.rng.uniform(-half_cost, half_cost), state.rng.uniform(-half_gamma, half_gamma)};
    particle.best_position = particle.position;
  }
  draw_informants(state, config.informant_count);
  return state;
}

namespace {

// Evaluates particles [0, count) at their current positions, then folds the
// results into personal and global bests in particle order.
std::vector<TraceEntry> evaluate_and_update(SwarmState& state, const FitnessFn& fitness, std::size_t count) {
  std::vector<TraceEntry> entries;
  for (std::size_t p = 0; p < count; ++p) {
    auto& particle = state.particles[p];
    TraceEntry entry{state.iteration, p, particle.position, 0.0, false};
    try {
      entry.fitness = fitness(particle.position);
    } catch (const std::exception& e) {
      entry.failed = true;
      entry.fitness = std::numeric_limits<double>::quiet_NaN();
      entries.push_back(entry);
      OptimTrace partial;
      partial.evaluations = std::move(entries);
      throw OptimizationError(fmt::format("fitness evaluation failed at (log2_cost={}, log2_gamma={}): {}",
                                          particle.position.log2_cost, particle.position.log2_gamma, e.what()),
                              std::move(partial));
    }
    entries.push_back(entry);
    if (entry.fitness > particle.best_fitness) {
      particle.best_fitness = entry.fitness;
      particle.best_position = particle.position;
    }
    if (entry.fitness > state.global_best_fitness) {
      state.global_best_fitness = entry.fitness;
      state.global_best = particle.position;
    }
  }
  return entries;
}

}  // namespace

std::vector<TraceEntry> evaluate_initial(SwarmState& state, const FitnessFn& fitness, std::size_t limit) {
  state.iteration = 0;
  return evaluate_and_update(state, fitness, std::min(limit, state.particles.size()));
}

std::vector<TraceEntry> pso_step(SwarmState& state, const SwarmConfig& config, const HPSpace& space,
                                 const FitnessFn& fitness, std::size_t limit) {
  const std::size_t count = std::min(limit, state.particles.size());
  ++state.iteration;
  const double before = state.global_best_fitness;

  const std::array<Interval, 2> bounds{space.cost, space.gamma};
  for (std::size_t p = 0; p < count; ++p) {
    auto& particle = state.particles[p];

    // Best personal best among informants; ties keep the lowest index.
    std::size_t leader = particle.informants.front();
    for (std::size_t a : particle.informants)
      if (state.particles[a].best_fitness > state.particles[leader].best_fitness) leader = a;
    const HPSetting& local = state.particles[leader].best_position;

    const std::array<double, 2> x{particle.position.log2_cost, particle.position.log2_gamma};
    const std::array<double, 2> pb{particle.best_position.log2_cost, particle.best_position.log2_gamma};
    const std::array<double, 2> lb{local.log2_cost, local.log2_gamma};
    std::array<double, 2> next{};
    for (std::size_t axis = 0; axis < 2; ++axis) {
      const double cognitive = state.rng.uniform(0.0, config.acceleration);
      const double social = state.rng.uniform(0.0, config.acceleration);
      double v = config.inertia * particle.velocity[axis] + cognitive * (pb[axis] - x[axis]) +
                 social * (lb[axis] - x[axis]);
      double pos = x[axis] + v;
      if (pos < bounds[axis].lower) {
        pos = bounds[axis].lower;
        v = 0.0;
      } else if (pos > bounds[axis].upper) {
        pos = bounds[axis].upper;
        v = 0.0;
      }
      particle.velocity[axis] = v;
      next[axis] = pos;
    }
    particle.position.log2_cost = next[0];
    particle.position.log2_gamma = next[1];
  }

  auto entries = evaluate_and_update(state, fitness, count);
  if (!(state.global_best_fitness > before)) draw_informants(state, config.informant_count);
  return entries;
}

OptimTrace pso_run(const SwarmConfig& config, const HPSpace& space, const FitnessFn& fitness) {
  auto state = init_swarm(config, space);
  const auto start = std::chrono::steady_clock::now();
  OptimTrace trace;

  auto absorb = [&](std::vector<TraceEntry> entries) {
    trace.evaluations.insert(trace.evaluations.end(), entries.begin(), entries.end());
    ++trace.generations;
  };
  auto fail = [&](const OptimizationError& e) {
    for (const auto& entry : e.trace().evaluations) trace.evaluations.push_back(entry);
    trace.best = state.global_best;
    trace.best_fitness = state.global_best_fitness;
    throw OptimizationError(e.what(), trace);
  };

  try {
    absorb(evaluate_initial(state, fitness, std::min(config.budget_evaluations, config.population)));
    while (trace.generations < config.max_iterations && trace.evaluations.size() < config.budget_evaluations) {
      if (config.max_seconds > 0.0) {
        const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
        if (elapsed.count() >= config.max_seconds) {
          trace.stopped_by_clock = true;
          break;
        }
      }
      absorb(pso_step(state, config, space, fitness, config.budget_evaluations - trace.evaluations.size()));
    }
  } catch (const OptimizationError& e) {
    fail(e);
  }
  trace.best = state.global_best;
  trace.best_fitness = state.global_best_fitness;
  return trace;
}

std::string to_jsonl(const OptimTrace& trace) {
  std::string out;
  for (const auto& e : trace.evaluations) {
    nlohmann::ordered_json j;
    j["iteration"] = e.iteration;
    j["particle"] = e.particle;
    j["log2_cost"] = e.setting.log2_cost;
    j["log2_gamma"] = e.setting.log2_gamma;
    if (e.failed) j["fitness"] = nullptr;
    else j["fitness"] = e.fitness;
    if (e.failed) j["failed"] = true;
    out += j.dump();
    out += '\n';
  }
  return out;
}

}  // namespace dminer
