#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "dminer/error.hpp"
#include "dminer/random.hpp"
#include "dminer/svm.hpp"

namespace dminer {

/// WEKA's SMO defaults (C = 1, gamma = 0.01) in log2 units.
HPSetting weka_default();

/// SPSO2007-style swarm settings. The run stops at whichever of
/// `max_iterations` generations (the initial one included) or
/// `budget_evaluations` fitness calls is reached first.
struct SwarmConfig {
  std::size_t population = 10;
  std::size_t max_iterations = 30;
  std::size_t budget_evaluations = 300;
  double inertia = 0.72134752044448170;      // 1 / (2 ln 2)
  double acceleration = 1.19314718055994531;  // 0.5 + ln 2
  std::size_t informant_count = 3;
  std::uint64_t seed = 0;
  std::optional<HPSetting> warm_start = weka_default();
  double max_seconds = 0.0;  // 0 disables the wall-clock cut-off

  void validate() const;
};

struct ParticleState {
  HPSetting position;
  std::array<double, 2> velocity{0.0, 0.0};  // (cost, gamma) axes
  HPSetting best_position;
  double best_fitness = -std::numeric_limits<double>::infinity();
  std::vector<std::size_t> informants;  // particles whose best this one sees, itself included
};

struct TraceEntry {
  std::size_t iteration = 0;
  std::size_t particle = 0;
  HPSetting setting;
  double fitness = 0.0;
  bool failed = false;
};

struct OptimTrace {
  std::vector<TraceEntry> evaluations;
  HPSetting best;
  double best_fitness = -std::numeric_limits<double>::infinity();
  std::size_t generations = 0;
  bool stopped_by_clock = false;
};

/// Maximized objective.
using FitnessFn = std::function<double(const HPSetting&)>;

/// Mutable swarm: particles, best-so-far and the single random stream.
struct SwarmState {
  std::vector<ParticleState> particles;
  HPSetting global_best;
  double global_best_fitness = -std::numeric_limits<double>::infinity();
  std::size_t iteration = 0;
  Rng rng{0};
};

/// Raised when the fitness evaluator fails; carries the partial trace whose
/// last entry is the offending setting.
class OptimizationError : public Error {
 public:
  OptimizationError(const std::string& message, OptimTrace trace) : Error(message), trace_(std::move(trace)) {}
  const OptimTrace& trace() const noexcept { return trace_; }

 private:
  OptimTrace trace_;
};

/// Positions (particle 0 at the warm start), velocities and informant links;
/// nothing is evaluated yet.
SwarmState init_swarm(const SwarmConfig& config, const HPSpace& space);

/// Redraws the informant topology: each particle informs itself plus
/// `informant_count` others drawn uniformly with replacement.
void draw_informants(SwarmState& state, std::size_t informant_count);

/// Evaluates the first `limit` particles at their initial positions.
std::vector<TraceEntry> evaluate_initial(SwarmState& state, const FitnessFn& fitness, std::size_t limit);

/// One generation: move and evaluate the first `limit` particles (all when
/// limit >= population). Redraws informants if the global best did not improve.
std::vector<TraceEntry> pso_step(SwarmState& state, const SwarmConfig& config, const HPSpace& space,
                                 const FitnessFn& fitness, std::size_t limit = std::numeric_limits<std::size_t>::max());

OptimTrace pso_run(const SwarmConfig& config, const HPSpace& space, const FitnessFn& fitness);

/// One JSON object per line: iteration, particle, log2_cost, log2_gamma, fitness.
std::string to_jsonl(const OptimTrace& trace);

}  // namespace dminer
