#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dminer/evaluation.hpp"
#include "dminer/pso.hpp"
#include "dminer/random_search.hpp"
#include "dminer/strategy_table.hpp"

namespace dminer {

/// Dataset name -> preprocessed table.
using TableSet = std::map<std::string, DataTable>;

struct Replication {
  std::size_t id = 0;
  std::vector<std::string> opt;   // datasets the defaults are mined on
  std::vector<std::string> test;  // datasets they are assessed on
};

/// Dataset-level 5x2-style resampling of the collection.
struct ResamplingPlan {
  std::vector<Replication> replications;
  std::uint64_t seed = 0;
};

/// Independent half/half split per replication; the optimization side gets
/// the extra dataset of an odd collection.
ResamplingPlan build_plan(std::vector<std::string> names, std::size_t replications, std::uint64_t seed);

/// Nested optimization samples S_k per replication.
struct SampleSpec {
  std::vector<std::size_t> ks;                                       // ascending
  std::vector<std::map<std::size_t, std::vector<std::string>>> samples;  // [replication][k]

  const std::vector<std::string>& sample(std::size_t replication, std::size_t k) const;
};

SampleSpec choose_samples(const ResamplingPlan& plan, std::vector<std::size_t> ks, std::uint64_t seed);

struct PoolEntry {
  HPSetting hp;
  double fitness = 0.0;
  std::size_t replication = 0;
  std::uint64_t pso_seed = 0;
};

/// Mined optimized defaults, ordered by descending fitness.
struct SettingsPool {
  std::size_t sample_k = 0;
  std::vector<PoolEntry> entries;
  bool partial = false;
  std::vector<std::string> failures;
  std::optional<ResamplingPlan> plan;
  std::size_t folds = 10;
  std::uint64_t cv_seed = 0;
  std::string manifest_hash;

  /// Stable sort by descending fitness.
  void sort();
  /// Number of distinct (log2_cost, log2_gamma) points.
  std::size_t unique_settings() const;
};

struct MiningConfig {
  HPSpace space;
  SwarmConfig swarm;
  std::size_t sample_k = 51;
  std::vector<std::uint64_t> pso_seeds;
  std::size_t folds = 10;
  std::uint64_t cv_seed = 0;  // fitness folds, identical for every candidate of every run
  unsigned jobs = 1;
};

/// Swarm seed of one (replication, pso seed) run.
std::uint64_t run_seed(std::uint64_t pso_seed, std::size_t replication);

struct MiningRun {
  std::size_t replication = 0;
  std::uint64_t pso_seed = 0;
  OptimTrace trace;
  std::string error;
};

/// One PSO run per (replication, pso seed) with fitness = median CV BAC over
/// that replication's S_k. Failed runs are recorded and mark the pool partial.
SettingsPool mine_defaults(const ResamplingPlan& plan, const SampleSpec& samples, const TableSet& tables,
                           const MiningConfig& config, std::vector<MiningRun>* runs = nullptr);

enum class SelectionProtocol { oracle, validation };
enum class PoolScope { replication, all };

const char* to_string(SelectionProtocol s);
SelectionProtocol selection_from_string(const std::string& s);
const char* to_string(PoolScope s);
PoolScope pool_scope_from_string(const std::string& s);

/// One test dataset within one replication, with the CV seed every strategy uses.
struct TestCase {
  std::size_t replication = 0;
  const DataTable* table = nullptr;
  std::uint64_t cv_seed = 0;
};

struct PoolEvalRow {
  std::string dataset;
  std::size_t replication = 0;
  std::uint64_t cv_seed = 0;
  std::vector<std::size_t> candidates;  // pool indices assessed
  std::vector<CvResult> results;        // parallel to candidates
  std::size_t best = 0;                 // pool index of the selected entry
  double best_bac = 0.0;
  std::vector<double> best_per_fold;
};

struct PoolEvaluation {
  std::string strategy{strategy::default_opt};
  SelectionProtocol selection = SelectionProtocol::oracle;
  PoolScope scope = PoolScope::replication;
  std::size_t folds = 10;
  std::vector<PoolEvalRow> rows;
  std::string manifest_hash;
};

struct PoolEvalOptions {
  SelectionProtocol selection = SelectionProtocol::oracle;
  PoolScope scope = PoolScope::replication;
  unsigned jobs = 1;
};

/// Cross-validates pool entries on every test case and selects one per case.
/// Oracle selection takes the argmax on the test folds (ties: higher pool
/// fitness, then lower index); validation selection picks on even-indexed
/// folds and reports the mean over odd-indexed folds.
PoolEvaluation evaluate_pool(const SettingsPool& pool, const std::vector<TestCase>& tests, std::size_t folds,
                             const PoolEvalOptions& options = {});

/// A tool's default setting, possibly depending on the dataset.
struct ToolDefault {
  std::string strategy;
  std::function<HPSetting(const DataTable&)> setting;
};

/// mlr/LibSVM (C = 1, gamma = 1/p), WEKA (C = 1, gamma = 0.01), scikit-learn
/// (C = 1, gamma = 1/(p Var(X))), clamped to the space.
std::vector<ToolDefault> standard_tool_defaults(const HPSpace& space = {});

struct RsRecord {
  std::size_t replication = 0;
  RsResult result;
};

/// Assembles the strategy table: default.opt from the pool evaluation,
/// random.search from per-case searches, tool defaults cross-validated here.
StrategyTable compare_strategies(const PoolEvaluation& pool_eval, const std::vector<RsRecord>& rs,
                                 const std::vector<ToolDefault>& tools, const std::vector<TestCase>& tests,
                                 std::size_t folds, unsigned jobs = 1);

}  // namespace dminer
