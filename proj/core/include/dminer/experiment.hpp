#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dminer/dataset_io.hpp"
#include "dminer/manifest.hpp"
#include "dminer/meta.hpp"
#include "dminer/pipeline.hpp"
#include "dminer/stats.hpp"

namespace dminer {

/// Every knob of an end-to-end run. Worker count is not part of it: outputs
/// do not depend on it.
struct ExperimentConfig {
  std::size_t replications = 5;
  std::size_t sample_k = 51;
  std::vector<std::size_t> sample_sizes;  // extra pools for the sample-size curve; sample_k always included
  std::size_t pso_seeds = 10;
  SwarmConfig swarm;
  HPSpace space;
  std::size_t folds = 10;
  std::size_t rs_budget = 300;
  SelectionProtocol selection = SelectionProtocol::oracle;
  PoolScope scope = PoolScope::replication;
  Pairing pairing = Pairing::folds;
  double alpha = 0.05;
  double histogram_bin = 0.05;
  TreeConfig tree;

  /// Sample sizes in ascending order, sample_k included.
  std::vector<std::size_t> all_sample_sizes() const;
  void validate() const;
  Config to_config() const;
  /// Keys absent from `config` keep their defaults.
  static ExperimentConfig from_config(const Config& config);
};

/// The master-seed hierarchy.
namespace seeds {
std::uint64_t plan(std::uint64_t master);
std::uint64_t samples(std::uint64_t master);
std::uint64_t pso(std::uint64_t master, std::size_t run);
std::uint64_t fitness_cv(std::uint64_t master);
std::uint64_t test_cv(std::uint64_t master, std::size_t replication);
std::uint64_t rs(std::uint64_t master, std::size_t replication, const std::string& dataset);
}  // namespace seeds

/// Test cases of every replication; without a plan, one replication holding
/// the whole corpus.
std::vector<TestCase> make_test_cases(const std::optional<ResamplingPlan>& plan, const Corpus& corpus,
                                      std::uint64_t master_seed);

/// Random search on every test case with the case's CV seed.
std::vector<RsRecord> run_random_search(const std::vector<TestCase>& tests, const ExperimentConfig& config,
                                        std::uint64_t master_seed, unsigned jobs = 1);

struct Analysis {
  FriedmanResult friedman;
  NemenyiResult nemenyi;
  std::optional<BestPairSummary> rs_vs_tools;
  BestPairSummary rs_vs_all;
  std::vector<std::pair<std::string, std::vector<HistogramBin>>> histograms;  // default.opt vs each tool
  std::vector<TuneComparison> comparisons;
  LabeledMetaData labeled;
  std::optional<TreeModel> tree;
  std::optional<LooResult> loo;
  std::vector<Rule> rules;
};

/// Friedman/Nemenyi, best-pair protocol, histograms and the meta-level advisor.
Analysis analyze(const StrategyTable& table, const std::map<std::string, MetaFeatureVector>& metafeatures,
                 const ExperimentConfig& config);

struct SampleSizePoint {
  std::size_t k = 0;
  double mean_bac = 0.0;
  double median_bac = 0.0;
  std::size_t n = 0;
};

SampleSizePoint sample_size_point(std::size_t k, const PoolEvaluation& evaluation);

struct ExperimentResult {
  ResamplingPlan plan;
  SampleSpec samples;
  std::map<std::size_t, SettingsPool> pools;  // by sample size
  std::vector<MiningRun> runs;                // of the sample_k pool
  std::map<std::size_t, PoolEvaluation> evaluations;
  std::vector<RsRecord> rs;
  StrategyTable table;
  Analysis analysis;
};

/// Plan, mine, assess and analyze in one go.
ExperimentResult run_experiment(const Corpus& corpus, const ExperimentConfig& config, std::uint64_t master_seed,
                                unsigned jobs = 1);

Manifest make_manifest(const std::string& command, const Corpus& corpus, const Config& config,
                       std::uint64_t master_seed);

/// File name -> content. CSV and text artifacts start with a
/// "# manifest_hash=<hash>" line; JSON artifacts carry a manifest_hash field.
using Artifacts = std::map<std::string, std::string>;

Artifacts render_report(const StrategyTable& table, const Analysis& analysis,
                        const std::map<std::string, MetaFeatureVector>& metafeatures,
                        const std::vector<SampleSizePoint>& sample_sizes, const std::string& manifest_hash);
Artifacts render_experiment(const ExperimentResult& result, const Corpus& corpus, const std::string& manifest_hash);

/// Writes every artifact plus manifest.json into `dir`.
void write_artifacts(const std::filesystem::path& dir, const Artifacts& artifacts, const Manifest& manifest);

/// Reruns an experiment from its manifest; the corpus must match the recorded hashes.
ExperimentResult rerun_from_manifest(const Manifest& manifest, const Corpus& corpus, unsigned jobs = 1);

/// Text with a leading "# manifest_hash=" line.
std::string stamp_text(const std::string& text, const std::string& hash);
/// Strips leading '#' comment lines.
std::string strip_comments(const std::string& text);
/// Hash from a leading "# manifest_hash=" line, or "".
std::string stamped_hash(const std::string& text);

std::string metafeatures_csv(const std::map<std::string, MetaFeatureVector>& metafeatures);
std::map<std::string, MetaFeatureVector> read_metafeatures_csv(const std::string& text);

/// dataset,rs_bac,opt_bac,p_value,label
std::string labels_csv(const std::vector<TuneComparison>& comparisons, double alpha);
std::vector<TuneComparison> read_labels_csv(const std::string& text);

std::string sample_size_csv(const std::vector<SampleSizePoint>& points);

}  // namespace dminer
