// dminer: command-line front end for mining and assessing optimized SVM defaults.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "dminer/dataset_io.hpp"
#include "dminer/error.hpp"
#include "dminer/experiment.hpp"
#include "dminer/pool_io.hpp"

namespace fs = std::filesystem;
using namespace dminer;

namespace {

/// Flags that feed the key = value configuration; only flags given on the
/// command line override the config file.
class Knobs {
 public:
  void add(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help) {
    options_.emplace_back(app->add_option(flag, values_[key], help), key);
  }

  /// Config file (if any) overlaid with explicit flags.
  Config resolve(const std::string& config_path) const {
    Config c = config_path.empty() ? Config{} : Config::load(config_path);
    for (const auto& [opt, key] : options_)
      if (opt->count() > 0) c.set(key, values_.at(key));
    return c;
  }

 private:
  std::map<std::string, std::string> values_;
  std::vector<std::pair<CLI::Option*, std::string>> options_;
};

struct SeedFlag {
  std::uint64_t value = 0;
  CLI::Option* option = nullptr;

  void add(CLI::App* app) { option = app->add_option("--seed", value, "Master seed"); }
  std::uint64_t resolve(const Config& c) const {
    return resolve_seed(option->count() ? std::optional<std::uint64_t>(value) : std::nullopt, c);
  }
};

void write_or_print(const std::string& out, const std::string& text) {
  if (out.empty() || out == "-")
    std::cout << text;
  else
    write_text(out, text);
}

fs::path manifest_path_for(const fs::path& out) {
  if (out.empty()) return {};
  return out.parent_path() / (out.stem().string() + ".manifest.json");
}

void write_manifest(const fs::path& path, const Manifest& m) {
  if (!path.empty()) write_text(path, m.to_json());
}

/// One dataset given as a JSON dataset file or a raw CSV/ARFF source.
DatasetFile load_any(const fs::path& path) {
  return path.extension() == ".json" ? read_dataset(path) : ingest(path);
}

Corpus single_corpus(const DatasetFile& file) {
  Corpus c;
  c.tables.emplace(file.table.name, file.table);
  c.metafeatures[file.table.name] = file.metafeatures;
  c.hashes[file.table.name] = table_hash(file.table);
  return c;
}

// ---------------------------------------------------------------- ingest

struct IngestArgs {
  std::string input, target, out;
  std::size_t min_class_count = 2;
};

int run_ingest(const IngestArgs& a) {
  DatasetFile file = ingest(a.input, a.target, a.min_class_count);
  Config cfg;
  cfg.set("input", fs::path(a.input).filename().string());
  cfg.set("target", a.target);
  cfg.set("min_class_count", fmt::format("{}", a.min_class_count));
  Manifest m = make_manifest("ingest", single_corpus(file), cfg, 0);
  file.manifest_hash = m.hash();
  const fs::path out = fs::path(a.out) / (file.table.name + ".json");
  write_dataset(out, file);
  write_manifest(manifest_path_for(out), m);
  std::cout << fmt::format("{}: {} instances, {} features, {} classes -> {}\n", file.table.name,
                           file.table.n_instances(), file.table.n_features(), file.table.n_classes(), out.string());
  return 0;
}

// -------------------------------------------------------------- evaluate

struct EvaluateArgs {
  std::string dataset, out;
  double log2_cost = 0.0, log2_gamma = 0.0;
  std::size_t folds = 10;
  SeedFlag seed;
};

int run_evaluate(const EvaluateArgs& a) {
  const DatasetFile file = load_any(a.dataset);
  const std::uint64_t seed = a.seed.resolve({});
  HPSetting hp{a.log2_cost, a.log2_gamma, Provenance::tool_default, "cli"};
  validate(hp);
  CvResult cv = cross_validate(file.table, hp, a.folds, seed);
  Config cfg;
  cfg.set("log2_cost", fmt::format("{}", a.log2_cost));
  cfg.set("log2_gamma", fmt::format("{}", a.log2_gamma));
  cfg.set("folds", fmt::format("{}", a.folds));
  const Manifest m = make_manifest("evaluate", single_corpus(file), cfg, seed);
  write_or_print(a.out, with_manifest_hash(to_json(cv), m.hash()));
  if (!a.out.empty() && a.out != "-") write_manifest(manifest_path_for(a.out), m);
  return 0;
}

// --------------------------------------------------------------- tune-rs

struct TuneRsArgs {
  std::string dataset, out, pool, data_dir, out_dir, config;
  std::size_t replication = 1;
  std::optional<std::uint64_t> cv_seed;
  SeedFlag seed;
  Knobs knobs;
  unsigned jobs = 1;
};

int run_tune_rs(const TuneRsArgs& a) {
  const Config cfg = a.knobs.resolve(a.config);
  const auto config = ExperimentConfig::from_config(cfg);
  const std::uint64_t seed = a.seed.resolve(cfg);
  const CvOptions options{a.jobs, {}};

  if (!a.dataset.empty()) {
    const DatasetFile file = load_any(a.dataset);
    RsRecord record;
    record.replication = a.replication;
    record.result = random_search(file.table, config.space, config.rs_budget, config.folds, seed,
                                  a.cv_seed.value_or(seed), options);
    const Manifest m = make_manifest("tune-rs", single_corpus(file), cfg, seed);
    write_or_print(a.out, to_json(record, m.hash()));
    if (!a.out.empty() && a.out != "-") write_manifest(manifest_path_for(a.out), m);
    const auto& best = record.result.best();
    std::cerr << fmt::format("best ({:.6f}, {:.6f}) bac {:.6f}\n", best.hp.log2_cost, best.hp.log2_gamma,
                             best.mean_bac);
    return 0;
  }

  // Batch mode: every test case of a pool's plan, with the seeds `pool-eval` uses.
  if (a.pool.empty() || a.data_dir.empty() || a.out_dir.empty())
    throw ConfigError("--dataset", "required unless --pool, --data-dir and --out-dir are all given");
  const SettingsPool pool = read_pool(a.pool);
  const Corpus corpus = load_corpus(a.data_dir);
  const auto tests = make_test_cases(pool.plan, corpus, seed);
  const auto records = run_random_search(tests, config, seed, a.jobs);
  const Manifest m = make_manifest("tune-rs", corpus, cfg, seed);
  for (const auto& r : records)
    write_text(fs::path(a.out_dir) / rs_file_name(r.replication, r.result.dataset), to_json(r, m.hash()));
  write_manifest(fs::path(a.out_dir) / "manifest.json", m);
  std::cout << fmt::format("{} random searches -> {}\n", records.size(), a.out_dir);
  return 0;
}

// -------------------------------------------------------------- optimize

struct OptimizeArgs {
  std::string data_dir, out, config, trace;
  double max_seconds = 0.0;
  SeedFlag seed;
  Knobs knobs;
  unsigned jobs = 1;
};

int run_optimize(const OptimizeArgs& a) {
  const Config cfg = a.knobs.resolve(a.config);
  auto config = ExperimentConfig::from_config(cfg);
  config.swarm.max_seconds = a.max_seconds;
  const std::uint64_t seed = a.seed.resolve(cfg);
  const Corpus corpus = load_corpus(a.data_dir);

  const auto plan = build_plan(corpus.names(), config.replications, seeds::plan(seed));
  const auto samples = choose_samples(plan, {config.sample_k}, seeds::samples(seed));
  MiningConfig mining;
  mining.space = config.space;
  mining.swarm = config.swarm;
  mining.sample_k = config.sample_k;
  mining.folds = config.folds;
  mining.cv_seed = seeds::fitness_cv(seed);
  mining.jobs = a.jobs;
  for (std::size_t i = 0; i < config.pso_seeds; ++i) mining.pso_seeds.push_back(seeds::pso(seed, i));

  std::vector<MiningRun> runs;
  SettingsPool pool = mine_defaults(plan, samples, corpus.tables, mining, &runs);
  const Manifest m = make_manifest("optimize", corpus, cfg, seed);
  pool.manifest_hash = m.hash();
  write_text(a.out, to_json(pool));
  write_manifest(manifest_path_for(a.out), m);
  if (!a.trace.empty()) {
    std::string text;
    for (const auto& run : runs) text += to_jsonl(run.trace);
    write_text(a.trace, text);
  }
  for (const auto& f : pool.failures) std::cerr << "failed run: " << f << "\n";
  std::cout << fmt::format("pool of {} ({} unique) -> {}{}\n", pool.entries.size(), pool.unique_settings(), a.out,
                           pool.partial ? " [partial]" : "");
  return pool.partial ? 3 : 0;
}

// ------------------------------------------------------------- pool-eval

struct PoolEvalArgs {
  std::string pool, data_dir, out, config;
  SeedFlag seed;
  Knobs knobs;
  unsigned jobs = 1;
};

int run_pool_eval(const PoolEvalArgs& a) {
  const Config cfg = a.knobs.resolve(a.config);
  const auto config = ExperimentConfig::from_config(cfg);
  const std::uint64_t seed = a.seed.resolve(cfg);
  const SettingsPool pool = read_pool(a.pool);
  const Corpus corpus = load_corpus(a.data_dir);
  const auto tests = make_test_cases(pool.plan, corpus, seed);
  PoolEvaluation ev = evaluate_pool(pool, tests, config.folds, {config.selection, config.scope, a.jobs});
  Manifest m = make_manifest("pool-eval", corpus, cfg, seed);
  ev.manifest_hash = pool.manifest_hash.empty() ? m.hash() : pool.manifest_hash;
  write_text(a.out, to_json(ev));
  write_manifest(manifest_path_for(a.out), m);
  const auto p = sample_size_point(pool.sample_k, ev);
  std::cout << fmt::format("{} test cases, {} selection: mean BAC {:.4f}, median {:.4f}\n", p.n,
                           to_string(config.selection), p.mean_bac, p.median_bac);
  return 0;
}

// --------------------------------------------------------------- compare

struct CompareArgs {
  std::string pool_eval, rs_dir, data_dir, out, config;
  SeedFlag seed;
  Knobs knobs;
  unsigned jobs = 1;
};

int run_compare(const CompareArgs& a) {
  const Config cfg = a.knobs.resolve(a.config);
  const auto config = ExperimentConfig::from_config(cfg);
  const std::uint64_t seed = a.seed.resolve(cfg);
  const PoolEvaluation ev = pool_eval_from_json(read_text(a.pool_eval));
  const Corpus corpus = load_corpus(a.data_dir);
  std::vector<TestCase> tests;
  for (const auto& row : ev.rows) {
    auto it = corpus.tables.find(row.dataset);
    if (it == corpus.tables.end()) throw DataError(fmt::format("test dataset '{}' is not loaded", row.dataset));
    tests.push_back({row.replication, &it->second, row.cv_seed});
  }
  const auto rs = a.rs_dir.empty() ? std::vector<RsRecord>{} : read_rs_dir(a.rs_dir);
  const StrategyTable table =
      compare_strategies(ev, rs, standard_tool_defaults(config.space), tests, ev.folds, a.jobs);
  const Analysis analysis = analyze(table, corpus.metafeatures, config);
  const Manifest m = make_manifest("compare", corpus, cfg, seed);
  const std::string hash = ev.manifest_hash.empty() ? m.hash() : ev.manifest_hash;

  Artifacts all = render_report(table, analysis, corpus.metafeatures, {}, hash);
  const fs::path out(a.out);
  const fs::path dir = out.parent_path();
  write_text(out, all.at("table.csv"));
  for (const char* name : {"friedman.json", "nemenyi.json", "wilcoxon_summary.csv", "histogram.csv", "labels.csv"})
    if (all.count(name)) write_text(dir / name, all.at(name));
  write_manifest(manifest_path_for(out), m);

  const auto medians = table.medians();
  for (std::size_t j = 0; j < table.strategies.size(); ++j)
    std::cout << fmt::format("{:<14} median BAC {:.4f}\n", table.strategies[j], medians[j]);
  std::cout << fmt::format("Friedman chi2 = {:.4f}, p = {:.4g}; CD = {:.4f}\n", analysis.friedman.statistic,
                           analysis.friedman.p_value, analysis.nemenyi.critical_difference);
  return 0;
}

// ---------------------------------------------------------- metafeatures

int run_metafeatures(const std::string& data_dir, const std::string& out) {
  const Corpus corpus = load_corpus(data_dir);
  const Manifest m = make_manifest("metafeatures", corpus, {}, 0);
  write_text(out, stamp_text(metafeatures_csv(corpus.metafeatures), m.hash()));
  write_manifest(manifest_path_for(out), m);
  std::cout << fmt::format("{} datasets -> {}\n", corpus.tables.size(), out);
  return 0;
}

// ------------------------------------------------------------- metalearn

struct MetalearnArgs {
  std::string mf, labels, out, rules, config;
  Knobs knobs;
};

int run_metalearn(const MetalearnArgs& a) {
  const Config cfg = a.knobs.resolve(a.config);
  const auto config = ExperimentConfig::from_config(cfg);
  const std::string mf_text = read_text(a.mf);
  const std::string labels_text = read_text(a.labels);
  const auto mf = read_metafeatures_csv(mf_text);
  const auto comparisons = read_labels_csv(labels_text);
  std::vector<std::pair<std::string, MetaFeatureVector>> pairs(mf.begin(), mf.end());
  const auto labeled = label_meta_examples(pairs, comparisons, config.alpha);
  for (const auto& name : labeled.excluded) std::cerr << "excluded (no label): " << name << "\n";
  const TreeModel tree = train_tree(labeled.examples, config.tree);
  const auto rules = extract_rules(tree);
  const LooResult loo = loo_cv(labeled.examples, config.tree);

  std::string hash = stamped_hash(labels_text);
  if (hash.empty()) hash = stamped_hash(mf_text);
  write_text(a.out, with_manifest_hash(to_json(tree), hash));
  if (!a.rules.empty()) write_text(a.rules, stamp_text(format_rules(tree, rules), hash));
  std::cout << fmt::format("{} meta-examples, {} leaves; LOO BAC {:.4f} (majority baseline {:.4f})\n",
                           labeled.examples.size(), tree.leaf_count(), loo.bac, loo.baseline_bac);
  return 0;
}

// ---------------------------------------------------------------- report

struct ReportArgs {
  std::vector<std::string> pools;
  std::string data_dir, out, pool_eval, rs_dir, config;
  bool force = false;
  SeedFlag seed;
  Knobs knobs;
  unsigned jobs = 1;
};

int run_report(const ReportArgs& a) {
  const Config cfg = a.knobs.resolve(a.config);
  const auto config = ExperimentConfig::from_config(cfg);
  const std::uint64_t seed = a.seed.resolve(cfg);
  const Corpus corpus = load_corpus(a.data_dir);

  std::vector<SettingsPool> pools;
  for (const auto& p : a.pools) pools.push_back(read_pool(p));
  std::optional<PoolEvaluation> given_eval;
  if (!a.pool_eval.empty()) given_eval = pool_eval_from_json(read_text(a.pool_eval));
  std::vector<RsRecord> rs;
  std::set<std::string> hashes;
  if (!a.rs_dir.empty()) {
    rs = read_rs_dir(a.rs_dir);
    for (const auto& entry : fs::directory_iterator(a.rs_dir))
      if (entry.path().extension() == ".json" && !entry.path().filename().string().ends_with("manifest.json"))
        hashes.insert(embedded_manifest_hash(read_text(entry.path())));
  }
  for (const auto& p : pools) hashes.insert(p.manifest_hash);
  if (given_eval) hashes.insert(given_eval->manifest_hash);
  hashes.erase("");
  if (hashes.size() > 1 && !a.force)
    throw DataError(fmt::format("artifacts come from {} different manifests; rerun them together or pass --force",
                                hashes.size()));

  const SettingsPool& primary = pools.front();
  const auto tests = make_test_cases(primary.plan, corpus, seed);
  const PoolEvalOptions eval_options{config.selection, config.scope, a.jobs};
  const PoolEvaluation ev = given_eval ? *given_eval : evaluate_pool(primary, tests, config.folds, eval_options);
  std::vector<SampleSizePoint> points{sample_size_point(primary.sample_k, ev)};
  for (std::size_t i = 1; i < pools.size(); ++i)
    points.push_back(sample_size_point(pools[i].sample_k, evaluate_pool(pools[i], tests, config.folds, eval_options)));
  std::sort(points.begin(), points.end(), [](const auto& x, const auto& y) { return x.k < y.k; });

  if (rs.empty()) rs = run_random_search(tests, config, seed, a.jobs);
  std::vector<TestCase> eval_tests;
  for (const auto& row : ev.rows) {
    auto it = corpus.tables.find(row.dataset);
    if (it == corpus.tables.end()) throw DataError(fmt::format("test dataset '{}' is not loaded", row.dataset));
    eval_tests.push_back({row.replication, &it->second, row.cv_seed});
  }
  const StrategyTable table =
      compare_strategies(ev, rs, standard_tool_defaults(config.space), eval_tests, ev.folds, a.jobs);
  const Analysis analysis = analyze(table, corpus.metafeatures, config);

  const Manifest m = make_manifest("report", corpus, cfg, seed);
  Artifacts files = render_report(table, analysis, corpus.metafeatures, points, m.hash());
  PoolEvaluation stamped = ev;
  stamped.manifest_hash = m.hash();
  files["pool_eval.json"] = to_json(stamped);
  write_artifacts(a.out, files, m);

  const auto medians = table.medians();
  for (std::size_t j = 0; j < table.strategies.size(); ++j)
    std::cout << fmt::format("{:<14} median BAC {:.4f}\n", table.strategies[j], medians[j]);
  std::cout << fmt::format("report -> {}\n", a.out);
  return 0;
}

void add_experiment_knobs(CLI::App* app, Knobs& knobs, bool mining) {
  knobs.add(app, "--folds", "folds", "Cross-validation folds");
  knobs.add(app, "--selection", "selection", "Pool selection: oracle or validation");
  knobs.add(app, "--pool-scope", "pool_scope", "Pool entries per test case: replication or all");
  knobs.add(app, "--rs-budget", "rs_budget", "Random-search evaluations per test case");
  knobs.add(app, "--pairing", "pairing", "Wilcoxon pairing: folds or replications");
  knobs.add(app, "--alpha", "alpha", "Significance level (0.05 or 0.10)");
  if (!mining) return;
  knobs.add(app, "--replications", "replications", "Dataset-level resampling replications");
  knobs.add(app, "--k", "k", "Optimization sample size");
  knobs.add(app, "--pso-seeds", "pso_seeds", "PSO runs per replication");
  knobs.add(app, "--budget", "budget", "Fitness evaluations per PSO run");
  knobs.add(app, "--population", "population", "Swarm size");
  knobs.add(app, "--max-iterations", "max_iterations", "Generations per PSO run");
  knobs.add(app, "--warm-start", "warm_start", "weka or none");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mine, assess and explain optimized default SVM hyperparameters"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(version()));

  IngestArgs ingest_args;
  auto* ingest_cmd = app.add_subcommand("ingest", "Preprocess a CSV/ARFF file into a dataset JSON file");
  ingest_cmd->add_option("--input", ingest_args.input, "Source file")->required()->check(CLI::ExistingFile);
  ingest_cmd->add_option("--target", ingest_args.target, "Target column (default: last)");
  ingest_cmd->add_option("--out", ingest_args.out, "Output directory")->required();
  ingest_cmd->add_option("--min-class-count", ingest_args.min_class_count, "Smallest admissible class size");

  EvaluateArgs eval_args;
  auto* eval_cmd = app.add_subcommand("evaluate", "Cross-validate one setting on one dataset");
  eval_cmd->add_option("--dataset", eval_args.dataset, "Dataset file")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--log2-cost", eval_args.log2_cost, "log2 C")->required();
  eval_cmd->add_option("--log2-gamma", eval_args.log2_gamma, "log2 gamma")->required();
  eval_cmd->add_option("--folds", eval_args.folds, "Folds");
  eval_cmd->add_option("--out", eval_args.out, "Output file (default: stdout)");
  eval_args.seed.add(eval_cmd);

  TuneRsArgs rs_args;
  auto* rs_cmd = app.add_subcommand("tune-rs", "Per-dataset random search");
  rs_cmd->add_option("--dataset", rs_args.dataset, "Dataset file")->check(CLI::ExistingFile);
  rs_cmd->add_option("--out", rs_args.out, "Output file (default: stdout)");
  rs_cmd->add_option("--replication", rs_args.replication, "Replication id recorded with the result");
  rs_cmd->add_option("--cv-seed", rs_args.cv_seed, "Fold seed (default: --seed)");
  rs_cmd->add_option("--pool", rs_args.pool, "Pool whose plan defines the test cases (batch mode)");
  rs_cmd->add_option("--data-dir", rs_args.data_dir, "Dataset directory (batch mode)");
  rs_cmd->add_option("--out-dir", rs_args.out_dir, "Output directory (batch mode)");
  rs_cmd->add_option("--config", rs_args.config, "key = value config file");
  rs_cmd->add_option("--jobs", rs_args.jobs, "Worker threads");
  rs_args.knobs.add(rs_cmd, "--budget", "rs_budget", "Evaluations");
  rs_args.knobs.add(rs_cmd, "--folds", "folds", "Folds");
  rs_args.seed.add(rs_cmd);

  OptimizeArgs opt_args;
  auto* opt_cmd = app.add_subcommand("optimize", "Mine a pool of optimized defaults with PSO");
  opt_cmd->add_option("--data-dir", opt_args.data_dir, "Dataset directory")->required();
  opt_cmd->add_option("--out", opt_args.out, "Pool file")->required();
  opt_cmd->add_option("--trace", opt_args.trace, "Write PSO traces as JSON lines");
  opt_cmd->add_option("--max-seconds", opt_args.max_seconds, "Wall-clock cut-off per PSO run (0: none)");
  opt_cmd->add_option("--config", opt_args.config, "key = value config file");
  opt_cmd->add_option("--jobs", opt_args.jobs, "Worker threads");
  add_experiment_knobs(opt_cmd, opt_args.knobs, true);
  opt_args.seed.add(opt_cmd);

  PoolEvalArgs pe_args;
  auto* pe_cmd = app.add_subcommand("pool-eval", "Assess every pool entry on the test datasets");
  pe_cmd->add_option("--pool", pe_args.pool, "Pool file")->required()->check(CLI::ExistingFile);
  pe_cmd->add_option("--data-dir", pe_args.data_dir, "Dataset directory")->required();
  pe_cmd->add_option("--out", pe_args.out, "Evaluation file")->required();
  pe_cmd->add_option("--config", pe_args.config, "key = value config file");
  pe_cmd->add_option("--jobs", pe_args.jobs, "Worker threads");
  add_experiment_knobs(pe_cmd, pe_args.knobs, false);
  pe_args.seed.add(pe_cmd);

  CompareArgs cmp_args;
  auto* cmp_cmd = app.add_subcommand("compare", "Strategy table and statistical comparison");
  cmp_cmd->add_option("--pool-eval", cmp_args.pool_eval, "Pool evaluation file")->required()->check(CLI::ExistingFile);
  cmp_cmd->add_option("--rs-dir", cmp_args.rs_dir, "Directory of random-search results");
  cmp_cmd->add_option("--data-dir", cmp_args.data_dir, "Dataset directory")->required();
  cmp_cmd->add_option("--out", cmp_args.out, "table.csv path; stats files go next to it")->required();
  cmp_cmd->add_option("--config", cmp_args.config, "key = value config file");
  cmp_cmd->add_option("--jobs", cmp_args.jobs, "Worker threads");
  add_experiment_knobs(cmp_cmd, cmp_args.knobs, false);
  cmp_args.seed.add(cmp_cmd);

  std::string mf_dir, mf_out;
  auto* mf_cmd = app.add_subcommand("metafeatures", "Meta-features of every dataset");
  mf_cmd->add_option("--data-dir", mf_dir, "Dataset directory")->required();
  mf_cmd->add_option("--out", mf_out, "CSV output")->required();

  MetalearnArgs ml_args;
  auto* ml_cmd = app.add_subcommand("metalearn", "Train the tune-vs-defaults decision tree");
  ml_cmd->add_option("--mf", ml_args.mf, "Meta-feature CSV")->required()->check(CLI::ExistingFile);
  ml_cmd->add_option("--labels", ml_args.labels, "labels.csv from compare")->required()->check(CLI::ExistingFile);
  ml_cmd->add_option("--out", ml_args.out, "Tree JSON")->required();
  ml_cmd->add_option("--rules", ml_args.rules, "Rules text file");
  ml_cmd->add_option("--config", ml_args.config, "key = value config file");
  ml_args.knobs.add(ml_cmd, "--alpha", "alpha", "Significance level of the labels");
  ml_args.knobs.add(ml_cmd, "--max-depth", "tree_max_depth", "Tree depth limit");
  ml_args.knobs.add(ml_cmd, "--min-leaf", "tree_min_leaf", "Minimum examples per leaf");

  ReportArgs rep_args;
  auto* rep_cmd = app.add_subcommand("report", "Assess pools and write every plot-ready export");
  rep_cmd->add_option("--pool", rep_args.pools, "Pool file; repeat for the sample-size curve")
      ->required()
      ->check(CLI::ExistingFile);
  rep_cmd->add_option("--data-dir", rep_args.data_dir, "Dataset directory")->required();
  rep_cmd->add_option("--out", rep_args.out, "Output directory")->required();
  rep_cmd->add_option("--pool-eval", rep_args.pool_eval, "Reuse a pool evaluation of the first pool");
  rep_cmd->add_option("--rs-dir", rep_args.rs_dir, "Reuse random-search results");
  rep_cmd->add_flag("--force", rep_args.force, "Accept artifacts with different manifest hashes");
  rep_cmd->add_option("--config", rep_args.config, "key = value config file");
  rep_cmd->add_option("--jobs", rep_args.jobs, "Worker threads");
  add_experiment_knobs(rep_cmd, rep_args.knobs, false);
  rep_args.seed.add(rep_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    if (app.get_subcommands().empty()) std::cerr << app.help();
    return code == 0 ? 2 : code;
  }

  try {
    if (*ingest_cmd) return run_ingest(ingest_args);
    if (*eval_cmd) return run_evaluate(eval_args);
    if (*rs_cmd) return run_tune_rs(rs_args);
    if (*opt_cmd) return run_optimize(opt_args);
    if (*pe_cmd) return run_pool_eval(pe_args);
    if (*cmp_cmd) return run_compare(cmp_args);
    if (*mf_cmd) return run_metafeatures(mf_dir, mf_out);
    if (*ml_cmd) return run_metalearn(ml_args);
    if (*rep_cmd) return run_report(rep_args);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
