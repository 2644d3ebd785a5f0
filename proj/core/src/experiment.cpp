#include "dminer/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "dminer/error.hpp"
#include "dminer/parallel.hpp"
#include "dminer/pool_io.hpp"
#include "dminer/random.hpp"

namespace dminer {

namespace fs = std::filesystem;

std::vector<std::size_t> ExperimentConfig::all_sample_sizes() const {
  auto ks = sample_sizes;
  ks.push_back(sample_k);
  std::sort(ks.begin(), ks.end());
  ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
  return ks;
}

void ExperimentConfig::validate() const {
  if (replications < 1) throw ConfigError("replications", "must be at least 1");
  if (sample_k < 1) throw ConfigError("k", "must be at least 1");
  if (pso_seeds < 1) throw ConfigError("pso_seeds", "must be at least 1");
  if (folds < 2) throw ConfigError("folds", "must be at least 2");
  if (rs_budget < 1) throw ConfigError("rs_budget", "must be at least 1");
  if (alpha != 0.05 && alpha != 0.10) throw ConfigError("alpha", "must be 0.05 or 0.10");
  if (!(histogram_bin > 0.0)) throw ConfigError("histogram_bin", "must be positive");
  if (tree.max_depth < 1) throw ConfigError("tree_max_depth", "must be at least 1");
  if (tree.min_leaf < 1) throw ConfigError("tree_min_leaf", "must be at least 1");
  swarm.validate();
  space.validate();
}

Config ExperimentConfig::to_config() const {
  Config c;
  c.set("replications", fmt::format("{}", replications));
  c.set("k", fmt::format("{}", sample_k));
  std::string sizes;
  for (std::size_t k : all_sample_sizes()) sizes += (sizes.empty() ? "" : ",") + fmt::format("{}", k);
  c.set("sample_sizes", sizes);
  c.set("pso_seeds", fmt::format("{}", pso_seeds));
  c.set("population", fmt::format("{}", swarm.population));
  c.set("max_iterations", fmt::format("{}", swarm.max_iterations));
  c.set("budget", fmt::format("{}", swarm.budget_evaluations));
  c.set("informants", fmt::format("{}", swarm.informant_count));
  c.set("warm_start", swarm.warm_start ? "weka" : "none");
  c.set("cost_lower", fmt::format("{}", space.cost.lower));
  c.set("cost_upper", fmt::format("{}", space.cost.upper));
  c.set("gamma_lower", fmt::format("{}", space.gamma.lower));
  c.set("gamma_upper", fmt::format("{}", space.gamma.upper));
  c.set("folds", fmt::format("{}", folds));
  c.set("rs_budget", fmt::format("{}", rs_budget));
  c.set("selection", to_string(selection));
  c.set("pool_scope", to_string(scope));
  c.set("pairing", pairing == Pairing::folds ? "folds" : "replications");
  c.set("alpha", fmt::format("{}", alpha));
  c.set("histogram_bin", fmt::format("{}", histogram_bin));
  c.set("tree_max_depth", fmt::format("{}", tree.max_depth));
  c.set("tree_min_leaf", fmt::format("{}", tree.min_leaf));
  return c;
}

ExperimentConfig ExperimentConfig::from_config(const Config& c) {
  ExperimentConfig e;
  e.replications = c.get_size("replications", e.replications);
  e.sample_k = c.get_size("k", e.sample_k);
  e.sample_sizes = c.get_sizes("sample_sizes", {});
  e.pso_seeds = c.get_size("pso_seeds", e.pso_seeds);
  e.swarm.population = c.get_size("population", e.swarm.population);
  e.swarm.max_iterations = c.get_size("max_iterations", e.swarm.max_iterations);
  e.swarm.budget_evaluations = c.get_size("budget", e.swarm.budget_evaluations);
  e.swarm.informant_count = c.get_size("informants", e.swarm.informant_count);
  const auto warm = c.get_string("warm_start", "weka");
  if (warm == "none")
    e.swarm.warm_start.reset();
  else if (warm != "weka")
    throw ConfigError("warm_start", fmt::format("expected weka or none, got '{}'", warm));
  e.space.cost = {c.get_double("cost_lower", e.space.cost.lower), c.get_double("cost_upper", e.space.cost.upper)};
  e.space.gamma = {c.get_double("gamma_lower", e.space.gamma.lower),
                   c.get_double("gamma_upper", e.space.gamma.upper)};
  e.folds = c.get_size("folds", e.folds);
  e.rs_budget = c.get_size("rs_budget", e.rs_budget);
  e.selection = selection_from_string(c.get_string("selection", to_string(e.selection)));
  e.scope = pool_scope_from_string(c.get_string("pool_scope", to_string(e.scope)));
  const auto pairing = c.get_string("pairing", "folds");
  if (pairing == "folds")
    e.pairing = Pairing::folds;
  else if (pairing == "replications")
    e.pairing = Pairing::replications;
  else
    throw ConfigError("pairing", fmt::format("expected folds or replications, got '{}'", pairing));
  e.alpha = c.get_double("alpha", e.alpha);
  e.histogram_bin = c.get_double("histogram_bin", e.histogram_bin);
  e.tree.max_depth = c.get_size("tree_max_depth", e.tree.max_depth);
  e.tree.min_leaf = c.get_size("tree_min_leaf", e.tree.min_leaf);
  e.validate();
  return e;
}

namespace seeds {
std::uint64_t plan(std::uint64_t master) { return derive_seed(master, "plan"); }
std::uint64_t samples(std::uint64_t master) { return derive_seed(master, "samples"); }
std::uint64_t pso(std::uint64_t master, std::size_t run) { return derive_seed(master, "pso", run); }
std::uint64_t fitness_cv(std::uint64_t master) { return derive_seed(master, "cv-opt"); }
std::uint64_t test_cv(std::uint64_t master, std::size_t replication) {
  return derive_seed(master, "cv-test", replication);
}
std::uint64_t rs(std::uint64_t master, std::size_t replication, const std::string& dataset) {
  return derive_seed(derive_seed(master, "rs", replication), dataset);
}
}  // namespace seeds

std::vector<TestCase> make_test_cases(const std::optional<ResamplingPlan>& plan, const Corpus& corpus,
                                      std::uint64_t master_seed) {
  std::vector<TestCase> out;
  auto table_of = [&](const std::string& name) {
    auto it = corpus.tables.find(name);
    if (it == corpus.tables.end()) throw DataError(fmt::format("test dataset '{}' is not loaded", name));
    return &it->second;
  };
  if (!plan) {
    for (const auto& [name, table] : corpus.tables) out.push_back({1, &table, seeds::test_cv(master_seed, 1)});
    return out;
  }
  for (const auto& rep : plan->replications)
    for (const auto& name : rep.test) out.push_back({rep.id, table_of(name), seeds::test_cv(master_seed, rep.id)});
  return out;
}

std::vector<RsRecord> run_random_search(const std::vector<TestCase>& tests, const ExperimentConfig& config,
                                        std::uint64_t master_seed, unsigned jobs) {
  std::vector<RsRecord> out;
  const CvOptions options{jobs, {}};
  for (const auto& tc : tests) {
    RsRecord record;
    record.replication = tc.replication;
    record.result = random_search(*tc.table, config.space, config.rs_budget, config.folds,
                                  seeds::rs(master_seed, tc.replication, tc.table->name), tc.cv_seed, options);
    out.push_back(std::move(record));
  }
  return out;
}

Analysis analyze(const StrategyTable& table, const std::map<std::string, MetaFeatureVector>& metafeatures,
                 const ExperimentConfig& config) {
  if (table.rows.size() < 2) throw DataError("analysis needs at least 2 test cases");
  Analysis a;
  a.friedman = friedman(table.values());
  a.nemenyi = nemenyi(table.strategies, a.friedman.mean_ranks, table.rows.size(), config.alpha);
  a.rs_vs_all = best_pair_protocol(table, config.alpha, config.pairing);

  std::vector<std::string> tools;
  for (const auto& s : table.strategies)
    if (s != strategy::default_opt && s != strategy::random_search) tools.push_back(s);
  for (const auto& t : tools)
    a.histograms.emplace_back(t, improvement_histogram(table, std::string(strategy::default_opt), t,
                                                       config.histogram_bin));

  if (!table.has_strategy(strategy::random_search)) return a;
  std::vector<std::string> rs_and_tools{std::string(strategy::random_search)};
  rs_and_tools.insert(rs_and_tools.end(), tools.begin(), tools.end());
  if (rs_and_tools.size() >= 2) a.rs_vs_tools = best_pair_protocol(table.select(rs_and_tools), config.alpha, config.pairing);

  a.comparisons = tune_comparisons(table, config.pairing);
  std::vector<std::pair<std::string, MetaFeatureVector>> mf(metafeatures.begin(), metafeatures.end());
  a.labeled = label_meta_examples(mf, a.comparisons, config.alpha);
  if (a.labeled.examples.size() >= 2) {
    a.tree = train_tree(a.labeled.examples, config.tree);
    a.rules = extract_rules(*a.tree);
    a.loo = loo_cv(a.labeled.examples, config.tree);
  }
  return a;
}

SampleSizePoint sample_size_point(std::size_t k, const PoolEvaluation& evaluation) {
  SampleSizePoint p;
  p.k = k;
  std::vector<double> bacs;
  for (const auto& row : evaluation.rows) bacs.push_back(row.best_bac);
  p.n = bacs.size();
  if (!bacs.empty()) {
    double s = 0.0;
    for (double b : bacs) s += b;
    p.mean_bac = s / static_cast<double>(bacs.size());
    p.median_bac = median(bacs);
  }
  return p;
}

ExperimentResult run_experiment(const Corpus& corpus, const ExperimentConfig& config, std::uint64_t master_seed,
                                unsigned jobs) {
  config.validate();
  ExperimentResult r;
  r.plan = build_plan(corpus.names(), config.replications, seeds::plan(master_seed));
  const auto ks = config.all_sample_sizes();
  r.samples = choose_samples(r.plan, ks, seeds::samples(master_seed));

  MiningConfig mining;
  mining.space = config.space;
  mining.swarm = config.swarm;
  mining.folds = config.folds;
  mining.cv_seed = seeds::fitness_cv(master_seed);
  mining.jobs = jobs;
  for (std::size_t i = 0; i < config.pso_seeds; ++i) mining.pso_seeds.push_back(seeds::pso(master_seed, i));

  const auto tests = make_test_cases(r.plan, corpus, master_seed);
  const PoolEvalOptions eval_options{config.selection, config.scope, jobs};
  for (std::size_t k : ks) {
    mining.sample_k = k;
    std::vector<MiningRun> runs;
    auto pool = mine_defaults(r.plan, r.samples, corpus.tables, mining, &runs);
    r.evaluations[k] = evaluate_pool(pool, tests, config.folds, eval_options);
    if (k == config.sample_k) r.runs = std::move(runs);
    r.pools[k] = std::move(pool);
  }

  r.rs = run_random_search(tests, config, master_seed, jobs);
  r.table = compare_strategies(r.evaluations.at(config.sample_k), r.rs, standard_tool_defaults(config.space), tests,
                               config.folds, jobs);
  r.analysis = analyze(r.table, corpus.metafeatures, config);
  return r;
}

Manifest make_manifest(const std::string& command, const Corpus& corpus, const Config& config,
                       std::uint64_t master_seed) {
  Manifest m;
  m.command = command;
  m.master_seed = master_seed;
  m.config = config;
  m.datasets = corpus.hashes;
  m.tool_version = version();
  m.created_at = utc_timestamp();
  return m;
}

std::string stamp_text(const std::string& text, const std::string& hash) {
  return fmt::format("# manifest_hash={}\n", hash) + text;
}

std::string strip_comments(const std::string& text) {
  std::size_t pos = 0;
  while (pos < text.size() && text[pos] == '#') {
    const auto nl = text.find('\n', pos);
    if (nl == std::string::npos) return {};
    pos = nl + 1;
  }
  return text.substr(pos);
}

std::string stamped_hash(const std::string& text) {
  static const std::string prefix = "# manifest_hash=";
  if (text.rfind(prefix, 0) != 0) return {};
  const auto nl = text.find('\n');
  return text.substr(prefix.size(), (nl == std::string::npos ? text.size() : nl) - prefix.size());
}

namespace {

std::string fmt_optional(const std::optional<double>& v) { return v ? fmt::format("{}", *v) : std::string{}; }

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text, const std::vector<std::string>& header,
                                               const char* what) {
  std::istringstream in(strip_comments(text));
  std::string line;
  if (!std::getline(in, line)) throw DataError(fmt::format("{}: empty file", what));
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (split_csv_line(line) != header) throw DataError(fmt::format("{}: unexpected header '{}'", what, line));
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = split_csv_line(line);
    if (cells.size() != header.size())
      throw DataError(fmt::format("{}: expected {} cells in '{}'", what, header.size(), line));
    rows.push_back(std::move(cells));
  }
  return rows;
}

double to_double(const std::string& s, const char* what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw DataError(fmt::format("{}: '{}' is not a number", what, s));
  }
}

std::string histograms_csv(const Analysis& a) {
  std::string out = "comparison,lower,upper,count,sign,high_improvement\n";
  for (const auto& [tool, bins] : a.histograms) {
    std::istringstream in(histogram_csv(bins));
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) out += fmt::format("{}-vs-{},{}\n", strategy::default_opt, tool, line);
  }
  return out;
}

std::string loo_json(const LooResult& loo, const std::string& hash) {
  nlohmann::ordered_json j;
  j["schema_version"] = 1;
  j["manifest_hash"] = hash;
  j["classes"] = {"default.opt", "RS"};
  auto matrix = [](const ConfusionMatrix& cm) {
    auto rows = nlohmann::ordered_json::array();
    for (std::size_t t = 0; t < cm.n_classes(); ++t) {
      std::vector<std::size_t> r;
      for (std::size_t p = 0; p < cm.n_classes(); ++p) r.push_back(cm(t, p));
      rows.push_back(r);
    }
    return rows;
  };
  j["bac"] = loo.bac;
  j["confusion"] = matrix(loo.confusion);
  j["baseline_bac"] = loo.baseline_bac;
  j["baseline_confusion"] = matrix(loo.baseline_confusion);
  return j.dump(2) + "\n";
}

}  // namespace

std::string metafeatures_csv(const std::map<std::string, MetaFeatureVector>& metafeatures) {
  std::string out = "dataset";
  for (const auto& n : MetaFeatureVector::names()) out += "," + n;
  out += "\n";
  for (const auto& [name, mf] : metafeatures) {
    out += name;
    for (const auto& v : mf.optional_values()) out += "," + fmt_optional(v);
    out += "\n";
  }
  return out;
}

std::map<std::string, MetaFeatureVector> read_metafeatures_csv(const std::string& text) {
  std::vector<std::string> header{"dataset"};
  for (const auto& n : MetaFeatureVector::names()) header.push_back(n);
  std::map<std::string, MetaFeatureVector> out;
  for (const auto& row : csv_rows(text, header, "mf.csv")) {
    std::vector<std::optional<double>> values;
    for (std::size_t i = 1; i < row.size(); ++i)
      values.push_back(row[i].empty() ? std::nullopt : std::optional<double>(to_double(row[i], "mf.csv")));
    out[row[0]] = MetaFeatureVector::from_values(values);
  }
  return out;
}

std::string labels_csv(const std::vector<TuneComparison>& comparisons, double alpha) {
  std::string out = "dataset,rs_bac,opt_bac,p_value,label\n";
  for (const auto& c : comparisons)
    out += fmt::format("{},{},{},{},{}\n", c.dataset, c.rs_bac, c.opt_bac, c.p_value, to_string(label_for(c, alpha)));
  return out;
}

std::vector<TuneComparison> read_labels_csv(const std::string& text) {
  std::vector<TuneComparison> out;
  for (const auto& row : csv_rows(text, {"dataset", "rs_bac", "opt_bac", "p_value", "label"}, "labels.csv"))
    out.push_back({row[0], to_double(row[1], "labels.csv"), to_double(row[2], "labels.csv"),
                   to_double(row[3], "labels.csv")});
  return out;
}

std::string sample_size_csv(const std::vector<SampleSizePoint>& points) {
  std::string out = "k,mean_bac,median_bac,n\n";
  for (const auto& p : points) out += fmt::format("{},{},{},{}\n", p.k, p.mean_bac, p.median_bac, p.n);
  return out;
}

Artifacts render_report(const StrategyTable& table, const Analysis& analysis,
                        const std::map<std::string, MetaFeatureVector>& metafeatures,
                        const std::vector<SampleSizePoint>& sample_sizes, const std::string& hash) {
  Artifacts out;
  out["table.csv"] = stamp_text(to_csv(table), hash);
  out["violin.csv"] = stamp_text(to_violin_csv(table), hash);
  out["friedman.json"] = with_manifest_hash(to_json(analysis.friedman, table.strategies), hash);
  out["nemenyi.json"] = with_manifest_hash(to_json(analysis.nemenyi), hash);
  const BestPairSummary empty{};
  out["wilcoxon_summary.csv"] = stamp_text(
      wilcoxon_summary_csv(analysis.rs_vs_tools ? *analysis.rs_vs_tools : empty, analysis.rs_vs_all, table.strategies),
      hash);
  out["histogram.csv"] = stamp_text(histograms_csv(analysis), hash);
  out["sample_size.csv"] = stamp_text(sample_size_csv(sample_sizes), hash);
  out["mf.csv"] = stamp_text(metafeatures_csv(metafeatures), hash);
  if (table.has_strategy(strategy::random_search))
    out["labels.csv"] = stamp_text(labels_csv(analysis.comparisons, analysis.rs_vs_all.alpha), hash);
  if (analysis.tree) {
    out["tree.json"] = with_manifest_hash(to_json(*analysis.tree), hash);
    out["rules.txt"] = stamp_text(format_rules(*analysis.tree, analysis.rules), hash);
  }
  if (analysis.loo) out["loo.json"] = loo_json(*analysis.loo, hash);
  return out;
}

Artifacts render_experiment(const ExperimentResult& r, const Corpus& corpus, const std::string& hash) {
  std::vector<SampleSizePoint> points;
  for (const auto& [k, ev] : r.evaluations) points.push_back(sample_size_point(k, ev));
  Artifacts out = render_report(r.table, r.analysis, corpus.metafeatures, points, hash);
  for (const auto& [k, pool] : r.pools) {
    SettingsPool stamped = pool;
    stamped.manifest_hash = hash;
    out[r.pools.size() == 1 ? "pool.json" : fmt::format("pool_k{}.json", k)] = to_json(stamped);
  }
  for (const auto& [k, ev] : r.evaluations) {
    PoolEvaluation stamped = ev;
    stamped.manifest_hash = hash;
    out[r.evaluations.size() == 1 ? "pool_eval.json" : fmt::format("pool_eval_k{}.json", k)] = to_json(stamped);
  }
  for (const auto& rec : r.rs) out["rs/" + rs_file_name(rec.replication, rec.result.dataset)] = to_json(rec, hash);
  std::string traces;
  for (const auto& run : r.runs) {
    std::istringstream in(to_jsonl(run.trace));
    std::string line;
    while (std::getline(in, line))
      traces += fmt::format("{{\"manifest_hash\":\"{}\",\"replication\":{},\"pso_seed\":{},{}\n", hash,
                            r.plan.replications[run.replication].id, run.pso_seed, line.substr(1));
  }
  out["traces.jsonl"] = traces;
  return out;
}

void write_artifacts(const fs::path& dir, const Artifacts& artifacts, const Manifest& manifest) {
  fs::create_directories(dir);
  for (const auto& [name, text] : artifacts) write_text(dir / name, text);
  write_text(dir / "manifest.json", manifest.to_json());
}

ExperimentResult rerun_from_manifest(const Manifest& manifest, const Corpus& corpus, unsigned jobs) {
  if (manifest.datasets != corpus.hashes) throw DataError("corpus does not match the manifest's dataset hashes");
  return run_experiment(corpus, ExperimentConfig::from_config(manifest.config), manifest.master_seed, jobs);
}

}  // namespace dminer
