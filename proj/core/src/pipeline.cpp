#include "dminer/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <fmt/format.h>

#include "dminer/error.hpp"
#include "dminer/parallel.hpp"
#include "dminer/random.hpp"

namespace dminer {

ResamplingPlan build_plan(std::vector<std::string> names, std::size_t replications, std::uint64_t seed) {
  if (names.size() < 2) throw ConfigError("datasets", "a resampling plan needs at least 2 datasets");
  if (replications < 1) throw ConfigError("replications", "must be at least 1");
  std::sort(names.begin(), names.end());
  if (std::adjacent_find(names.begin(), names.end()) != names.end())
    throw ConfigError("datasets", "dataset names must be unique");

  ResamplingPlan plan;
  plan.seed = seed;
  const std::size_t opt_size = (names.size() + 1) / 2;
  for (std::size_t r = 0; r < replications; ++r) {
    auto shuffled = names;
    Rng rng(derive_seed(seed, "split", r));
    rng.shuffle(std::span<std::string>(shuffled));
    Replication rep;
    rep.id = r + 1;
    rep.opt.assign(shuffled.begin(), shuffled.begin() + static_cast<std::ptrdiff_t>(opt_size));
    rep.test.assign(shuffled.begin() + static_cast<std::ptrdiff_t>(opt_size), shuffled.end());
    std::sort(rep.opt.begin(), rep.opt.end());
    std::sort(rep.test.begin(), rep.test.end());
    plan.replications.push_back(std::move(rep));
  }
  return plan;
}

const std::vector<std::string>& SampleSpec::sample(std::size_t replication, std::size_t k) const {
  const auto& per_k = samples.at(replication);
  auto it = per_k.find(k);
  if (it == per_k.end()) throw ConfigError("k", fmt::format("no sample of size {} in replication {}", k, replication));
  return it->second;
}

SampleSpec choose_samples(const ResamplingPlan& plan, std::vector<std::size_t> ks, std::uint64_t seed) {
  if (ks.empty()) throw ConfigError("k", "at least one sample size required");
  std::sort(ks.begin(), ks.end());
  ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
  if (ks.front() < 1) throw ConfigError("k", "sample sizes must be positive");

  SampleSpec spec;
  spec.ks = ks;
  for (std::size_t r = 0; r < plan.replications.size(); ++r) {
    const auto& rep = plan.replications[r];
    if (ks.back() > rep.opt.size())
      throw ConfigError("k", fmt::format("sample size {} exceeds |D_opt| = {} in replication {}", ks.back(),
                                         rep.opt.size(), rep.id));
    auto order = rep.opt;
    Rng rng(derive_seed(seed, "sample", r));
    rng.shuffle(std::span<std::string>(order));
    std::map<std::size_t, std::vector<std::string>> per_k;
    for (std::size_t k : ks) {
      std::vector<std::string> subset(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
      std::sort(subset.begin(), subset.end());
      per_k[k] = std::move(subset);
    }
    spec.samples.push_back(std::move(per_k));
  }
  return spec;
}

void SettingsPool::sort() {
  std::stable_sort(entries.begin(), entries.end(),
                   [](const PoolEntry& a, const PoolEntry& b) { return a.fitness > b.fitness; });
}

std::size_t SettingsPool::unique_settings() const {
  std::set<std::pair<double, double>> points;
  for (const auto& e : entries) points.emplace(e.hp.log2_cost, e.hp.log2_gamma);
  return points.size();
}

std::uint64_t run_seed(std::uint64_t pso_seed, std::size_t replication) {
  return derive_seed(pso_seed, "replication", replication);
}

SettingsPool mine_defaults(const ResamplingPlan& plan, const SampleSpec& samples, const TableSet& tables,
                           const MiningConfig& config, std::vector<MiningRun>* runs) {
  if (config.pso_seeds.empty()) throw ConfigError("pso_seeds", "at least one PSO seed required");
  config.swarm.validate();
  config.space.validate();

  // Fold plans (and distance caches) per replication, shared by every run on it.
  std::vector<std::vector<CvPlan>> cv_plans(plan.replications.size());
  for (std::size_t r = 0; r < plan.replications.size(); ++r) {
    for (const auto& name : samples.sample(r, config.sample_k)) {
      auto it = tables.find(name);
      if (it == tables.end()) throw DataError(fmt::format("dataset '{}' is not loaded", name));
      cv_plans[r].emplace_back(it->second, config.folds, config.cv_seed);
    }
  }

  std::vector<MiningRun> jobs;
  for (std::size_t r = 0; r < plan.replications.size(); ++r)
    for (std::uint64_t seed : config.pso_seeds) jobs.push_back({r, seed, {}, {}});

  const CvOptions cv_options{1, {}};
  parallel_for(jobs.size(), config.jobs, [&](std::size_t j) {
    auto& job = jobs[j];
    SwarmConfig swarm = config.swarm;
    swarm.seed = run_seed(job.pso_seed, plan.replications[job.replication].id);
    const auto& plans = cv_plans[job.replication];
    FitnessFn fitness = [&](const HPSetting& hp) { return shared_fitness(plans, hp, cv_options).value; };
    try {
      job.trace = pso_run(swarm, config.space, fitness);
    } catch (const OptimizationError& e) {
      job.trace = e.trace();
      job.error = e.what();
    } catch (const Error& e) {
      job.error = e.what();
    }
  });

  SettingsPool pool;
  pool.sample_k = config.sample_k;
  pool.plan = plan;
  pool.folds = config.folds;
  pool.cv_seed = config.cv_seed;
  for (const auto& job : jobs) {
    const auto rep_id = plan.replications[job.replication].id;
    if (!job.error.empty()) {
      pool.partial = true;
      pool.failures.push_back(fmt::format("replication {} seed {}: {}", rep_id, job.pso_seed, job.error));
      continue;
    }
    PoolEntry entry;
    entry.hp = job.trace.best;
    entry.hp.provenance = Provenance::pso;
    entry.hp.origin = fmt::format("replication {} seed {}", rep_id, job.pso_seed);
    entry.fitness = job.trace.best_fitness;
    entry.replication = rep_id;
    entry.pso_seed = job.pso_seed;
    pool.entries.push_back(std::move(entry));
  }
  pool.sort();
  if (runs) *runs = std::move(jobs);
  return pool;
}

const char* to_string(SelectionProtocol s) { return s == SelectionProtocol::oracle ? "oracle" : "validation"; }

SelectionProtocol selection_from_string(const std::string& s) {
  if (s == "oracle") return SelectionProtocol::oracle;
  if (s == "validation") return SelectionProtocol::validation;
  throw ConfigError("selection", fmt::format("expected oracle or validation, got '{}'", s));
}

const char* to_string(PoolScope s) { return s == PoolScope::replication ? "replication" : "all"; }

PoolScope pool_scope_from_string(const std::string& s) {
  if (s == "replication") return PoolScope::replication;
  if (s == "all") return PoolScope::all;
  throw ConfigError("pool_scope", fmt::format("expected replication or all, got '{}'", s));
}

namespace {

std::vector<double> folds_with_parity(const std::vector<double>& per_fold, std::size_t parity) {
  std::vector<double> out;
  for (std::size_t f = parity; f < per_fold.size(); f += 2) out.push_back(per_fold[f]);
  return out;
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

}  // namespace

PoolEvaluation evaluate_pool(const SettingsPool& pool, const std::vector<TestCase>& tests, std::size_t folds,
                             const PoolEvalOptions& options) {
  if (pool.entries.empty()) throw DataError("evaluate_pool: empty pool");
  if (options.selection == SelectionProtocol::validation && folds < 2)
    throw ConfigError("folds", "validation selection needs at least 2 folds");

  PoolEvaluation out;
  out.selection = options.selection;
  out.scope = options.scope;
  out.folds = folds;
  out.manifest_hash = pool.manifest_hash;

  const bool per_replication = options.scope == PoolScope::replication && pool.plan.has_value();
  struct Task {
    std::size_t row;
    std::size_t slot;
  };
  std::vector<Task> tasks;
  std::vector<CvPlan> plans;
  plans.reserve(tests.size());
  for (const auto& tc : tests) {
    PoolEvalRow row;
    row.dataset = tc.table->name;
    row.replication = tc.replication;
    row.cv_seed = tc.cv_seed;
    for (std::size_t i = 0; i < pool.entries.size(); ++i)
      if (!per_replication || pool.entries[i].replication == tc.replication) row.candidates.push_back(i);
    if (row.candidates.empty())
      throw DataError(fmt::format("evaluate_pool: no pool entries for replication {}", tc.replication));
    row.results.resize(row.candidates.size());
    for (std::size_t s = 0; s < row.candidates.size(); ++s) tasks.push_back({out.rows.size(), s});
    out.rows.push_back(std::move(row));
    plans.emplace_back(*tc.table, folds, tc.cv_seed);
  }

  const CvOptions inner{1, {}};
  parallel_for(tasks.size(), options.jobs, [&](std::size_t t) {
    auto& row = out.rows[tasks[t].row];
    const auto& entry = pool.entries[row.candidates[tasks[t].slot]];
    try {
      row.results[tasks[t].slot] = cross_validate(plans[tasks[t].row], entry.hp, inner);
    } catch (const Error& e) {
      throw DataError(fmt::format("pool entry {} on {}: {}", row.candidates[tasks[t].slot], row.dataset, e.what()));
    }
  });

  for (auto& row : out.rows) {
    auto selection_score = [&](std::size_t s) {
      return options.selection == SelectionProtocol::oracle ? row.results[s].mean_bac
                                                            : mean_of(folds_with_parity(row.results[s].per_fold_bac, 0));
    };
    std::size_t best = 0;
    for (std::size_t s = 1; s < row.candidates.size(); ++s) {
      const double a = selection_score(s);
      const double b = selection_score(best);
      if (a > b || (a == b && pool.entries[row.candidates[s]].fitness > pool.entries[row.candidates[best]].fitness))
        best = s;
    }
    row.best = row.candidates[best];
    if (options.selection == SelectionProtocol::oracle) {
      row.best_per_fold = row.results[best].per_fold_bac;
      row.best_bac = row.results[best].mean_bac;
    } else {
      row.best_per_fold = folds_with_parity(row.results[best].per_fold_bac, 1);
      row.best_bac = mean_of(row.best_per_fold);
    }
  }
  return out;
}

std::vector<ToolDefault> standard_tool_defaults(const HPSpace& space) {
  auto clamp = [space](std::string origin, double log2_gamma) {
    return HPSetting{space.cost.clamp(0.0), space.gamma.clamp(log2_gamma), Provenance::tool_default, std::move(origin)};
  };
  std::vector<ToolDefault> out;
  out.push_back({std::string(strategy::default_mlr), [clamp](const DataTable& t) {
                   return clamp("mlr", -std::log2(static_cast<double>(t.n_features())));
                 }});
  out.push_back({std::string(strategy::default_weka), [clamp](const DataTable&) {
                   return clamp("weka", std::log2(0.01));
                 }});
  out.push_back({std::string(strategy::default_skl), [clamp](const DataTable& t) {
                   const auto& data = t.features.data();
                   double mean = 0.0;
                   for (double v : data) mean += v;
                   mean /= static_cast<double>(data.size());
                   double var = 0.0;
                   for (double v : data) var += (v - mean) * (v - mean);
                   var /= static_cast<double>(data.size());
                   const double denom = static_cast<double>(t.n_features()) * var;
                   return clamp("scikit-learn", denom > 0.0 ? -std::log2(denom) : 0.0);
                 }});
  return out;
}

StrategyTable compare_strategies(const PoolEvaluation& pool_eval, const std::vector<RsRecord>& rs,
                                 const std::vector<ToolDefault>& tools, const std::vector<TestCase>& tests,
                                 std::size_t folds, unsigned jobs) {
  StrategyTable table;
  table.strategies.push_back(pool_eval.strategy);
  const bool with_rs = !rs.empty();
  if (with_rs) table.strategies.emplace_back(strategy::random_search);
  for (const auto& t : tools) table.strategies.push_back(t.strategy);

  const bool odd_only = pool_eval.selection == SelectionProtocol::validation;
  auto cell_from = [&](const std::vector<double>& per_fold) {
    StrategyCell c;
    c.per_fold = odd_only ? folds_with_parity(per_fold, 1) : per_fold;
    c.bac = mean_of(c.per_fold);
    return c;
  };

  // Tool defaults: one CV per (test case, tool).
  std::vector<std::vector<StrategyCell>> tool_cells(tests.size(), std::vector<StrategyCell>(tools.size()));
  std::vector<CvPlan> plans;
  plans.reserve(tests.size());
  for (const auto& tc : tests) plans.emplace_back(*tc.table, folds, tc.cv_seed);
  const CvOptions inner{1, {}};
  parallel_for(tests.size() * tools.size(), jobs, [&](std::size_t t) {
    const std::size_t i = t / tools.size();
    const std::size_t j = t % tools.size();
    const auto cv = cross_validate(plans[i], tools[j].setting(*tests[i].table), inner);
    tool_cells[i][j] = cell_from(cv.per_fold_bac);
  });

  for (std::size_t i = 0; i < tests.size(); ++i) {
    const auto& tc = tests[i];
    const auto& name = tc.table->name;
    StrategyRow row{name, tc.replication, {}};

    auto pe = std::find_if(pool_eval.rows.begin(), pool_eval.rows.end(), [&](const PoolEvalRow& r) {
      return r.dataset == name && r.replication == tc.replication;
    });
    if (pe == pool_eval.rows.end())
      throw DataError(fmt::format("missing strategy column '{}' for {} (replication {})", pool_eval.strategy, name,
                                  tc.replication));
    if (pe->cv_seed != tc.cv_seed)
      throw DataError(fmt::format("{}: pool evaluation used different folds (cv seed {} vs {})", name, pe->cv_seed,
                                  tc.cv_seed));
    StrategyCell opt;
    opt.per_fold = pe->best_per_fold;
    opt.bac = pe->best_bac;
    row.cells.push_back(std::move(opt));

    if (with_rs) {
      auto it = std::find_if(rs.begin(), rs.end(), [&](const RsRecord& r) {
        return r.result.dataset == name && r.replication == tc.replication;
      });
      if (it == rs.end())
        throw DataError(fmt::format("missing strategy column '{}' for {} (replication {})", strategy::random_search,
                                    name, tc.replication));
      if (it->result.cv_seed != tc.cv_seed)
        throw DataError(fmt::format("{}: random search used different folds (cv seed {} vs {})", name,
                                    it->result.cv_seed, tc.cv_seed));
      row.cells.push_back(cell_from(it->result.best().per_fold_bac));
    }
    for (auto& c : tool_cells[i]) row.cells.push_back(std::move(c));
    table.rows.push_back(std::move(row));
  }
  table.validate();
  return table;
}

}  // namespace dminer
