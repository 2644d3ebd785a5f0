#include "dminer/pool_io.hpp"

#include <algorithm>

#include <fmt/format.h>
#include <json.hpp>

#include "dminer/dataset_io.hpp"
#include "dminer/error.hpp"

namespace dminer {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

ordered_json setting_json(const HPSetting& hp) {
  ordered_json j;
  j["log2_cost"] = hp.log2_cost;
  j["log2_gamma"] = hp.log2_gamma;
  j["provenance"] = to_string(hp.provenance);
  j["origin"] = hp.origin;
  return j;
}

HPSetting setting_from(const ordered_json& j, Provenance fallback) {
  HPSetting hp;
  hp.log2_cost = j.at("log2_cost").get<double>();
  hp.log2_gamma = j.at("log2_gamma").get<double>();
  hp.provenance = j.contains("provenance") ? provenance_from_string(j["provenance"].get<std::string>()) : fallback;
  hp.origin = j.value("origin", std::string{});
  validate(hp);
  return hp;
}

ordered_json cv_json(const CvResult& cv) {
  ordered_json j = setting_json(cv.hp);
  j["mean_bac"] = cv.mean_bac;
  j["per_fold_bac"] = cv.per_fold_bac;
  j["converged"] = cv.converged;
  return j;
}

CvResult cv_from(const ordered_json& j, const std::string& dataset, std::uint64_t seed) {
  CvResult cv;
  cv.dataset = dataset;
  cv.hp = setting_from(j, Provenance::random_search);
  cv.mean_bac = j.at("mean_bac").get<double>();
  cv.per_fold_bac = j.at("per_fold_bac").get<std::vector<double>>();
  cv.converged = j.value("converged", true);
  cv.seed = seed;
  return cv;
}

ordered_json parse(const std::string& text, const char* what) {
  try {
    auto j = ordered_json::parse(text);
    if (!j.is_object()) throw DataError(fmt::format("{}: expected a JSON object", what));
    if (j.value("schema_version", 0) != 1) throw DataError(fmt::format("{}: unsupported schema_version", what));
    return j;
  } catch (const ordered_json::exception& e) {
    throw DataError(fmt::format("{}: {}", what, e.what()));
  }
}

template <typename F>
auto guarded(const char* what, F&& f) {
  try {
    return f();
  } catch (const ordered_json::exception& e) {
    throw DataError(fmt::format("{}: {}", what, e.what()));
  }
}

}  // namespace

std::string to_json(const SettingsPool& pool) {
  ordered_json j;
  j["schema_version"] = 1;
  j["manifest_hash"] = pool.manifest_hash;
  j["sample_k"] = pool.sample_k;
  j["partial"] = pool.partial;
  j["failures"] = pool.failures;
  if (pool.plan) {
    ordered_json plan;
    plan["seed"] = pool.plan->seed;
    auto reps = ordered_json::array();
    for (const auto& r : pool.plan->replications) reps.push_back({{"id", r.id}, {"opt", r.opt}, {"test", r.test}});
    plan["replications"] = std::move(reps);
    j["plan"] = std::move(plan);
  }
  j["folds"] = pool.folds;
  j["cv_seed"] = pool.cv_seed;
  auto entries = ordered_json::array();
  for (const auto& e : pool.entries) {
    ordered_json o;
    o["log2_cost"] = e.hp.log2_cost;
    o["log2_gamma"] = e.hp.log2_gamma;
    o["fitness"] = e.fitness;
    o["replication"] = e.replication;
    o["pso_seed"] = e.pso_seed;
    o["provenance"] = to_string(e.hp.provenance);
    o["origin"] = e.hp.origin;
    entries.push_back(std::move(o));
  }
  j["entries"] = std::move(entries);
  return j.dump(2) + "\n";
}

SettingsPool pool_from_json(const std::string& text) {
  const auto j = parse(text, "pool");
  return guarded("pool", [&] {
    SettingsPool pool;
    pool.manifest_hash = j.value("manifest_hash", std::string{});
    pool.sample_k = j.at("sample_k").get<std::size_t>();
    pool.partial = j.value("partial", false);
    pool.failures = j.value("failures", std::vector<std::string>{});
    pool.folds = j.value("folds", std::size_t{10});
    pool.cv_seed = j.value("cv_seed", std::uint64_t{0});
    if (j.contains("plan") && !j["plan"].is_null()) {
      ResamplingPlan plan;
      plan.seed = j["plan"].at("seed").get<std::uint64_t>();
      for (const auto& r : j["plan"].at("replications"))
        plan.replications.push_back({r.at("id").get<std::size_t>(), r.at("opt").get<std::vector<std::string>>(),
                                     r.at("test").get<std::vector<std::string>>()});
      pool.plan = std::move(plan);
    }
    for (const auto& e : j.at("entries")) {
      PoolEntry entry;
      entry.hp = setting_from(e, Provenance::fixture);
      entry.fitness = e.at("fitness").get<double>();
      entry.replication = e.value("replication", std::size_t{0});
      entry.pso_seed = e.value("pso_seed", std::uint64_t{0});
      pool.entries.push_back(std::move(entry));
    }
    pool.sort();
    return pool;
  });
}

SettingsPool read_pool(const fs::path& path) {
  try {
    return pool_from_json(read_text(path));
  } catch (const DataError& e) {
    throw DataError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

std::string to_json(const PoolEvaluation& ev) {
  ordered_json j;
  j["schema_version"] = 1;
  j["manifest_hash"] = ev.manifest_hash;
  j["strategy"] = ev.strategy;
  j["selection"] = to_string(ev.selection);
  j["scope"] = to_string(ev.scope);
  j["folds"] = ev.folds;
  auto rows = ordered_json::array();
  for (const auto& r : ev.rows) {
    ordered_json o;
    o["dataset"] = r.dataset;
    o["replication"] = r.replication;
    o["cv_seed"] = r.cv_seed;
    o["best"] = r.best;
    o["best_bac"] = r.best_bac;
    o["best_per_fold"] = r.best_per_fold;
    auto cands = ordered_json::array();
    for (std::size_t s = 0; s < r.candidates.size(); ++s) {
      ordered_json c = cv_json(r.results[s]);
      c["pool_index"] = r.candidates[s];
      cands.push_back(std::move(c));
    }
    o["candidates"] = std::move(cands);
    rows.push_back(std::move(o));
  }
  j["rows"] = std::move(rows);
  return j.dump(1) + "\n";
}

PoolEvaluation pool_eval_from_json(const std::string& text) {
  const auto j = parse(text, "pool evaluation");
  return guarded("pool evaluation", [&] {
    PoolEvaluation ev;
    ev.manifest_hash = j.value("manifest_hash", std::string{});
    ev.strategy = j.value("strategy", std::string(strategy::default_opt));
    ev.selection = selection_from_string(j.at("selection").get<std::string>());
    ev.scope = pool_scope_from_string(j.at("scope").get<std::string>());
    ev.folds = j.at("folds").get<std::size_t>();
    for (const auto& o : j.at("rows")) {
      PoolEvalRow r;
      r.dataset = o.at("dataset").get<std::string>();
      r.replication = o.at("replication").get<std::size_t>();
      r.cv_seed = o.at("cv_seed").get<std::uint64_t>();
      r.best = o.at("best").get<std::size_t>();
      r.best_bac = o.at("best_bac").get<double>();
      r.best_per_fold = o.at("best_per_fold").get<std::vector<double>>();
      for (const auto& c : o.at("candidates")) {
        r.candidates.push_back(c.at("pool_index").get<std::size_t>());
        r.results.push_back(cv_from(c, r.dataset, r.cv_seed));
      }
      ev.rows.push_back(std::move(r));
    }
    return ev;
  });
}

std::string to_json(const RsRecord& record, const std::string& manifest_hash) {
  const auto& rs = record.result;
  ordered_json j;
  j["schema_version"] = 1;
  j["manifest_hash"] = manifest_hash;
  j["dataset"] = rs.dataset;
  j["replication"] = record.replication;
  j["budget"] = rs.budget;
  j["seed"] = rs.seed;
  j["cv_seed"] = rs.cv_seed;
  j["best_index"] = rs.best_index;
  j["best"] = cv_json(rs.best());
  auto evals = ordered_json::array();
  for (const auto& cv : rs.evaluations) evals.push_back(cv_json(cv));
  j["evaluations"] = std::move(evals);
  return j.dump(1) + "\n";
}

RsRecord rs_from_json(const std::string& text) {
  const auto j = parse(text, "random search");
  return guarded("random search", [&] {
    RsRecord record;
    auto& rs = record.result;
    rs.dataset = j.at("dataset").get<std::string>();
    record.replication = j.value("replication", std::size_t{1});
    rs.budget = j.at("budget").get<std::size_t>();
    rs.seed = j.at("seed").get<std::uint64_t>();
    rs.cv_seed = j.at("cv_seed").get<std::uint64_t>();
    rs.best_index = j.at("best_index").get<std::size_t>();
    for (const auto& c : j.at("evaluations")) rs.evaluations.push_back(cv_from(c, rs.dataset, rs.cv_seed));
    if (rs.best_index >= rs.evaluations.size()) throw DataError("random search: best_index out of range");
    return record;
  });
}

std::vector<RsRecord> read_rs_dir(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw DataError(fmt::format("'{}' is not a directory", dir.string()));
  std::vector<fs::path> paths;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".json") paths.push_back(entry.path());
  std::sort(paths.begin(), paths.end());
  std::vector<RsRecord> out;
  for (const auto& p : paths) {
    try {
      out.push_back(rs_from_json(read_text(p)));
    } catch (const DataError& e) {
      throw DataError(fmt::format("{}: {}", p.string(), e.what()));
    }
  }
  return out;
}

std::string rs_file_name(std::size_t replication, const std::string& dataset) {
  return fmt::format("rs_r{}_{}.json", replication, dataset);
}

std::string embedded_manifest_hash(const std::string& json_text) {
  try {
    const auto j = ordered_json::parse(json_text);
    return j.is_object() ? j.value("manifest_hash", std::string{}) : std::string{};
  } catch (const ordered_json::exception&) {
    return {};
  }
}

std::string with_manifest_hash(const std::string& json_text, const std::string& hash) {
  auto j = guarded("artifact", [&] { return ordered_json::parse(json_text); });
  if (!j.is_object()) throw DataError("artifact: expected a JSON object");
  j["manifest_hash"] = hash;
  return j.dump(2) + "\n";
}

}  // namespace dminer
