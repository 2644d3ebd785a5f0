#include "dminer/evaluation.hpp"

#include <algorithm>
#include <numeric>

#include <fmt/format.h>
#include <json.hpp>

#include "dminer/error.hpp"
#include "dminer/parallel.hpp"
#include "dminer/random.hpp"

namespace dminer {

namespace {

constexpr std::size_t kDistanceCacheLimit = 4000;

struct FoldOutcome {
  double bac = 0.0;
  bool converged = true;
};

FoldOutcome evaluate_fold(const CvPlan& plan, const HPSetting& hp, std::size_t fold, const SmoOptions& smo) {
  const auto& table = plan.table();
  const auto train = plan.folds().train_indices(fold);
  const auto test = plan.folds().test_indices(fold);
  try {
    const auto model =
        train_ovo(table.features, table.labels, table.n_classes(), hp, train, plan.distances(), smo);
    ConfusionMatrix cm(table.n_classes());
    for (std::size_t idx : test) cm.add(table.labels[idx], predict_one(model, table.features.row(idx)));
    return {balanced_accuracy(cm), model.converged()};
  } catch (const Error& e) {
    throw DataError(fmt::format("{}: fold {}: {}", table.name, fold, e.what()));
  }
}

CvResult assemble(const CvPlan& plan, const HPSetting& hp, std::span<const FoldOutcome> outcomes) {
  CvResult r;
  r.dataset = plan.table().name;
  r.hp = hp;
  r.seed = plan.seed();
  for (const auto& o : outcomes) {
    r.per_fold_bac.push_back(o.bac);
    r.converged = r.converged && o.converged;
  }
  r.mean_bac = std::accumulate(r.per_fold_bac.begin(), r.per_fold_bac.end(), 0.0) /
               static_cast<double>(r.per_fold_bac.size());
  return r;
}

}  // namespace

ConfusionMatrix::ConfusionMatrix(std::span<const int> truth, std::span<const int> predicted, std::size_t n_classes)
    : ConfusionMatrix(n_classes) {
  if (truth.size() != predicted.size()) throw DataError("confusion matrix: length mismatch");
  for (std::size_t i = 0; i < truth.size(); ++i) add(truth[i], predicted[i]);
}

void ConfusionMatrix::add(int truth, int predicted, std::size_t count) {
  if (truth < 0 || predicted < 0 || static_cast<std::size_t>(truth) >= n_ || static_cast<std::size_t>(predicted) >= n_)
    throw DataError(fmt::format("confusion matrix: class index out of range ({}, {})", truth, predicted));
  counts_[static_cast<std::size_t>(truth) * n_ + static_cast<std::size_t>(predicted)] += count;
}

std::size_t ConfusionMatrix::total() const { return std::accumulate(counts_.begin(), counts_.end(), std::size_t{0}); }

std::size_t ConfusionMatrix::support(std::size_t truth) const {
  std::size_t s = 0;
  for (std::size_t p = 0; p < n_; ++p) s += (*this)(truth, p);
  return s;
}

double balanced_accuracy(const ConfusionMatrix& cm) {
  double sum = 0.0;
  std::size_t classes = 0;
  for (std::size_t c = 0; c < cm.n_classes(); ++c) {
    const std::size_t support = cm.support(c);
    if (support == 0) continue;
    sum += static_cast<double>(cm(c, c)) / static_cast<double>(support);
    ++classes;
  }
  if (classes == 0) throw DataError("balanced_accuracy: empty confusion matrix");
  return sum / static_cast<double>(classes);
}

double median(std::vector<double> values) {
  if (values.empty()) throw DataError("median of an empty list");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

std::uint64_t fold_seed(std::uint64_t cv_seed, const std::string& dataset) {
  return derive_seed(cv_seed, "folds:" + dataset);
}

CvPlan::CvPlan(const DataTable& table, std::size_t k, std::uint64_t seed)
    : table_(&table), seed_(seed), folds_(stratified_folds(table, k, fold_seed(seed, table.name))) {
  if (table.n_instances() <= kDistanceCacheLimit) distances_ = std::make_shared<const DistanceCache>(table.features);
}

CvResult cross_validate(const CvPlan& plan, const HPSetting& hp, const CvOptions& options) {
  const std::size_t k = plan.folds().k;
  std::vector<FoldOutcome> outcomes(k);
  parallel_for(k, options.jobs, [&](std::size_t f) { outcomes[f] = evaluate_fold(plan, hp, f, options.smo); });
  return assemble(plan, hp, outcomes);
}

CvResult cross_validate(const DataTable& table, const HPSetting& hp, std::size_t k, std::uint64_t seed,
                        const CvOptions& options) {
  return cross_validate(CvPlan(table, k, seed), hp, options);
}

FitnessValue shared_fitness(std::span<const CvPlan> plans, const HPSetting& hp, const CvOptions& options) {
  if (plans.empty()) throw DataError("shared_fitness: no datasets");
  // Flatten (dataset, fold) so scheduling never influences the result.
  std::vector<std::pair<std::size_t, std::size_t>> tasks;
  std::vector<std::size_t> offsets;
  for (std::size_t d = 0; d < plans.size(); ++d) {
    offsets.push_back(tasks.size());
    for (std::size_t f = 0; f < plans[d].folds().k; ++f) tasks.emplace_back(d, f);
  }
  std::vector<FoldOutcome> outcomes(tasks.size());
  parallel_for(tasks.size(), options.jobs, [&](std::size_t t) {
    const auto [d, f] = tasks[t];
    outcomes[t] = evaluate_fold(plans[d], hp, f, options.smo);
  });

  FitnessValue out;
  std::vector<double> means;
  for (std::size_t d = 0; d < plans.size(); ++d) {
    const auto cv = assemble(plans[d], hp, std::span(outcomes).subspan(offsets[d], plans[d].folds().k));
    out.per_dataset.emplace_back(cv.dataset, cv.mean_bac);
    means.push_back(cv.mean_bac);
  }
  out.value = median(std::move(means));
  return out;
}

FitnessValue shared_fitness(std::span<const DataTable> tables, const HPSetting& hp, std::size_t k,
                            std::uint64_t seed, const CvOptions& options) {
  std::vector<CvPlan> plans;
  plans.reserve(tables.size());
  for (const auto& t : tables) {
    try {
      plans.emplace_back(t, k, seed);
    } catch (const Error& e) {
      throw DataError(fmt::format("shared_fitness: dataset {}: {}", t.name, e.what()));
    }
  }
  return shared_fitness(plans, hp, options);
}

std::string to_json(const CvResult& result) {
  nlohmann::ordered_json j;
  j["schema_version"] = 1;
  j["dataset"] = result.dataset;
  j["log2_cost"] = result.hp.log2_cost;
  j["log2_gamma"] = result.hp.log2_gamma;
  j["per_fold_bac"] = result.per_fold_bac;
  j["mean_bac"] = result.mean_bac;
  j["seed"] = result.seed;
  j["converged"] = result.converged;
  return j.dump(2);
}

std::string to_json(const FitnessValue& fitness) {
  nlohmann::ordered_json j;
  j["schema_version"] = 1;
  j["value"] = fitness.value;
  auto per = nlohmann::ordered_json::array();
  for (const auto& [name, bac] : fitness.per_dataset) per.push_back({{"dataset", name}, {"mean_bac", bac}});
  j["per_dataset"] = std::move(per);
  return j.dump(2);
}

}  // namespace dminer
