#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dminer/dataset.hpp"
#include "dminer/svm.hpp"

namespace dminer {

/// Rows are true classes, columns predicted classes.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(std::size_t n_classes = 0) : n_(n_classes), counts_(n_classes * n_classes, 0) {}
  ConfusionMatrix(std::span<const int> truth, std::span<const int> predicted, std::size_t n_classes);

  void add(int truth, int predicted, std::size_t count = 1);
  std::size_t operator()(std::size_t truth, std::size_t predicted) const { return counts_[truth * n_ + predicted]; }
  std::size_t n_classes() const { return n_; }
  std::size_t total() const;
  std::size_t support(std::size_t truth) const;

 private:
  std::size_t n_;
  std::vector<std::size_t> counts_;
};

/// Mean recall over the classes with non-zero support.
double balanced_accuracy(const ConfusionMatrix& cm);

/// Arithmetic median; even counts average the two middle values.
double median(std::vector<double> values);

struct CvResult {
  std::string dataset;
  HPSetting hp;
  std::vector<double> per_fold_bac;
  double mean_bac = 0.0;
  std::uint64_t seed = 0;
  bool converged = true;  // every SMO run hit the tolerance
};

struct CvOptions {
  unsigned jobs = 1;
  SmoOptions smo;
};

/// Folds plus the squared-distance cache for one dataset, shared by every
/// setting evaluated on it so all candidates see identical folds.
class CvPlan {
 public:
  CvPlan(const DataTable& table, std::size_t k, std::uint64_t seed);

  const DataTable& table() const { return *table_; }
  const FoldAssignment& folds() const { return folds_; }
  std::uint64_t seed() const { return seed_; }
  const DistanceCache* distances() const { return distances_.get(); }

 private:
  const DataTable* table_;
  std::uint64_t seed_;
  FoldAssignment folds_;
  std::shared_ptr<const DistanceCache> distances_;
};

/// Fold plan seed for a dataset under a CV seed.
std::uint64_t fold_seed(std::uint64_t cv_seed, const std::string& dataset);

CvResult cross_validate(const CvPlan& plan, const HPSetting& hp, const CvOptions& options = {});
CvResult cross_validate(const DataTable& table, const HPSetting& hp, std::size_t k, std::uint64_t seed,
                        const CvOptions& options = {});

struct FitnessValue {
  double value = 0.0;
  std::vector<std::pair<std::string, double>> per_dataset;
};

FitnessValue shared_fitness(std::span<const CvPlan> plans, const HPSetting& hp, const CvOptions& options = {});
FitnessValue shared_fitness(std::span<const DataTable> tables, const HPSetting& hp, std::size_t k,
                            std::uint64_t seed, const CvOptions& options = {});

std::string to_json(const CvResult& result);
std::string to_json(const FitnessValue& fitness);

}  // namespace dminer
