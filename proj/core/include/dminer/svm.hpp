#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dminer/dataset.hpp"
#include "dminer/matrix.hpp"

namespace dminer {

enum class Provenance { tool_default, pso, random_search, fixture };

const char* to_string(Provenance p);
Provenance provenance_from_string(const std::string& s);

/// One SVM setting, both axes in log2 units.
struct HPSetting {
  double log2_cost = 0.0;
  double log2_gamma = 0.0;
  Provenance provenance = Provenance::tool_default;
  std::string origin;

  double cost() const;
  double gamma() const;

  /// Same point in the space (provenance ignored).
  bool same_point(const HPSetting& other) const {
    return log2_cost == other.log2_cost && log2_gamma == other.log2_gamma;
  }
};

struct Interval {
  double lower = -15.0;
  double upper = 15.0;

  double width() const { return upper - lower; }
  bool contains(double v) const { return v >= lower && v <= upper; }
  double clamp(double v) const { return v < lower ? lower : (v > upper ? upper : v); }
};

/// The RBF-SVM search box.
struct HPSpace {
  Interval cost{-15.0, 15.0};
  Interval gamma{-15.0, 15.0};

  bool contains(const HPSetting& hp) const;
  /// Throws ConfigError unless lower < upper on both axes.
  void validate() const;
};

/// Throws ConfigError when the setting is non-finite or outside the space.
void validate(const HPSetting& hp, const HPSpace& space = {});

/// exp(-gamma * ||x - z||^2) with gamma = 2^log2_gamma.
double rbf_kernel(std::span<const double> x, std::span<const double> z, double log2_gamma);

double squared_distance(std::span<const double> x, std::span<const double> z);

struct SmoOptions {
  double tol = 1e-3;
  /// Pair-update cap; 0 selects min(10000, max(1000, 10 N)).
  std::size_t max_iterations = 0;
  /// Record the dual objective after every pair update (testing aid).
  bool record_objective = false;
};

struct BinarySvmModel {
  Matrix support_vectors;
  std::vector<double> dual_coefficients;  // alpha_i * y_i
  double bias = 0.0;
  double log2_gamma = 0.0;
  double cost = 1.0;
  std::pair<int, int> label_pair{0, 1};  // (+1 class, -1 class)
  bool converged = true;
  std::size_t iterations = 0;
  std::vector<double> objective_trace;

  /// Sum_i coef_i K(sv_i, x) + b. Positive favours label_pair.first.
  double decision_value(std::span<const double> x) const;
};

/// Gram-row provider: writes K(i, j) for every j into `out`.
using KernelRowFn = std::function<void(std::size_t i, std::span<double> out)>;

/// Raw SMO solution over an abstract kernel (K(i, i) = 1 for RBF).
struct SmoSolution {
  std::vector<double> alpha;
  double bias = 0.0;
  bool converged = true;
  std::size_t iterations = 0;
  std::vector<double> objective_trace;
};

/// Solves the C-SVM dual with labels in {-1, +1}. Full Gram matrix is
/// materialized when n <= 4000, rows are computed on demand above that.
SmoSolution solve_smo(std::span<const int> signs, double cost, const KernelRowFn& kernel_row,
                      const SmoOptions& options = {});

/// Trains one binary RBF-SVM; `signs` holds +1 / -1 per row.
BinarySvmModel train_binary_smo(const Matrix& features, std::span<const int> signs, const HPSetting& hp,
                                const SmoOptions& options = {});

struct OvoSvmModel {
  std::vector<BinarySvmModel> binaries;
  std::size_t n_classes = 0;
  std::size_t n_features = 0;

  bool converged() const;
};

/// Pairwise squared distances of a table's rows, reusable across folds and
/// settings (the RBF Gram matrix is exp(-gamma * D)).
class DistanceCache {
 public:
  explicit DistanceCache(const Matrix& features);
  double operator()(std::size_t i, std::size_t j) const { return d_[i * n_ + j]; }
  std::size_t size() const { return n_; }

 private:
  std::size_t n_ = 0;
  std::vector<double> d_;
};

/// One-vs-one training on the rows `subset` of `features` (all rows when
/// empty). Pair (a, b), a < b, maps a to +1 and b to -1.
OvoSvmModel train_ovo(const Matrix& features, std::span<const int> labels, std::size_t n_classes,
                      const HPSetting& hp, std::span<const std::size_t> subset = {},
                      const DistanceCache* distances = nullptr, const SmoOptions& options = {});

OvoSvmModel train_ovo(const DataTable& table, const HPSetting& hp, const SmoOptions& options = {});

/// Majority vote over the binaries; ties go to the lowest class index.
std::vector<int> predict(const OvoSvmModel& model, const Matrix& features);
int predict_one(const OvoSvmModel& model, std::span<const double> x);

/// Debug serialization {label_pair, bias, log2_gamma, dual_coefficients, support_vectors}.
std::string to_json(const BinarySvmModel& model);

}  // namespace dminer
