#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "dminer/dataset.hpp"
#include "dminer/evaluation.hpp"
#include "dminer/matrix.hpp"
#include "dminer/stats.hpp"

namespace dminer {

/// Simple and general meta-features of a raw (pre-encoding) dataset.
struct MetaFeatureVector {
  double nr_inst = 0;
  double nr_attr = 0;
  double nr_class = 0;
  double nr_num = 0;
  double nr_cat = 0;
  double nr_bin = 0;
  std::optional<double> attr_to_inst;
  std::optional<double> inst_to_attr;
  std::optional<double> cat_to_num;
  std::optional<double> num_to_cat;
  double freq_class_mean = 0;
  double freq_class_sd = 0;

  /// Field names in declaration order.
  static const std::vector<std::string>& names();
  /// Values in `names()` order; absent ratios are encoded as -1.
  std::vector<double> values() const;
  static MetaFeatureVector from_values(const std::vector<std::optional<double>>& values);
  std::vector<std::optional<double>> optional_values() const;
};

MetaFeatureVector extract_metafeatures(const RawDataset& raw);

enum class MetaLabel { default_opt = 0, rs = 1 };

const char* to_string(MetaLabel label);
MetaLabel meta_label_from_string(const std::string& s);

struct MetaExample {
  std::string dataset;
  MetaFeatureVector features;
  MetaLabel label = MetaLabel::default_opt;
};

/// Outcome of testing random search against the optimized defaults on one dataset.
struct TuneComparison {
  std::string dataset;
  double rs_bac = 0.0;
  double opt_bac = 0.0;
  double p_value = 1.0;
};

/// Wilcoxon of random.search vs default.opt for every dataset in the table.
std::vector<TuneComparison> tune_comparisons(const StrategyTable& table, Pairing pairing = Pairing::folds);

/// rs iff random search had the higher BAC with p < alpha.
MetaLabel label_for(const TuneComparison& comparison, double alpha = 0.05);

struct LabeledMetaData {
  std::vector<MetaExample> examples;
  std::vector<std::string> excluded;  // datasets without a comparison result
};

/// Pairs each dataset's meta-features with its tune/default label.
LabeledMetaData label_meta_examples(const std::vector<std::pair<std::string, MetaFeatureVector>>& metafeatures,
                                    const std::vector<TuneComparison>& comparisons, double alpha = 0.05);

struct TreeConfig {
  std::size_t max_depth = 4;
  std::size_t min_leaf = 3;
  std::vector<double> class_weights;  // empty: inverse class frequency
};

struct TreeNode {
  bool leaf = true;
  std::size_t feature = 0;
  double threshold = 0.0;  // left: x < threshold, right: x >= threshold
  int left = -1;
  int right = -1;
  std::size_t depth = 0;
  std::vector<std::size_t> counts;  // per class
  int prediction = 0;
  double impurity = 0.0;  // weighted gini
};

struct TreeModel {
  std::vector<std::string> feature_names;
  std::vector<std::string> class_names;
  std::vector<double> class_weights;
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  int predict(std::span<const double> x) const;
  std::size_t leaf_count() const;
};

struct Split {
  std::size_t feature = 0;
  double threshold = 0.0;
  double impurity = 0.0;  // weight-averaged children gini
};

/// Weighted gini of a class-weight vector.
double gini(std::span<const double> weighted_counts);

/// Lowest-impurity split of `rows`; ties prefer the lower feature index,
/// then the lower threshold. nullopt if no split leaves min_leaf rows per side.
std::optional<Split> best_split(const Matrix& x, std::span<const int> y, std::span<const std::size_t> rows,
                                std::span<const double> class_weights, std::size_t min_leaf);

/// Inverse-frequency weights n / (C n_c); zero-count classes get weight 0.
std::vector<double> inverse_frequency_weights(std::span<const int> y, std::size_t n_classes);

/// Greedy CART with weighted gini.
TreeModel train_tree(const Matrix& x, std::span<const int> y, std::vector<std::string> feature_names,
                     std::vector<std::string> class_names, const TreeConfig& config = {});
TreeModel train_tree(const std::vector<MetaExample>& examples, const TreeConfig& config = {});

/// Meta-feature matrix and labels for a set of examples.
std::pair<Matrix, std::vector<int>> meta_matrix(const std::vector<MetaExample>& examples);

struct LooResult {
  ConfusionMatrix confusion;
  double bac = 0.0;
  ConfusionMatrix baseline_confusion;
  double baseline_bac = 0.0;  // always predicting the overall majority class
};

LooResult loo_cv(const Matrix& x, std::span<const int> y, std::size_t n_classes, const TreeConfig& config = {});
LooResult loo_cv(const std::vector<MetaExample>& examples, const TreeConfig& config = {});

struct RuleCondition {
  std::size_t feature = 0;
  bool less = true;  // feature < threshold, else feature >= threshold
  double threshold = 0.0;

  bool holds(std::span<const double> x) const { return less ? x[feature] < threshold : x[feature] >= threshold; }
};

struct Rule {
  std::vector<RuleCondition> conditions;
  std::vector<std::size_t> counts;
  int prediction = 0;

  bool matches(std::span<const double> x) const;
};

/// One rule per root-to-leaf path, left to right.
std::vector<Rule> extract_rules(const TreeModel& tree);

/// Indented rule boxes ending in "[a/b] (default.opt/RS)".
std::string format_rules(const TreeModel& tree, const std::vector<Rule>& rules);

/// Nested node JSON.
std::string to_json(const TreeModel& tree);

}  // namespace dminer
