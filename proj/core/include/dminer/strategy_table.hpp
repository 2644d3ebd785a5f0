#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "dminer/matrix.hpp"

namespace dminer {

namespace strategy {
inline constexpr std::string_view default_opt = "default.opt";
inline constexpr std::string_view random_search = "random.search";
inline constexpr std::string_view default_mlr = "default.mlr";
inline constexpr std::string_view default_weka = "default.weka";
inline constexpr std::string_view default_skl = "default.skl";
}  // namespace strategy

struct StrategyCell {
  double bac = 0.0;               // mean over folds
  std::vector<double> per_fold;   // paired across strategies of the same row
};

/// One test case: a dataset evaluated within one resampling replication.
struct StrategyRow {
  std::string dataset;
  std::size_t replication = 0;
  std::vector<StrategyCell> cells;  // one per StrategyTable::strategies entry
};

/// Per-test-case performance of competing strategies.
struct StrategyTable {
  std::vector<std::string> strategies;
  std::vector<StrategyRow> rows;

  std::size_t strategy_index(std::string_view name) const;
  bool has_strategy(std::string_view name) const;
  bool multi_replication() const;
  /// "r<replication>/<dataset>" when rows span several replications, else the dataset name.
  std::string row_id(std::size_t row) const;
  /// N x k matrix of mean BACs.
  Matrix values() const;
  /// Same rows restricted to the named strategies, in the given order.
  StrategyTable select(const std::vector<std::string>& names) const;
  /// Median BAC per strategy.
  std::vector<double> medians() const;
  /// Throws DataError on missing cells or fold-count mismatches.
  void validate() const;
};

/// dataset,strategy,bac rows.
std::string to_csv(const StrategyTable& table);

/// strategy,dataset,bac rows (violin-plot layout).
std::string to_violin_csv(const StrategyTable& table);

}  // namespace dminer
