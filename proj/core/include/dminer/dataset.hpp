#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dminer/matrix.hpp"

namespace dminer {

enum class ColumnKind { numeric, categorical, boolean };

const char* to_string(ColumnKind kind);

/// One raw column. Cells keep their source text; an absent cell is missing.
struct RawColumn {
  std::string name;
  ColumnKind kind = ColumnKind::numeric;
  std::vector<std::optional<std::string>> cells;
};

/// A classification dataset as read from disk, before any encoding.
struct RawDataset {
  std::string name;
  std::vector<RawColumn> columns;
  std::size_t target_column = 0;
  std::filesystem::path source;

  std::size_t n_rows() const { return columns.empty() ? 0 : columns.front().cells.size(); }
  const RawColumn& target() const { return columns.at(target_column); }

  /// Class label -> count over the target column, labels in lexicographic order.
  std::vector<std::pair<std::string, std::size_t>> class_counts() const;
};

/// Throws DataError when the RawDataset invariants do not hold.
void validate(const RawDataset& raw, std::size_t min_class_count = 1);

/// Preprocessed dataset: dense standardized features plus class indices.
struct DataTable {
  std::string name;
  Matrix features;
  std::vector<int> labels;
  std::vector<std::string> class_names;
  std::vector<std::string> feature_names;

  std::size_t n_instances() const { return features.rows(); }
  std::size_t n_features() const { return features.cols(); }
  std::size_t n_classes() const { return class_names.size(); }
  std::vector<std::size_t> class_counts() const;
};

struct PreprocessReport {
  std::vector<std::string> removed_constant;
  std::vector<std::string> removed_identifier;
  std::vector<std::pair<std::string, std::string>> imputed;  // (column, fill value)
  std::vector<std::pair<std::string, std::size_t>> one_hot_expansions;
};

struct CsvOptions {
  char delimiter = ',';
  std::string missing_token = "?";
  std::size_t min_class_count = 1;
};

/// Target given by header name; empty name selects the last column.
RawDataset load_csv(const std::filesystem::path& path, const std::string& target,
                    const CsvOptions& options = {});
RawDataset load_csv(const std::filesystem::path& path, std::size_t target_index,
                    const CsvOptions& options = {});

/// Minimal ARFF reader: numeric/real/integer and nominal attributes, dense
/// data rows, '?' for missing. The last attribute is the target unless
/// `target` names another one.
RawDataset load_arff(const std::filesystem::path& path, const std::string& target = {},
                     std::size_t min_class_count = 1);

/// Dispatches on extension (.csv/.arff); the target for CSV defaults to the
/// last column.
RawDataset load_raw(const std::filesystem::path& path, const std::string& target = {});

/// Constant/identifier removal, boolean mapping, imputation, one-hot encoding
/// and standardization, in that order.
std::pair<DataTable, PreprocessReport> preprocess(const RawDataset& raw);

/// Wraps a table's features back into an all-numeric RawDataset.
RawDataset to_raw(const DataTable& table);

struct FoldAssignment {
  std::string dataset;
  std::size_t k = 0;
  std::vector<std::size_t> fold_of;  // per instance
  std::uint64_t seed = 0;

  std::vector<std::size_t> test_indices(std::size_t fold) const;
  std::vector<std::size_t> train_indices(std::size_t fold) const;
};

/// Per class: shuffle by seed, then deal round-robin into k folds. The deal
/// continues where the previous class stopped so fold sizes also stay within
/// one of each other.
FoldAssignment stratified_folds(const DataTable& table, std::size_t k, std::uint64_t seed);

}  // namespace dminer
