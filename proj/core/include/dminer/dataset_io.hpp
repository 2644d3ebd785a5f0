#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "dminer/dataset.hpp"
#include "dminer/meta.hpp"

namespace dminer {

/// A preprocessed dataset as stored on disk by `ingest`.
struct DatasetFile {
  DataTable table;
  PreprocessReport report;
  MetaFeatureVector metafeatures;  // of the raw data
  std::string source_hash;         // of the source file bytes
  std::string manifest_hash;
};

/// Load, validate, preprocess and characterize one raw file.
DatasetFile ingest(const std::filesystem::path& path, const std::string& target = {},
                   std::size_t min_class_count = 2);

std::string to_json(const DatasetFile& file);
DatasetFile dataset_from_json(const std::string& text);

void write_dataset(const std::filesystem::path& path, const DatasetFile& file);
DatasetFile read_dataset(const std::filesystem::path& path);

/// Preprocessed tables plus their raw meta-features and content hashes, by name.
struct Corpus {
  std::map<std::string, DataTable> tables;
  std::map<std::string, MetaFeatureVector> metafeatures;
  std::map<std::string, std::string> hashes;

  std::vector<std::string> names() const;
};

/// Hash of a table's canonical serialization.
std::string table_hash(const DataTable& table);

/// Meta-features are computed on the tables themselves (all-numeric raw view).
Corpus make_corpus(std::vector<DataTable> tables);

/// Every *.json dataset file plus every *.csv / *.arff source (last column is
/// the target) in `dir`, non-recursive. Names must be unique.
Corpus load_corpus(const std::filesystem::path& dir);

/// Reads a whole file; throws DataError when it cannot be opened.
std::string read_text(const std::filesystem::path& path);
/// Writes a whole file, creating parent directories.
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace dminer
