#include "dminer/dataset_io.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "dminer/error.hpp"
#include "dminer/random.hpp"

namespace dminer {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(fmt::format("cannot open '{}'", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError(fmt::format("cannot write '{}'", path.string()));
  out << text;
  if (!out) throw DataError(fmt::format("write failed for '{}'", path.string()));
}

DatasetFile ingest(const fs::path& path, const std::string& target, std::size_t min_class_count) {
  RawDataset raw = load_raw(path, target);
  validate(raw, min_class_count);
  DatasetFile file;
  auto [table, report] = preprocess(raw);
  file.table = std::move(table);
  file.report = std::move(report);
  file.metafeatures = extract_metafeatures(raw);
  file.source_hash = to_hex(fnv1a(read_text(path)));
  return file;
}

namespace {

ordered_json table_json(const DataTable& t) {
  ordered_json j;
  j["name"] = t.name;
  j["class_names"] = t.class_names;
  j["labels"] = t.labels;
  j["feature_names"] = t.feature_names;
  auto rows = ordered_json::array();
  for (std::size_t i = 0; i < t.n_instances(); ++i) {
    auto r = t.features.row(i);
    rows.push_back(std::vector<double>(r.begin(), r.end()));
  }
  j["features"] = std::move(rows);
  return j;
}

ordered_json metafeatures_json(const MetaFeatureVector& m) {
  ordered_json j = ordered_json::object();
  const auto& names = MetaFeatureVector::names();
  const auto values = m.optional_values();
  for (std::size_t i = 0; i < names.size(); ++i) j[names[i]] = values[i] ? ordered_json(*values[i]) : ordered_json();
  return j;
}

MetaFeatureVector metafeatures_from(const ordered_json& j) {
  std::vector<std::optional<double>> values;
  for (const auto& name : MetaFeatureVector::names()) {
    if (!j.contains(name)) throw DataError(fmt::format("meta-features: missing '{}'", name));
    values.push_back(j[name].is_null() ? std::nullopt : std::optional<double>(j[name].get<double>()));
  }
  return MetaFeatureVector::from_values(values);
}

}  // namespace

std::string to_json(const DatasetFile& file) {
  ordered_json j;
  j["schema_version"] = 1;
  j["manifest_hash"] = file.manifest_hash;
  const ordered_json table = table_json(file.table);
  for (auto& [k, v] : table.items()) j[k] = v;
  ordered_json prov;
  prov["removed_constant"] = file.report.removed_constant;
  prov["removed_identifier"] = file.report.removed_identifier;
  auto imputed = ordered_json::array();
  for (const auto& [col, fill] : file.report.imputed) imputed.push_back({{"column", col}, {"fill", fill}});
  prov["imputed"] = std::move(imputed);
  auto onehot = ordered_json::array();
  for (const auto& [col, n] : file.report.one_hot_expansions) onehot.push_back({{"column", col}, {"categories", n}});
  prov["one_hot_expansions"] = std::move(onehot);
  j["provenance"] = std::move(prov);
  j["metafeatures"] = metafeatures_json(file.metafeatures);
  j["source_hash"] = file.source_hash;
  return j.dump(1) + "\n";
}

DatasetFile dataset_from_json(const std::string& text) {
  DatasetFile file;
  try {
    const auto j = ordered_json::parse(text);
    if (j.value("schema_version", 0) != 1) throw DataError("dataset file: unsupported schema_version");
    auto& t = file.table;
    t.name = j.at("name").get<std::string>();
    t.class_names = j.at("class_names").get<std::vector<std::string>>();
    t.labels = j.at("labels").get<std::vector<int>>();
    t.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    const auto& rows = j.at("features");
    const std::size_t n = rows.size();
    const std::size_t p = t.feature_names.size();
    std::vector<double> data;
    data.reserve(n * p);
    for (const auto& row : rows) {
      if (row.size() != p) throw DataError(fmt::format("dataset '{}': ragged feature row", t.name));
      for (const auto& v : row) data.push_back(v.get<double>());
    }
    if (t.labels.size() != n) throw DataError(fmt::format("dataset '{}': label count mismatch", t.name));
    for (int l : t.labels)
      if (l < 0 || static_cast<std::size_t>(l) >= t.class_names.size())
        throw DataError(fmt::format("dataset '{}': label {} out of range", t.name, l));
    t.features = Matrix(n, p, std::move(data));
    if (j.contains("provenance")) {
      const auto& prov = j["provenance"];
      file.report.removed_constant = prov.value("removed_constant", std::vector<std::string>{});
      file.report.removed_identifier = prov.value("removed_identifier", std::vector<std::string>{});
      for (const auto& e : prov.value("imputed", ordered_json::array()))
        file.report.imputed.emplace_back(e.at("column").get<std::string>(), e.at("fill").get<std::string>());
      for (const auto& e : prov.value("one_hot_expansions", ordered_json::array()))
        file.report.one_hot_expansions.emplace_back(e.at("column").get<std::string>(),
                                                    e.at("categories").get<std::size_t>());
    }
    if (j.contains("metafeatures"))
      file.metafeatures = metafeatures_from(j["metafeatures"]);
    else
      file.metafeatures = extract_metafeatures(to_raw(t));
    file.source_hash = j.value("source_hash", std::string{});
    file.manifest_hash = j.value("manifest_hash", std::string{});
  } catch (const ordered_json::exception& e) {
    throw DataError(fmt::format("dataset file: {}", e.what()));
  }
  return file;
}

void write_dataset(const fs::path& path, const DatasetFile& file) { write_text(path, to_json(file)); }

DatasetFile read_dataset(const fs::path& path) {
  try {
    return dataset_from_json(read_text(path));
  } catch (const DataError& e) {
    throw DataError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

std::vector<std::string> Corpus::names() const {
  std::vector<std::string> out;
  for (const auto& [name, _] : tables) out.push_back(name);
  return out;
}

std::string table_hash(const DataTable& table) { return to_hex(fnv1a(table_json(table).dump())); }

Corpus make_corpus(std::vector<DataTable> tables) {
  Corpus corpus;
  for (auto& t : tables) {
    const std::string name = t.name;
    if (corpus.tables.count(name)) throw DataError(fmt::format("duplicate dataset name '{}'", name));
    corpus.metafeatures[name] = extract_metafeatures(to_raw(t));
    corpus.hashes[name] = table_hash(t);
    corpus.tables.emplace(name, std::move(t));
  }
  return corpus;
}

Corpus load_corpus(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw DataError(fmt::format("'{}' is not a directory", dir.string()));
  std::vector<fs::path> paths;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const auto ext = entry.path().extension().string();
    const auto file_name = entry.path().filename().string();
    if (file_name.ends_with("manifest.json")) continue;
    if (ext == ".json" || ext == ".csv" || ext == ".arff") paths.push_back(entry.path());
  }
  std::sort(paths.begin(), paths.end());
  if (paths.empty()) throw DataError(fmt::format("no datasets in '{}'", dir.string()));

  Corpus corpus;
  for (const auto& path : paths) {
    DatasetFile file = path.extension() == ".json" ? read_dataset(path) : ingest(path);
    const std::string name = file.table.name;
    if (corpus.tables.count(name))
      throw DataError(fmt::format("duplicate dataset name '{}' ({})", name, path.string()));
    corpus.metafeatures[name] = file.metafeatures;
    corpus.hashes[name] = table_hash(file.table);
    corpus.tables.emplace(name, std::move(file.table));
  }
  return corpus;
}

}  // namespace dminer
