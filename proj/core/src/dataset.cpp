#include "dminer/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "dminer/error.hpp"
#include "dminer/random.hpp"

namespace dminer {

namespace {

constexpr const char* kMissingCategory = "__missing__";

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::optional<double> parse_number(std::string_view s) {
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(value)) return std::nullopt;
  return value;
}

bool is_boolean_literal(const std::string& s) {
  const auto l = lower(s);
  return l == "true" || l == "false" || l == "0" || l == "1";
}

ColumnKind infer_kind(const RawColumn& column) {
  bool numeric = true;
  bool boolean = true;
  for (const auto& cell : column.cells) {
    if (!cell) continue;
    if (numeric && !parse_number(*cell)) numeric = false;
    if (boolean && !is_boolean_literal(*cell)) boolean = false;
  }
  if (numeric) return ColumnKind::numeric;
  if (boolean) return ColumnKind::boolean;
  return ColumnKind::categorical;
}

// Splits one CSV record; double quotes group fields and "" escapes a quote.
std::vector<std::string> split_record(const std::string& line, char delimiter) {
  std::vector<std::string> fields;
  std::string current;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        current += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        current += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == delimiter) {
      fields.push_back(trim(current));
      current.clear();
    } else {
      current += c;
    }
  }
  fields.push_back(trim(current));
  return fields;
}

std::string strip_quotes(std::string s) {
  if (s.size() >= 2 && ((s.front() == '\'' && s.back() == '\'') || (s.front() == '"' && s.back() == '"')))
    return s.substr(1, s.size() - 2);
  return s;
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError(fmt::format("file not found: {}", path.string()));
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  return lines;
}

double median_of(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

std::string format_number(double v) { return fmt::format("{}", v); }

}  // namespace

const char* to_string(ColumnKind kind) {
  switch (kind) {
    case ColumnKind::numeric: return "numeric";
    case ColumnKind::categorical: return "categorical";
    case ColumnKind::boolean: return "boolean";
  }
  return "unknown";
}

std::vector<std::pair<std::string, std::size_t>> RawDataset::class_counts() const {
  std::map<std::string, std::size_t> counts;
  for (const auto& cell : target().cells)
    if (cell) ++counts[*cell];
  return {counts.begin(), counts.end()};
}

void validate(const RawDataset& raw, std::size_t min_class_count) {
  if (raw.columns.empty()) throw DataError(fmt::format("{}: no columns", raw.name));
  if (raw.target_column >= raw.columns.size())
    throw DataError(fmt::format("{}: target column missing", raw.name));
  const std::size_t n = raw.n_rows();
  if (n == 0) throw DataError(fmt::format("{}: no rows", raw.name));
  for (const auto& col : raw.columns)
    if (col.cells.size() != n)
      throw DataError(fmt::format("{}: column '{}' has {} values, expected {}", raw.name, col.name,
                                  col.cells.size(), n));
  const auto& target = raw.target();
  for (std::size_t i = 0; i < n; ++i)
    if (!target.cells[i])
      throw DataError(fmt::format("{}: target '{}' is missing in row {}", raw.name, target.name, i));
  const auto counts = raw.class_counts();
  if (counts.size() < 2)
    throw DataError(fmt::format("{}: target '{}' needs at least 2 classes", raw.name, target.name));
  for (const auto& [label, count] : counts)
    if (count < min_class_count)
      throw DataError(fmt::format("{}: class '{}' has {} instance(s), cannot stratify (need {})",
                                  raw.name, label, count, min_class_count));
}

std::vector<std::size_t> DataTable::class_counts() const {
  std::vector<std::size_t> counts(n_classes(), 0);
  for (int l : labels) ++counts[static_cast<std::size_t>(l)];
  return counts;
}

namespace {

RawDataset finish_csv(std::vector<std::string> lines, const std::filesystem::path& path,
                      std::optional<std::string> target_name, std::optional<std::size_t> target_index,
                      const CsvOptions& options) {
  std::erase_if(lines, [](const std::string& l) { return trim(l).empty(); });
  if (lines.empty()) throw DataError(fmt::format("{}: missing header row", path.string()));

  const auto header = split_record(lines.front(), options.delimiter);
  RawDataset raw;
  raw.name = path.stem().string();
  raw.source = path;
  raw.columns.resize(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) raw.columns[c].name = header[c];

  for (std::size_t r = 1; r < lines.size(); ++r) {
    auto fields = split_record(lines[r], options.delimiter);
    if (fields.size() != header.size())
      throw DataError(fmt::format("{}: ragged row {} ({} fields, header has {})", path.string(), r + 1,
                                  fields.size(), header.size()));
    for (std::size_t c = 0; c < fields.size(); ++c) {
      auto& cells = raw.columns[c].cells;
      if (fields[c] == options.missing_token || fields[c].empty())
        cells.emplace_back(std::nullopt);
      else
        cells.emplace_back(std::move(fields[c]));
    }
  }

  if (target_name) {
    if (target_name->empty()) {
      raw.target_column = header.size() - 1;
    } else {
      auto it = std::find(header.begin(), header.end(), *target_name);
      if (it == header.end())
        throw DataError(fmt::format("{}: target column '{}' missing", path.string(), *target_name));
      raw.target_column = static_cast<std::size_t>(it - header.begin());
    }
  } else {
    if (*target_index >= header.size())
      throw DataError(fmt::format("{}: target column index {} missing", path.string(), *target_index));
    raw.target_column = *target_index;
  }

  for (std::size_t c = 0; c < raw.columns.size(); ++c)
    raw.columns[c].kind = c == raw.target_column ? ColumnKind::categorical : infer_kind(raw.columns[c]);
  validate(raw, options.min_class_count);
  return raw;
}

}  // namespace

RawDataset load_csv(const std::filesystem::path& path, const std::string& target, const CsvOptions& options) {
  return finish_csv(read_lines(path), path, target, std::nullopt, options);
}

RawDataset load_csv(const std::filesystem::path& path, std::size_t target_index, const CsvOptions& options) {
  return finish_csv(read_lines(path), path, std::nullopt, target_index, options);
}

RawDataset load_arff(const std::filesystem::path& path, const std::string& target, std::size_t min_class_count) {
  const auto lines = read_lines(path);
  RawDataset raw;
  raw.name = path.stem().string();
  raw.source = path;
  bool in_data = false;

  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    const std::string line = trim(lines[ln]);
    if (line.empty() || line.front() == '%') continue;
    if (!in_data) {
      std::istringstream ss(line);
      std::string keyword;
      ss >> keyword;
      keyword = lower(keyword);
      if (keyword == "@relation") {
        std::string rest;
        std::getline(ss, rest);
        if (auto name = strip_quotes(trim(rest)); !name.empty()) raw.name = name;
      } else if (keyword == "@attribute") {
        std::string rest;
        std::getline(ss, rest);
        rest = trim(rest);
        std::string name;
        std::string type;
        if (!rest.empty() && (rest.front() == '\'' || rest.front() == '"')) {
          const auto close = rest.find(rest.front(), 1);
          if (close == std::string::npos)
            throw DataError(fmt::format("{}:{}: unterminated attribute name", path.string(), ln + 1));
          name = rest.substr(1, close - 1);
          type = trim(rest.substr(close + 1));
        } else {
          const auto space = rest.find_first_of(" \t");
          if (space == std::string::npos)
            throw DataError(fmt::format("{}:{}: attribute without type", path.string(), ln + 1));
          name = rest.substr(0, space);
          type = trim(rest.substr(space + 1));
        }
        RawColumn col;
        col.name = name;
        const auto ltype = lower(type);
        if (!type.empty() && type.front() == '{') {
          col.kind = ColumnKind::categorical;
        } else if (ltype == "numeric" || ltype == "real" || ltype == "integer") {
          col.kind = ColumnKind::numeric;
        } else {
          throw DataError(fmt::format("{}: unsupported attribute kind '{}' for attribute '{}'",
                                      path.string(), type, name));
        }
        raw.columns.push_back(std::move(col));
      } else if (keyword == "@data") {
        in_data = true;
      } else {
        throw DataError(fmt::format("{}:{}: unexpected line '{}'", path.string(), ln + 1, line));
      }
      continue;
    }

    if (line.front() == '{') throw DataError(fmt::format("{}: sparse ARFF unsupported", path.string()));
    auto fields = split_record(line, ',');
    if (fields.size() != raw.columns.size())
      throw DataError(fmt::format("{}:{}: ragged row ({} fields, {} attributes)", path.string(), ln + 1,
                                  fields.size(), raw.columns.size()));
    for (std::size_t c = 0; c < fields.size(); ++c) {
      auto value = strip_quotes(fields[c]);
      if (value == "?" || value.empty())
        raw.columns[c].cells.emplace_back(std::nullopt);
      else
        raw.columns[c].cells.emplace_back(std::move(value));
    }
  }

  if (raw.columns.empty()) throw DataError(fmt::format("{}: no attributes declared", path.string()));
  if (target.empty()) {
    raw.target_column = raw.columns.size() - 1;
  } else {
    auto it = std::find_if(raw.columns.begin(), raw.columns.end(),
                           [&](const RawColumn& c) { return c.name == target; });
    if (it == raw.columns.end())
      throw DataError(fmt::format("{}: target column '{}' missing", path.string(), target));
    raw.target_column = static_cast<std::size_t>(it - raw.columns.begin());
  }
  for (std::size_t c = 0; c < raw.columns.size(); ++c) {
    auto& col = raw.columns[c];
    if (c == raw.target_column) {
      col.kind = ColumnKind::categorical;
    } else if (col.kind == ColumnKind::numeric) {
      for (const auto& cell : col.cells)
        if (cell && !parse_number(*cell))
          throw DataError(fmt::format("{}: non-numeric value '{}' in numeric attribute '{}'", path.string(),
                                      *cell, col.name));
    }
  }
  validate(raw, min_class_count);
  return raw;
}

RawDataset load_raw(const std::filesystem::path& path, const std::string& target) {
  const auto ext = lower(path.extension().string());
  if (ext == ".arff") return load_arff(path, target);
  if (ext == ".csv") return load_csv(path, target);
  throw DataError(fmt::format("{}: unsupported file extension '{}'", path.string(), ext));
}

std::pair<DataTable, PreprocessReport> preprocess(const RawDataset& raw) {
  validate(raw);
  const std::size_t n = raw.n_rows();
  PreprocessReport report;

  // Working columns after removal: numeric values or category strings.
  struct Working {
    std::string name;
    bool categorical = false;
    std::vector<std::optional<double>> numbers;
    std::vector<std::optional<std::string>> categories;
  };
  std::vector<Working> kept;

  for (std::size_t c = 0; c < raw.columns.size(); ++c) {
    if (c == raw.target_column) continue;
    const auto& col = raw.columns[c];

    std::set<std::string> distinct_text;
    std::set<double> distinct_numbers;
    std::size_t present = 0;
    bool integer_valued = true;
    for (const auto& cell : col.cells) {
      if (!cell) continue;
      ++present;
      if (col.kind == ColumnKind::numeric) {
        const double v = *parse_number(*cell);
        distinct_numbers.insert(v);
        if (v != std::floor(v)) integer_valued = false;
      } else if (col.kind == ColumnKind::boolean) {
        const auto l = lower(*cell);
        distinct_text.insert(l == "true" || l == "1" ? "1" : "0");
      } else {
        distinct_text.insert(*cell);
      }
    }
    const std::size_t distinct =
        col.kind == ColumnKind::numeric ? distinct_numbers.size() : distinct_text.size();

    if (distinct <= 1) {
      report.removed_constant.push_back(col.name);
      continue;
    }
    const bool id_kind = col.kind == ColumnKind::categorical ||
                         (col.kind == ColumnKind::numeric && integer_valued);
    if (id_kind && present == n && distinct == n) {
      report.removed_identifier.push_back(col.name);
      continue;
    }

    Working w;
    w.name = col.name;
    if (col.kind == ColumnKind::categorical) {
      w.categorical = true;
      w.categories = col.cells;
    } else {
      w.numbers.reserve(n);
      for (const auto& cell : col.cells) {
        if (!cell) {
          w.numbers.emplace_back(std::nullopt);
        } else if (col.kind == ColumnKind::boolean) {
          const auto l = lower(*cell);
          w.numbers.emplace_back(l == "true" || l == "1" ? 1.0 : 0.0);
        } else {
          w.numbers.emplace_back(*parse_number(*cell));
        }
      }
    }
    kept.push_back(std::move(w));
  }

  // Imputation, then one-hot encoding.
  std::vector<std::string> names;
  std::vector<std::vector<double>> encoded;
  for (auto& w : kept) {
    if (w.categorical) {
      bool any_missing = false;
      for (auto& cell : w.categories) {
        if (!cell) {
          cell = kMissingCategory;
          any_missing = true;
        }
      }
      if (any_missing) report.imputed.emplace_back(w.name, kMissingCategory);
      std::set<std::string> cats;
      for (const auto& cell : w.categories) cats.insert(*cell);
      report.one_hot_expansions.emplace_back(w.name, cats.size());
      for (const auto& cat : cats) {
        std::vector<double> indicator(n, 0.0);
        for (std::size_t i = 0; i < n; ++i)
          if (*w.categories[i] == cat) indicator[i] = 1.0;
        names.push_back(w.name + "=" + cat);
        encoded.push_back(std::move(indicator));
      }
    } else {
      std::vector<double> present;
      for (const auto& v : w.numbers)
        if (v) present.push_back(*v);
      std::vector<double> values(n);
      if (present.size() < n) {
        const double fill = median_of(present);
        report.imputed.emplace_back(w.name, format_number(fill));
        for (std::size_t i = 0; i < n; ++i) values[i] = w.numbers[i].value_or(fill);
      } else {
        for (std::size_t i = 0; i < n; ++i) values[i] = *w.numbers[i];
      }
      names.push_back(w.name);
      encoded.push_back(std::move(values));
    }
  }

  // Standardization with the population standard deviation.
  std::vector<std::string> final_names;
  std::vector<std::vector<double>> final_columns;
  for (std::size_t c = 0; c < encoded.size(); ++c) {
    auto& values = encoded[c];
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(n);
    double ss = 0.0;
    for (double& v : values) {
      v -= mean;
      ss += v * v;
    }
    const double sd = std::sqrt(ss / static_cast<double>(n));
    if (!(sd > 1e-12 * std::max(1.0, std::abs(mean)))) {
      report.removed_constant.push_back(names[c]);
      continue;
    }
    for (double& v : values) v /= sd;
    // Second centering pass removes the rounding residue of the first.
    const double residue = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(n);
    for (double& v : values) v -= residue;
    final_names.push_back(names[c]);
    final_columns.push_back(std::move(values));
  }
  if (final_columns.empty()) throw DataError(fmt::format("{}: empty feature space", raw.name));

  DataTable table;
  table.name = raw.name;
  table.feature_names = std::move(final_names);
  table.features = Matrix(n, final_columns.size());
  for (std::size_t c = 0; c < final_columns.size(); ++c)
    for (std::size_t i = 0; i < n; ++i) table.features(i, c) = final_columns[c][i];

  const auto counts = raw.class_counts();
  std::map<std::string, int> index_of;
  for (const auto& [label, count] : counts) {
    index_of[label] = static_cast<int>(table.class_names.size());
    table.class_names.push_back(label);
  }
  table.labels.reserve(n);
  for (const auto& cell : raw.target().cells) table.labels.push_back(index_of.at(*cell));
  return {std::move(table), std::move(report)};
}

RawDataset to_raw(const DataTable& table) {
  RawDataset raw;
  raw.name = table.name;
  for (std::size_t c = 0; c < table.n_features(); ++c) {
    RawColumn col;
    col.name = c < table.feature_names.size() ? table.feature_names[c] : fmt::format("f{}", c);
    col.kind = ColumnKind::numeric;
    for (std::size_t i = 0; i < table.n_instances(); ++i) col.cells.emplace_back(fmt::format("{}", table.features(i, c)));
    raw.columns.push_back(std::move(col));
  }
  RawColumn target;
  target.name = "class";
  target.kind = ColumnKind::categorical;
  for (int l : table.labels) target.cells.emplace_back(table.class_names[static_cast<std::size_t>(l)]);
  raw.target_column = raw.columns.size();
  raw.columns.push_back(std::move(target));
  return raw;
}

std::vector<std::size_t> FoldAssignment::test_indices(std::size_t fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < fold_of.size(); ++i)
    if (fold_of[i] == fold) out.push_back(i);
  return out;
}

std::vector<std::size_t> FoldAssignment::train_indices(std::size_t fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < fold_of.size(); ++i)
    if (fold_of[i] != fold) out.push_back(i);
  return out;
}

FoldAssignment stratified_folds(const DataTable& table, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw DataError(fmt::format("{}: fold count must be >= 2, got {}", table.name, k));
  const auto counts = table.class_counts();
  for (std::size_t c = 0; c < counts.size(); ++c)
    if (counts[c] < k)
      throw DataError(fmt::format("{}: class '{}' has {} instance(s), fewer than {} folds", table.name,
                                  table.class_names[c], counts[c], k));

  FoldAssignment out;
  out.dataset = table.name;
  out.k = k;
  out.seed = seed;
  out.fold_of.assign(table.n_instances(), 0);

  Rng rng(seed);
  std::size_t next_fold = 0;
  for (std::size_t c = 0; c < counts.size(); ++c) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < table.labels.size(); ++i)
      if (static_cast<std::size_t>(table.labels[i]) == c) members.push_back(i);
    rng.shuffle(std::span<std::size_t>(members));
    for (std::size_t idx : members) {
      out.fold_of[idx] = next_fold;
      next_fold = (next_fold + 1) % k;
    }
  }
  return out;
}

}  // namespace dminer
