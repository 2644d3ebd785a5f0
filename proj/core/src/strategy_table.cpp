#include "dminer/strategy_table.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "dminer/error.hpp"
#include "dminer/evaluation.hpp"

namespace dminer {

std::size_t StrategyTable::strategy_index(std::string_view name) const {
  auto it = std::find(strategies.begin(), strategies.end(), name);
  if (it == strategies.end()) throw DataError(fmt::format("missing strategy column '{}'", name));
  return static_cast<std::size_t>(it - strategies.begin());
}

bool StrategyTable::has_strategy(std::string_view name) const {
  return std::find(strategies.begin(), strategies.end(), name) != strategies.end();
}

bool StrategyTable::multi_replication() const {
  return std::any_of(rows.begin(), rows.end(),
                     [&](const StrategyRow& r) { return r.replication != rows.front().replication; });
}

std::string StrategyTable::row_id(std::size_t row) const {
  const auto& r = rows.at(row);
  return multi_replication() ? fmt::format("r{}/{}", r.replication, r.dataset) : r.dataset;
}

Matrix StrategyTable::values() const {
  validate();
  Matrix m(rows.size(), strategies.size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < strategies.size(); ++j) m(i, j) = rows[i].cells[j].bac;
  return m;
}

StrategyTable StrategyTable::select(const std::vector<std::string>& names) const {
  StrategyTable out;
  out.strategies = names;
  std::vector<std::size_t> idx;
  for (const auto& n : names) idx.push_back(strategy_index(n));
  for (const auto& r : rows) {
    StrategyRow nr{r.dataset, r.replication, {}};
    for (std::size_t j : idx) nr.cells.push_back(r.cells.at(j));
    out.rows.push_back(std::move(nr));
  }
  return out;
}

std::vector<double> StrategyTable::medians() const {
  validate();
  std::vector<double> out;
  for (std::size_t j = 0; j < strategies.size(); ++j) {
    std::vector<double> col;
    for (const auto& r : rows) col.push_back(r.cells[j].bac);
    out.push_back(col.empty() ? 0.0 : median(std::move(col)));
  }
  return out;
}

void StrategyTable::validate() const {
  for (const auto& r : rows) {
    if (r.cells.size() != strategies.size())
      throw DataError(fmt::format("strategy table: row '{}' has {} cells for {} strategies", r.dataset,
                                  r.cells.size(), strategies.size()));
    for (std::size_t j = 1; j < r.cells.size(); ++j)
      if (r.cells[j].per_fold.size() != r.cells[0].per_fold.size())
        throw DataError(fmt::format("strategy table: row '{}' strategy '{}' has unpaired folds", r.dataset,
                                    strategies[j]));
  }
}

std::string to_csv(const StrategyTable& table) {
  std::string out = "dataset,strategy,bac\n";
  for (std::size_t i = 0; i < table.rows.size(); ++i)
    for (std::size_t j = 0; j < table.strategies.size(); ++j)
      out += fmt::format("{},{},{}\n", table.row_id(i), table.strategies[j], table.rows[i].cells.at(j).bac);
  return out;
}

std::string to_violin_csv(const StrategyTable& table) {
  std::string out = "strategy,dataset,bac\n";
  for (std::size_t j = 0; j < table.strategies.size(); ++j)
    for (std::size_t i = 0; i < table.rows.size(); ++i)
      out += fmt::format("{},{},{}\n", table.strategies[j], table.row_id(i), table.rows[i].cells.at(j).bac);
  return out;
}

}  // namespace dminer
