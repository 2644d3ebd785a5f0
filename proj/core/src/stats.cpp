#include "dminer/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/special_functions/gamma.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "dminer/error.hpp"

namespace dminer {

namespace {

// Studentized range statistic divided by sqrt(2), k = 2..10.
constexpr double kQ05[] = {1.960, 2.343, 2.569, 2.728, 2.850, 2.949, 3.031, 3.102, 3.164};
constexpr double kQ10[] = {1.645, 2.052, 2.291, 2.459, 2.589, 2.693, 2.780, 2.855, 2.920};

constexpr double kZeroDifference = 1e-12;

}  // namespace

std::vector<double> midranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = r;
    i = j + 1;
  }
  return ranks;
}

RankMatrix rank_rows(const Matrix& values) {
  RankMatrix out{values, Matrix(values.rows(), values.cols())};
  std::vector<double> negated(values.cols());
  for (std::size_t i = 0; i < values.rows(); ++i) {
    auto row = values.row(i);
    for (std::size_t j = 0; j < row.size(); ++j) negated[j] = -row[j];
    const auto r = midranks(negated);
    for (std::size_t j = 0; j < r.size(); ++j) out.ranks(i, j) = r[j];
  }
  return out;
}

FriedmanResult friedman(const Matrix& values) {
  const std::size_t n = values.rows();
  const std::size_t k = values.cols();
  if (n < 2 || k < 2) throw DataError(fmt::format("friedman: need N >= 2 and k >= 2 (got N={}, k={})", n, k));
  const auto ranked = rank_rows(values);

  FriedmanResult out;
  out.n_datasets = n;
  out.degrees_of_freedom = k - 1;
  out.mean_ranks.assign(k, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < k; ++j) out.mean_ranks[j] += ranked.ranks(i, j);
  for (double& r : out.mean_ranks) r /= static_cast<double>(n);

  const double kd = static_cast<double>(k);
  double sum_sq = 0.0;
  for (double r : out.mean_ranks) sum_sq += r * r;
  const double stat = 12.0 * static_cast<double>(n) / (kd * (kd + 1.0)) * (sum_sq - kd * (kd + 1.0) * (kd + 1.0) / 4.0);
  // Rounding can leave a tiny negative value when all ranks tie.
  out.statistic = stat < 1e-12 ? 0.0 : stat;
  out.p_value = out.statistic == 0.0 ? 1.0 : boost::math::gamma_q((kd - 1.0) / 2.0, out.statistic / 2.0);
  return out;
}

double nemenyi_q(std::size_t k, double alpha) {
  if (k < 2 || k > 10) throw ConfigError("k", fmt::format("Nemenyi constants cover 2..10 strategies, got {}", k));
  if (std::abs(alpha - 0.05) < 1e-12) return kQ05[k - 2];
  if (std::abs(alpha - 0.10) < 1e-12) return kQ10[k - 2];
  throw ConfigError("alpha", fmt::format("unsupported significance level {} (0.05 or 0.10)", alpha));
}

double nemenyi_cd(std::size_t k, std::size_t n, double alpha) {
  if (n < 1) throw ConfigError("N", "must be at least 1");
  const double kd = static_cast<double>(k);
  return nemenyi_q(k, alpha) * std::sqrt(kd * (kd + 1.0) / (6.0 * static_cast<double>(n)));
}

NemenyiResult nemenyi(const std::vector<std::string>& strategies, const std::vector<double>& mean_ranks,
                      std::size_t n, double alpha) {
  const std::size_t k = strategies.size();
  if (mean_ranks.size() != k) throw DataError("nemenyi: one mean rank per strategy required");
  NemenyiResult out;
  out.critical_difference = nemenyi_cd(k, n, alpha);
  out.strategies = strategies;
  out.mean_ranks = mean_ranks;
  out.significant.assign(k, std::vector<bool>(k, false));
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j)
      out.significant[i][j] = std::abs(mean_ranks[i] - mean_ranks[j]) > out.critical_difference;

  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return mean_ranks[a] < mean_ranks[b]; });
  std::size_t last_end = 0;
  for (std::size_t i = 0; i < k; ++i) {
    std::size_t end = i;
    while (end + 1 < k && mean_ranks[order[end + 1]] - mean_ranks[order[i]] <= out.critical_difference) ++end;
    if (end > i && (out.cd_groups.empty() || end > last_end)) {
      std::vector<std::string> group;
      for (std::size_t t = i; t <= end; ++t) group.push_back(strategies[order[t]]);
      out.cd_groups.push_back(std::move(group));
      last_end = end;
    }
  }
  return out;
}

const char* to_string(WilcoxonMethod m) {
  switch (m) {
    case WilcoxonMethod::exact: return "exact";
    case WilcoxonMethod::normal_approx: return "normal-approx";
    case WilcoxonMethod::degenerate: return "degenerate";
  }
  return "unknown";
}

double wilcoxon_exact_p(std::span<const double> ranks, double w) {
  // Doubled ranks are integers; count subsets (positive-sign sets) per sum.
  std::vector<std::size_t> doubled;
  std::size_t total = 0;
  for (double r : ranks) {
    doubled.push_back(static_cast<std::size_t>(std::llround(2.0 * r)));
    total += doubled.back();
  }
  std::vector<double> count(total + 1, 0.0);
  count[0] = 1.0;
  std::size_t reach = 0;
  for (std::size_t r : doubled) {
    for (std::size_t s = reach + 1; s-- > 0;)
      if (count[s] != 0.0) count[s + r] += count[s];
    reach += r;
  }
  const auto limit = static_cast<std::size_t>(std::llround(2.0 * w));
  double tail = 0.0;
  for (std::size_t s = 0; s <= std::min(limit, total); ++s) tail += count[s];
  const double p = 2.0 * tail / std::ldexp(1.0, static_cast<int>(ranks.size()));
  return std::min(1.0, p);
}

double wilcoxon_normal_p(std::span<const double> ranks, double w) {
  const double n = static_cast<double>(ranks.size());
  const double mean = n * (n + 1.0) / 4.0;
  double tie_term = 0.0;
  std::vector<double> sorted(ranks.begin(), ranks.end());
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j + 1 < sorted.size() && sorted[j + 1] == sorted[i]) ++j;
    const double t = static_cast<double>(j - i + 1);
    tie_term += t * t * t - t;
    i = j + 1;
  }
  const double var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - tie_term / 48.0;
  if (!(var > 0.0)) return 1.0;
  const double z = std::max(0.0, std::abs(w - mean) - 0.5) / std::sqrt(var);
  return std::min(1.0, std::erfc(z / std::sqrt(2.0)));
}

WilcoxonResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.empty())
    throw DataError(fmt::format("wilcoxon: need equal non-empty samples (got {} and {})", a.size(), b.size()));
  std::vector<double> diffs;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (const double d = a[i] - b[i]; std::abs(d) > kZeroDifference) diffs.push_back(d);

  WilcoxonResult out;
  out.n_effective = diffs.size();
  if (diffs.empty()) return out;

  std::vector<double> magnitudes(diffs.size());
  // Snap to a 1e-12 grid so that differences equal up to rounding share a rank.
  std::transform(diffs.begin(), diffs.end(), magnitudes.begin(),
                 [](double d) { return std::round(std::abs(d) / kZeroDifference) * kZeroDifference; });
  const auto ranks = midranks(magnitudes);
  for (std::size_t i = 0; i < diffs.size(); ++i) (diffs[i] > 0.0 ? out.w_plus : out.w_minus) += ranks[i];
  out.statistic = std::min(out.w_plus, out.w_minus);
  if (out.n_effective <= kWilcoxonExactLimit) {
    out.method = WilcoxonMethod::exact;
    out.p_value = wilcoxon_exact_p(ranks, out.statistic);
  } else {
    out.method = WilcoxonMethod::normal_approx;
    out.p_value = wilcoxon_normal_p(ranks, out.statistic);
  }
  return out;
}

std::pair<std::vector<double>, std::vector<double>> paired_observations(const StrategyTable& table,
                                                                        const std::string& dataset,
                                                                        std::size_t a, std::size_t b,
                                                                        Pairing pairing) {
  std::pair<std::vector<double>, std::vector<double>> out;
  for (const auto& row : table.rows) {
    if (row.dataset != dataset) continue;
    const auto& ca = row.cells.at(a);
    const auto& cb = row.cells.at(b);
    if (pairing == Pairing::replications) {
      out.first.push_back(ca.bac);
      out.second.push_back(cb.bac);
    } else {
      out.first.insert(out.first.end(), ca.per_fold.begin(), ca.per_fold.end());
      out.second.insert(out.second.end(), cb.per_fold.begin(), cb.per_fold.end());
    }
  }
  return out;
}

BestPairSummary best_pair_protocol(const StrategyTable& table, double alpha, Pairing pairing) {
  const std::size_t k = table.strategies.size();
  if (k < 2) throw DataError("best_pair_protocol: need at least 2 strategies");
  table.validate();

  BestPairSummary out;
  out.alpha = alpha;
  out.strategies = table.strategies;
  for (const auto& s : table.strategies) out.frequency[s] = {0, 0};

  std::vector<std::string> datasets;
  for (const auto& row : table.rows)
    if (std::find(datasets.begin(), datasets.end(), row.dataset) == datasets.end()) datasets.push_back(row.dataset);

  for (const auto& name : datasets) {
    std::vector<double> mean(k, 0.0);
    std::size_t count = 0;
    for (const auto& row : table.rows) {
      if (row.dataset != name) continue;
      for (std::size_t j = 0; j < k; ++j) mean[j] += row.cells[j].bac;
      ++count;
    }
    // Stable ordering: higher mean first, ties keep column order.
    std::vector<std::size_t> order(k);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return mean[x] > mean[y]; });
    const std::size_t first = order[0];
    const std::size_t second = order[1];

    const auto [obs_a, obs_b] = paired_observations(table, name, first, second, pairing);
    if (obs_a.size() < 2) {
      out.excluded.push_back(name);
      continue;
    }
    BestPairRow row;
    row.dataset = name;
    row.winner = table.strategies[first];
    row.runner_up = table.strategies[second];
    row.winner_bac = mean[first] / static_cast<double>(count);
    row.runner_up_bac = mean[second] / static_cast<double>(count);
    row.test = wilcoxon_signed_rank(obs_a, obs_b);
    row.significant = row.test.p_value < alpha;
    auto& tally = out.frequency[row.winner];
    (row.significant ? tally.first : tally.second) += 1;
    out.rows.push_back(std::move(row));
  }
  return out;
}

std::string wilcoxon_summary_csv(const BestPairSummary& rs_vs_tools, const BestPairSummary& rs_vs_all,
                                 const std::vector<std::string>& strategies) {
  std::string out = "strategy,rs_vs_tools_p_lt_alpha,rs_vs_tools_p_ge_alpha,rs_vs_all_p_lt_alpha,rs_vs_all_p_ge_alpha\n";
  auto cells = [](const BestPairSummary& s, const std::string& name) -> std::string {
    auto it = s.frequency.find(name);
    if (it == s.frequency.end()) return "--,--";
    return fmt::format("{},{}", it->second.first, it->second.second);
  };
  for (const auto& name : strategies)
    out += fmt::format("{},{},{}\n", name, cells(rs_vs_tools, name), cells(rs_vs_all, name));
  out += fmt::format("total,{},,{},\n", rs_vs_tools.rows.size() + rs_vs_tools.excluded.size(),
                     rs_vs_all.rows.size() + rs_vs_all.excluded.size());
  return out;
}

std::vector<HistogramBin> improvement_histogram(const StrategyTable& table, const std::string& a, const std::string& b,
                                                double bin_width) {
  if (!(bin_width > 0.0)) throw ConfigError("bin_width", "must be positive");
  const std::size_t ia = table.strategy_index(a);
  const std::size_t ib = table.strategy_index(b);

  std::map<long long, HistogramBin> positive, negative;
  HistogramBin zero{0.0, 0.0, 0, HistogramBin::Sign::zero, false};
  for (const auto& row : table.rows) {
    const double d = row.cells.at(ia).bac - row.cells.at(ib).bac;
    if (d == 0.0) {
      ++zero.count;
    } else if (d > 0.0) {
      // (k w, (k + 1) w]
      const auto idx = static_cast<long long>(std::ceil(d / bin_width)) - 1;
      auto& bin = positive[idx];
      bin.lower = static_cast<double>(idx) * bin_width;
      bin.upper = static_cast<double>(idx + 1) * bin_width;
      bin.sign = HistogramBin::Sign::positive;
      bin.high_improvement = bin.lower >= 0.1 - 1e-12;
      ++bin.count;
    } else {
      // [k w, (k + 1) w)
      const auto idx = static_cast<long long>(std::floor(d / bin_width));
      auto& bin = negative[idx];
      bin.lower = static_cast<double>(idx) * bin_width;
      bin.upper = static_cast<double>(idx + 1) * bin_width;
      bin.sign = HistogramBin::Sign::negative;
      ++bin.count;
    }
  }
  std::vector<HistogramBin> out;
  for (const auto& [idx, bin] : negative) out.push_back(bin);
  if (zero.count > 0) out.push_back(zero);
  for (const auto& [idx, bin] : positive) out.push_back(bin);
  return out;
}

std::string histogram_csv(const std::vector<HistogramBin>& bins) {
  std::string out = "lower,upper,count,sign,high_improvement\n";
  for (const auto& b : bins) {
    const char* sign = b.sign == HistogramBin::Sign::positive ? "positive"
                       : b.sign == HistogramBin::Sign::negative ? "negative"
                                                                 : "zero";
    out += fmt::format("{},{},{},{},{}\n", b.lower, b.upper, b.count, sign, b.high_improvement ? 1 : 0);
  }
  return out;
}

std::string to_json(const FriedmanResult& result, const std::vector<std::string>& strategies) {
  nlohmann::ordered_json j;
  j["schema_version"] = 1;
  j["statistic"] = result.statistic;
  j["degrees_of_freedom"] = result.degrees_of_freedom;
  j["p_value"] = result.p_value;
  j["n_datasets"] = result.n_datasets;
  auto ranks = nlohmann::ordered_json::object();
  for (std::size_t i = 0; i < strategies.size() && i < result.mean_ranks.size(); ++i)
    ranks[strategies[i]] = result.mean_ranks[i];
  j["mean_ranks"] = std::move(ranks);
  return j.dump(2);
}

std::string to_json(const NemenyiResult& result) {
  nlohmann::ordered_json j;
  j["schema_version"] = 1;
  j["critical_difference"] = result.critical_difference;
  j["strategies"] = result.strategies;
  j["mean_ranks"] = result.mean_ranks;
  auto sig = nlohmann::ordered_json::array();
  for (const auto& row : result.significant) sig.push_back(row);
  j["significant"] = std::move(sig);
  j["cd_groups"] = result.cd_groups;
  return j.dump(2);
}

}  // namespace dminer
