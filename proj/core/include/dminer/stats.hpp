#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "dminer/matrix.hpp"
#include "dminer/strategy_table.hpp"

namespace dminer {

/// Mid-ranks of `values` in ascending order (smallest gets rank 1).
std::vector<double> midranks(std::span<const double> values);

struct RankMatrix {
  Matrix values;  // rows = datasets, cols = strategies
  Matrix ranks;   // rank 1 = best (largest value), ties share the mean rank
};

RankMatrix rank_rows(const Matrix& values);

struct FriedmanResult {
  double statistic = 0.0;
  std::size_t degrees_of_freedom = 0;
  double p_value = 1.0;
  std::vector<double> mean_ranks;
  std::size_t n_datasets = 0;
};

/// Classic chi-square Friedman test over the rows of `values`.
FriedmanResult friedman(const Matrix& values);

/// q_alpha(k) for the two-tailed Nemenyi test; k in [2, 10], alpha in {0.05, 0.10}.
double nemenyi_q(std::size_t k, double alpha);

/// CD = q_alpha(k) sqrt(k (k + 1) / (6 N)).
double nemenyi_cd(std::size_t k, std::size_t n, double alpha);

struct NemenyiResult {
  double critical_difference = 0.0;
  std::vector<std::string> strategies;
  std::vector<double> mean_ranks;
  std::vector<std::vector<bool>> significant;
  std::vector<std::vector<std::string>> cd_groups;  // maximal cliques within CD, best first
};

NemenyiResult nemenyi(const std::vector<std::string>& strategies, const std::vector<double>& mean_ranks,
                      std::size_t n, double alpha);

enum class WilcoxonMethod { exact, normal_approx, degenerate };

const char* to_string(WilcoxonMethod m);

struct WilcoxonResult {
  double statistic = 0.0;  // min(W+, W-)
  double w_plus = 0.0;
  double w_minus = 0.0;
  std::size_t n_effective = 0;
  double p_value = 1.0;
  WilcoxonMethod method = WilcoxonMethod::degenerate;
};

/// Largest n_effective handled by the exact null distribution.
inline constexpr std::size_t kWilcoxonExactLimit = 25;

/// Two-sided exact p for statistic `w` given the absolute-difference ranks
/// (multiples of 0.5), from the exact null distribution of W+.
double wilcoxon_exact_p(std::span<const double> ranks, double w);

/// Two-sided normal approximation with tie-corrected variance and continuity correction.
double wilcoxon_normal_p(std::span<const double> ranks, double w);

/// Paired two-sided signed-rank test on a - b.
WilcoxonResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b);

enum class Pairing { folds, replications };

struct BestPairRow {
  std::string dataset;
  std::string winner;
  std::string runner_up;
  double winner_bac = 0.0;
  double runner_up_bac = 0.0;
  WilcoxonResult test;
  bool significant = false;
};

struct BestPairSummary {
  std::vector<std::string> strategies;
  std::vector<BestPairRow> rows;
  std::vector<std::string> excluded;  // fewer than 2 paired observations
  /// strategy -> {wins with p < alpha, wins with p >= alpha}
  std::map<std::string, std::pair<std::size_t, std::size_t>> frequency;
  double alpha = 0.05;
};

/// Paired observations of two strategies for one dataset (all its rows).
std::pair<std::vector<double>, std::vector<double>> paired_observations(const StrategyTable& table,
                                                                        const std::string& dataset,
                                                                        std::size_t a, std::size_t b,
                                                                        Pairing pairing);

/// Per dataset: rank strategies by mean BAC, test the top two, tally winners.
BestPairSummary best_pair_protocol(const StrategyTable& table, double alpha, Pairing pairing = Pairing::folds);

/// Two-comparison frequency table (columns: RS vs Tools, RS vs All).
std::string wilcoxon_summary_csv(const BestPairSummary& rs_vs_tools, const BestPairSummary& rs_vs_all,
                                 const std::vector<std::string>& strategies);

struct HistogramBin {
  double lower = 0.0;
  double upper = 0.0;
  std::size_t count = 0;
  enum class Sign { negative, zero, positive } sign = Sign::zero;
  bool high_improvement = false;  // positive bin starting at or above 0.1
};

/// Per-row differences BAC_a - BAC_b binned by `bin_width`; exact zeros get
/// their own bin.
std::vector<HistogramBin> improvement_histogram(const StrategyTable& table, const std::string& a,
                                                const std::string& b, double bin_width);

std::string histogram_csv(const std::vector<HistogramBin>& bins);
std::string to_json(const FriedmanResult& result, const std::vector<std::string>& strategies);
std::string to_json(const NemenyiResult& result);

}  // namespace dminer
