#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dminer/error.hpp"
#include "dminer/random.hpp"
#include "dminer/stats.hpp"

namespace dminer {
namespace {

TEST(Ranks, Midranks) {
  const std::vector<double> v{3.0, 1.0, 3.0, 2.0};
  EXPECT_EQ(midranks(v), (std::vector<double>{3.5, 1.0, 3.5, 2.0}));
}

TEST(Ranks, RowSumsAreTriangular) {
  Rng rng(3);
  Matrix m(40, 5);
  for (std::size_t i = 0; i < 40; ++i)
    for (std::size_t j = 0; j < 5; ++j) m(i, j) = std::round(rng.uniform(0, 4));  // frequent ties
  const auto r = rank_rows(m);
  for (std::size_t i = 0; i < 40; ++i) {
    double s = 0;
    for (std::size_t j = 0; j < 5; ++j) s += r.ranks(i, j);
    EXPECT_DOUBLE_EQ(s, 15.0);
  }
}

TEST(Friedman, IdenticalColumns) {
  Matrix m(6, 3);
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = 0; j < 3; ++j) m(i, j) = 0.1 * double(i);
  const auto f = friedman(m);
  EXPECT_EQ(f.statistic, 0.0);
  EXPECT_EQ(f.p_value, 1.0);
}

TEST(Friedman, DominantColumnMatchesHandRanks) {
  Rng rng(4);
  Matrix m(10, 3);
  for (std::size_t i = 0; i < 10; ++i) {
    m(i, 0) = 2.0;
    m(i, 1) = rng.uniform(0, 1);
    m(i, 2) = rng.uniform(0, 1);
  }
  // Hand computation: rank sums R_j, chi2 = 12/(N k (k+1)) sum R_j^2 - 3 N (k+1).
  std::vector<double> rsum(3, 0.0);
  for (std::size_t i = 0; i < 10; ++i) {
    rsum[0] += 1;
    rsum[1] += m(i, 1) > m(i, 2) ? 2 : 3;
    rsum[2] += m(i, 1) > m(i, 2) ? 3 : 2;
  }
  double sq = 0;
  for (double r : rsum) sq += r * r;
  const double want = 12.0 / (10.0 * 3 * 4) * sq - 3.0 * 10 * 4;
  const auto f = friedman(m);
  EXPECT_NEAR(f.statistic, want, 1e-9);
  EXPECT_EQ(f.mean_ranks[0], 1.0);
  EXPECT_EQ(f.degrees_of_freedom, 2u);
  EXPECT_NEAR(f.p_value, std::exp(-want / 2.0), 1e-12);  // chi2 with 2 df
}

TEST(Friedman, MonotoneRowTransformInvariant) {
  Rng rng(5);
  Matrix m(8, 4);
  for (std::size_t i = 0; i < 8; ++i)
    for (std::size_t j = 0; j < 4; ++j) m(i, j) = rng.uniform(0, 1);
  Matrix t = m;
  for (std::size_t j = 0; j < 4; ++j) t(3, j) = std::exp(5.0 * m(3, j)) - 7.0;
  EXPECT_EQ(friedman(m).statistic, friedman(t).statistic);
}

TEST(Nemenyi, CriticalDifferences) {
  EXPECT_NEAR(nemenyi_cd(5, 375, 0.05), 0.315, 0.001);
  EXPECT_NEAR(nemenyi_cd(4, 375, 0.05), 0.242, 0.001);
  EXPECT_NEAR(nemenyi_cd(2, 100, 0.05), 0.196, 1e-12);
  for (std::size_t k = 2; k <= 10; ++k) EXPECT_NEAR(nemenyi_cd(k, 400, 0.05), nemenyi_cd(k, 100, 0.05) / 2.0, 1e-15);
  EXPECT_THROW(nemenyi_cd(11, 10, 0.05), ConfigError);
  EXPECT_THROW(nemenyi_cd(3, 10, 0.01), ConfigError);
}

TEST(Nemenyi, SignificanceAndGroups) {
  const auto r = nemenyi({"a", "b", "c"}, {1.0, 1.2, 2.8}, 100, 0.05);
  EXPECT_FALSE(r.significant[0][1]);
  EXPECT_TRUE(r.significant[0][2]);
  EXPECT_TRUE(r.significant[1][2]);
  ASSERT_FALSE(r.cd_groups.empty());
  EXPECT_EQ(r.cd_groups[0], (std::vector<std::string>{"a", "b"}));
}

/// Exact null distribution of W+ for integer ranks 1..n, by dynamic programming.
double exact_p_dp(std::size_t n, double w) {
  const std::size_t max_sum = n * (n + 1) / 2;
  std::vector<double> counts(max_sum + 1, 0.0);
  counts[0] = 1.0;
  for (std::size_t r = 1; r <= n; ++r)
    for (std::size_t s = max_sum; s >= r; --s) counts[s] += counts[s - r];
  double below = 0.0;
  for (std::size_t s = 0; s <= max_sum && double(s) <= w; ++s) below += counts[s];
  return std::min(1.0, 2.0 * below / std::ldexp(1.0, int(n)));
}

TEST(Wilcoxon, EqualSamples) {
  const std::vector<double> a{0.1, 0.5, 0.9};
  const auto r = wilcoxon_signed_rank(a, a);
  EXPECT_EQ(r.p_value, 1.0);
  EXPECT_EQ(r.method, WilcoxonMethod::degenerate);
}

TEST(Wilcoxon, FiveAllPositive) {
  const std::vector<double> a{1, 2, 3, 4, 5}, b(5, 0.0);
  const auto r = wilcoxon_signed_rank(a, b);
  EXPECT_EQ(r.statistic, 0.0);
  EXPECT_EQ(r.p_value, 0.0625);
  EXPECT_EQ(r.method, WilcoxonMethod::exact);
}

TEST(Wilcoxon, ExactMatchesDpWithoutTies) {
  Rng rng(6);
  for (int t = 0; t < 50; ++t) {
    const std::size_t n = 1 + rng.index(25);
    std::vector<double> a(n), b(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) a[i] = (rng.index(2) ? 1.0 : -1.0) * (double(i) + 1.0 + rng.uniform(0, 0.5));
    const auto r = wilcoxon_signed_rank(a, b);
    EXPECT_EQ(r.p_value, exact_p_dp(n, r.statistic));
  }
}

TEST(Wilcoxon, NormalApproximationCloseAtThirty) {
  Rng rng(7);
  for (int t = 0; t < 20; ++t) {
    std::vector<double> ranks(30);
    std::iota(ranks.begin(), ranks.end(), 1.0);
    const double w = std::floor(rng.uniform(60.0, 232.0));
    EXPECT_NEAR(wilcoxon_normal_p(ranks, w), exact_p_dp(30, w), 0.02) << "w=" << w;
    EXPECT_NEAR(wilcoxon_exact_p(ranks, w), exact_p_dp(30, w), 1e-12);
  }
}

TEST(Wilcoxon, LargeSampleUsesNormal) {
  std::vector<double> a(40), b(40, 0.0);
  for (std::size_t i = 0; i < 40; ++i) a[i] = double(i + 1) * (i % 3 ? 1 : -1);
  EXPECT_EQ(wilcoxon_signed_rank(a, b).method, WilcoxonMethod::normal_approx);
}

StrategyTable two_strategies(std::size_t datasets, std::size_t folds, double gap) {
  StrategyTable t;
  t.strategies = {"x", "y"};
  Rng rng(9);
  for (std::size_t d = 0; d < datasets; ++d) {
    StrategyRow row;
    row.dataset = "d" + std::to_string(d);
    row.replication = 1;
    StrategyCell cx, cy;
    for (std::size_t f = 0; f < folds; ++f) {
      const double base = rng.uniform(0.5, 0.8);
      cx.per_fold.push_back(base + gap + 0.01 * double(f));
      cy.per_fold.push_back(base);
    }
    cx.bac = std::accumulate(cx.per_fold.begin(), cx.per_fold.end(), 0.0) / double(folds);
    cy.bac = std::accumulate(cy.per_fold.begin(), cy.per_fold.end(), 0.0) / double(folds);
    row.cells = {cx, cy};
    t.rows.push_back(row);
  }
  return t;
}

TEST(BestPair, DominantStrategyWinsEverySignificantly) {
  const auto t = two_strategies(6, 10, 0.05);
  const auto s = best_pair_protocol(t, 0.05);
  ASSERT_EQ(s.rows.size(), 6u);
  for (const auto& r : s.rows) {
    EXPECT_EQ(r.winner, "x");
    EXPECT_TRUE(r.significant);
  }
  EXPECT_EQ(s.frequency.at("x"), (std::pair<std::size_t, std::size_t>{6, 0}));
}

TEST(BestPair, CountsMatchIndependentRerun) {
  auto t = two_strategies(8, 6, 0.0);
  Rng rng(10);
  for (auto& row : t.rows)
    for (auto& v : row.cells[0].per_fold) v += rng.uniform(-0.05, 0.08);
  for (auto& row : t.rows)
    row.cells[0].bac = std::accumulate(row.cells[0].per_fold.begin(), row.cells[0].per_fold.end(), 0.0) / 6.0;
  const auto s = best_pair_protocol(t, 0.05);
  std::size_t sig = 0;
  for (const auto& row : t.rows) {
    const auto& a = row.cells[0].per_fold;
    const auto& b = row.cells[1].per_fold;
    sig += wilcoxon_signed_rank(a, b).p_value < 0.05;
  }
  std::size_t tallied = 0;
  for (const auto& [name, counts] : s.frequency) tallied += counts.first;
  EXPECT_EQ(tallied, sig);
}

TEST(BestPair, TooFewObservationsExcluded) {
  const auto t = two_strategies(3, 1, 0.1);
  const auto s = best_pair_protocol(t, 0.05);
  EXPECT_EQ(s.excluded.size(), 3u);
  EXPECT_TRUE(s.rows.empty());
}

StrategyTable with_differences(const std::vector<double>& diffs) {
  StrategyTable t;
  t.strategies = {"a", "b"};
  for (std::size_t i = 0; i < diffs.size(); ++i)
    t.rows.push_back({"d" + std::to_string(i), 1, {{0.5 + diffs[i], {0.5 + diffs[i]}}, {0.5, {0.5}}}});
  return t;
}

TEST(Histogram, EqualStrategiesSingleZeroBin) {
  const auto bins = improvement_histogram(with_differences({0, 0, 0}), "a", "a", 0.05);
  ASSERT_EQ(bins.size(), 1u);
  EXPECT_EQ(bins[0].sign, HistogramBin::Sign::zero);
  EXPECT_EQ(bins[0].count, 3u);
}

TEST(Histogram, HighImprovementBin) {
  const auto bins = improvement_histogram(with_differences({0.12, -0.01}), "a", "b", 0.05);
  ASSERT_EQ(bins.size(), 2u);
  EXPECT_EQ(bins[0].sign, HistogramBin::Sign::negative);
  EXPECT_EQ(bins[1].sign, HistogramBin::Sign::positive);
  EXPECT_TRUE(bins[1].high_improvement);
  EXPECT_FALSE(bins[0].high_improvement);
}

TEST(Histogram, CountsSumToRows) {
  Rng rng(11);
  std::vector<double> d;
  for (int i = 0; i < 60; ++i) d.push_back(rng.uniform(-0.3, 0.3));
  std::size_t total = 0;
  for (const auto& b : improvement_histogram(with_differences(d), "a", "b", 0.05)) total += b.count;
  EXPECT_EQ(total, 60u);
}

}  // namespace
}  // namespace dminer
