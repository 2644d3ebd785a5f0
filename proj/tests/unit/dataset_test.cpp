#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "dminer/dataset.hpp"
#include "dminer/error.hpp"
#include "dminer/random.hpp"
#include "synthetic.hpp"

namespace dminer {
namespace {

namespace fs = std::filesystem;

fs::path scratch(const std::string& name, const std::string& text) {
  const fs::path dir = fs::temp_directory_path() / "dminer_dataset_test";
  fs::create_directories(dir);
  const fs::path p = dir / name;
  std::ofstream(p) << text;
  return p;
}

TEST(LoadCsv, ThreeRows) {
  const auto raw = load_csv(scratch("three.csv", "x,y\n1,a\n2,b\n3,a\n"), "y");
  ASSERT_EQ(raw.columns.size(), 2u);
  EXPECT_EQ(raw.columns[0].kind, ColumnKind::numeric);
  EXPECT_EQ(raw.target().name, "y");
  EXPECT_EQ(raw.class_counts().size(), 2u);
}

TEST(LoadCsv, AllMissingColumnKept) {
  const auto raw = load_csv(scratch("missing.csv", "x,m,y\n1,?,a\n2,?,b\n3,?,a\n"), "y");
  ASSERT_EQ(raw.columns.size(), 3u);
  for (const auto& cell : raw.columns[1].cells) EXPECT_FALSE(cell.has_value());
}

TEST(LoadCsv, IdentifierColumnSurvivesLoading) {
  std::string text = "id,x,y\n";
  for (int i = 1; i <= 20; ++i) text += std::to_string(i) + "," + std::to_string(i % 3) + "," + (i % 2 ? "a" : "b") + "\n";
  const auto raw = load_csv(scratch("id.csv", text), "y");
  EXPECT_EQ(raw.columns[0].name, "id");
  const auto [table, report] = preprocess(raw);
  ASSERT_EQ(report.removed_identifier.size(), 1u);
  EXPECT_EQ(report.removed_identifier[0], "id");
  EXPECT_EQ(table.n_features(), 1u);
}

TEST(LoadArff, NumericAndNominal) {
  const auto raw = load_arff(scratch("ok.arff",
                                     "@relation t\n@attribute a numeric\n@attribute b real\n"
                                     "@attribute class {pos,neg}\n@data\n1,2,pos\n3,4,neg\n5,6,pos\n7,8,neg\n"));
  EXPECT_EQ(raw.columns.size(), 3u);
  EXPECT_EQ(raw.columns[0].kind, ColumnKind::numeric);
  EXPECT_EQ(raw.class_counts().size(), 2u);
}

TEST(LoadArff, StringAttributeRejectedByName) {
  const auto p = scratch("str.arff", "@relation t\n@attribute note string\n@attribute class {a,b}\n@data\nx,a\n");
  try {
    load_arff(p);
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("note"), std::string::npos);
  }
}

TEST(LoadArff, SparseRejected) {
  const auto p = scratch("sparse.arff", "@relation t\n@attribute a numeric\n@attribute class {a,b}\n@data\n{0 1,1 a}\n");
  try {
    load_arff(p);
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("sparse ARFF unsupported"), std::string::npos);
  }
}

TEST(Preprocess, ConstantColumnRemoved) {
  const auto raw = load_csv(scratch("const.csv", "c,x,y\n5,1.5,a\n5,2.5,b\n5,1.5,a\n5,3.5,b\n"), "y");
  const auto [table, report] = preprocess(raw);
  ASSERT_EQ(report.removed_constant.size(), 1u);
  EXPECT_EQ(report.removed_constant[0], "c");
  EXPECT_EQ(table.n_features(), 1u);
}

TEST(Preprocess, MedianImputation) {
  const auto raw = load_csv(scratch("impute.csv", "x,y\n1,a\n?,b\n3,a\n"), "y");
  const auto [table, report] = preprocess(raw);
  ASSERT_EQ(report.imputed.size(), 1u);
  EXPECT_EQ(report.imputed[0].second, "2");
  // [1,2,3] standardized with population sd sqrt(2/3).
  const double s = std::sqrt(2.0 / 3.0);
  EXPECT_NEAR(table.features(0, 0), -1.0 / s, 1e-12);
  EXPECT_NEAR(table.features(1, 0), 0.0, 1e-12);
  EXPECT_NEAR(table.features(2, 0), 1.0 / s, 1e-12);
}

TEST(Preprocess, OneHotIndicatorsSumToOne) {
  std::string text = "c,x,y\n";
  const char* cats[] = {"r", "g", "b", "g", "r", "b", "b", "r", "g", "r"};
  for (int i = 0; i < 10; ++i) text += std::string(cats[i]) + "," + std::to_string(i * 1.5) + "," + (i % 2 ? "p" : "q") + "\n";
  const auto [table, report] = preprocess(load_csv(scratch("onehot.csv", text), "y"));
  ASSERT_EQ(report.one_hot_expansions.size(), 1u);
  EXPECT_EQ(report.one_hot_expansions[0].second, 3u);
  EXPECT_EQ(table.n_features(), 4u);
  // Undo standardization per indicator: value = mean + sd * z, mean = share, sd = sqrt(share (1 - share)).
  std::vector<std::size_t> indicator;
  for (std::size_t c = 0; c < table.n_features(); ++c)
    if (table.feature_names[c] != "x") indicator.push_back(c);
  ASSERT_EQ(indicator.size(), 3u);
  for (std::size_t i = 0; i < 10; ++i) {
    double sum = 0.0;
    for (auto c : indicator) {
      double hi = -1e300;
      for (std::size_t r = 0; r < 10; ++r) hi = std::max(hi, table.features(r, c));
      sum += table.features(i, c) == hi ? 1.0 : 0.0;
    }
    EXPECT_EQ(sum, 1.0);
  }
}

TEST(Preprocess, EmptyFeatureSpace) {
  const auto raw = load_csv(scratch("empty.csv", "c,y\n1,a\n1,b\n1,a\n"), "y");
  EXPECT_THROW(preprocess(raw), DataError);
}

TEST(Preprocess, Idempotent) {
  const auto table = testkit::blobs("b", 15, 3, 4, 1.0, 2.0, 11);
  const auto [again, report] = preprocess(to_raw(table));
  EXPECT_TRUE(report.removed_constant.empty());
  EXPECT_TRUE(report.removed_identifier.empty());
  ASSERT_EQ(again.n_features(), table.n_features());
  for (std::size_t i = 0; i < table.n_instances(); ++i)
    for (std::size_t c = 0; c < table.n_features(); ++c)
      EXPECT_NEAR(again.features(i, c), table.features(i, c), 1e-9);
}

TEST(Preprocess, Standardized) {
  const auto table = testkit::blobs("b", 20, 2, 3, 2.0, 5.0, 5);
  for (std::size_t c = 0; c < table.n_features(); ++c) {
    double m = 0, v = 0;
    for (std::size_t i = 0; i < table.n_instances(); ++i) m += table.features(i, c);
    m /= table.n_instances();
    for (std::size_t i = 0; i < table.n_instances(); ++i) v += std::pow(table.features(i, c) - m, 2);
    EXPECT_NEAR(m, 0.0, 1e-12);
    EXPECT_NEAR(v / table.n_instances(), 1.0, 1e-12);
  }
}

DataTable with_counts(const std::vector<std::size_t>& counts) {
  std::size_t n = 0;
  for (auto c : counts) n += c;
  Matrix x(n, 1);
  std::vector<std::string> labels;
  std::size_t row = 0;
  for (std::size_t c = 0; c < counts.size(); ++c)
    for (std::size_t i = 0; i < counts[c]; ++i, ++row) {
      x(row, 0) = static_cast<double>(row) * 0.37 + static_cast<double>(c);
      labels.push_back("k" + std::to_string(c));
    }
  return testkit::make_table("t", x, labels);
}

std::vector<std::vector<std::size_t>> per_fold_class_counts(const DataTable& t, const FoldAssignment& f) {
  std::vector<std::vector<std::size_t>> counts(f.k, std::vector<std::size_t>(t.n_classes(), 0));
  for (std::size_t i = 0; i < t.n_instances(); ++i) ++counts[f.fold_of[i]][static_cast<std::size_t>(t.labels[i])];
  return counts;
}

TEST(Folds, BalancedTwentyOnePerFold) {
  const auto t = with_counts({10, 10});
  const auto counts = per_fold_class_counts(t, stratified_folds(t, 10, 1));
  for (const auto& f : counts) EXPECT_EQ(f, (std::vector<std::size_t>{1, 1}));
}

TEST(Folds, ThirtyTwoToOne) {
  const auto t = with_counts({20, 10});
  for (const auto& f : per_fold_class_counts(t, stratified_folds(t, 10, 2)))
    EXPECT_EQ(f, (std::vector<std::size_t>{2, 1}));
}

TEST(Folds, ThirteenTen) {
  const auto t = with_counts({13, 10});
  for (const auto& f : per_fold_class_counts(t, stratified_folds(t, 10, 3))) {
    EXPECT_GE(f[0], 1u);
    EXPECT_LE(f[0], 2u);
    EXPECT_EQ(f[1], 1u);
  }
}

TEST(Folds, TooFewInstancesNamesClass) {
  const auto t = with_counts({12, 4});
  try {
    stratified_folds(t, 5, 0);
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("k1"), std::string::npos);
  }
}

TEST(Folds, RandomTablesObeyPlusMinusOne) {
  Rng rng(99);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t k = 2 + rng.index(9);
    const std::size_t classes = 2 + rng.index(4);
    std::vector<std::size_t> counts;
    for (std::size_t c = 0; c < classes; ++c) counts.push_back(k + rng.index(25));
    const auto t = with_counts(counts);
    const auto f = stratified_folds(t, k, rng.index(1000));
    EXPECT_EQ(f.fold_of, stratified_folds(t, k, f.seed).fold_of);
    std::set<std::size_t> all;
    std::vector<std::size_t> sizes(k, 0);
    for (std::size_t fold = 0; fold < k; ++fold) {
      for (auto i : f.test_indices(fold)) EXPECT_TRUE(all.insert(i).second);
      sizes[fold] = f.test_indices(fold).size();
      EXPECT_EQ(f.train_indices(fold).size() + sizes[fold], t.n_instances());
    }
    EXPECT_EQ(all.size(), t.n_instances());
    const auto per = per_fold_class_counts(t, f);
    for (std::size_t c = 0; c < classes; ++c) {
      std::size_t lo = SIZE_MAX, hi = 0;
      for (const auto& fold : per) {
        lo = std::min(lo, fold[c]);
        hi = std::max(hi, fold[c]);
      }
      EXPECT_LE(hi - lo, 1u);
    }
    EXPECT_LE(*std::max_element(sizes.begin(), sizes.end()) - *std::min_element(sizes.begin(), sizes.end()), 1u);
  }
}

}  // namespace
}  // namespace dminer
