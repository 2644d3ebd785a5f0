#include <gtest/gtest.h>

#include <algorithm>

#include "dminer/random_search.hpp"
#include "synthetic.hpp"

namespace dminer {
namespace {

TEST(Uniform, CoversTheBox) {
  Rng rng(10);
  const HPSpace space;
  double mc = 0, mg = 0, lo_c = 1e9, hi_c = -1e9, lo_g = 1e9, hi_g = -1e9;
  for (int i = 0; i < 10000; ++i) {
    const auto h = sample_uniform(space, rng);
    ASSERT_TRUE(space.contains(h));
    mc += h.log2_cost;
    mg += h.log2_gamma;
    lo_c = std::min(lo_c, h.log2_cost);
    hi_c = std::max(hi_c, h.log2_cost);
    lo_g = std::min(lo_g, h.log2_gamma);
    hi_g = std::max(hi_g, h.log2_gamma);
  }
  EXPECT_NEAR(mc / 10000, 0.0, 0.5);
  EXPECT_NEAR(mg / 10000, 0.0, 0.5);
  EXPECT_NEAR(lo_c, -15.0, 0.5);
  EXPECT_NEAR(hi_c, 15.0, 0.5);
  EXPECT_NEAR(lo_g, -15.0, 0.5);
  EXPECT_NEAR(hi_g, 15.0, 0.5);
}

TEST(RandomSearch, BudgetOne) {
  const auto t = testkit::blobs("b", 10, 2, 2, 1.0, 2.0, 1);
  const auto r = random_search(t, HPSpace{}, 1, 3, 5);
  ASSERT_EQ(r.evaluations.size(), 1u);
  EXPECT_EQ(r.best_index, 0u);
  Rng rng(5);
  EXPECT_TRUE(r.best().hp.same_point(sample_uniform(HPSpace{}, rng)));
  EXPECT_EQ(r.best().hp.provenance, Provenance::random_search);
}

TEST(RandomSearch, BestDominatesEveryEvaluation) {
  const auto t = testkit::blobs("b", 12, 3, 2, 1.0, 1.0, 2);
  const auto r = random_search(t, HPSpace{}, 20, 3, 8);
  for (const auto& e : r.evaluations) EXPECT_GE(r.best().mean_bac, e.mean_bac);
  for (std::size_t i = 0; i < r.best_index; ++i) EXPECT_LT(r.evaluations[i].mean_bac, r.best().mean_bac);
}

TEST(RandomSearch, IdenticalClassesStayNearChance) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto t = testkit::identical_classes("same", 100, 100 + seed);
    EXPECT_LT(random_search(t, HPSpace{}, 10, 5, seed).best().mean_bac, 0.65) << "seed " << seed;
  }
}

TEST(RandomSearch, SeparableBlobs) {
  const auto t = testkit::blobs("sep", 20, 2, 2, 0.3, 4.0, 6);
  EXPECT_GE(random_search(t, HPSpace{}, 50, 5, 3).best().mean_bac, 0.95);
}

TEST(RandomSearch, SharedFoldsAcrossCandidates) {
  const auto t = testkit::blobs("b", 12, 2, 2, 1.0, 1.0, 2);
  const auto r = random_search(t, HPSpace{}, 4, 3, 1, 77);
  for (const auto& e : r.evaluations) {
    const auto again = cross_validate(t, e.hp, 3, 77);
    EXPECT_EQ(again.per_fold_bac, e.per_fold_bac);
  }
}

}  // namespace
}  // namespace dminer
