#include <benchmark/benchmark.h>

#include <vector>

#include "dminer/evaluation.hpp"
#include "dminer/random.hpp"
#include "dminer/stats.hpp"
#include "dminer/svm.hpp"

namespace {

using namespace dminer;

Matrix gaussian(std::size_t n, std::size_t d, std::uint64_t seed) {
  Rng rng(seed);
  Matrix x(n, d);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) x(i, j) = rng.normal();
  return x;
}

DataTable labeled(std::size_t n, std::size_t d) {
  DataTable t;
  t.name = "bench";
  t.features = gaussian(n, d, 1);
  t.class_names = {"a", "b"};
  for (std::size_t i = 0; i < n; ++i) {
    t.labels.push_back(i % 2 == 0 ? 0 : 1);
    t.features(i, 0) += t.labels.back() ? 1.0 : -1.0;
  }
  for (std::size_t j = 0; j < d; ++j) t.feature_names.push_back("f" + std::to_string(j));
  return t;
}

void BM_RbfKernel(benchmark::State& state) {
  const auto d = static_cast<std::size_t>(state.range(0));
  const Matrix x = gaussian(2, d, 3);
  for (auto _ : state) benchmark::DoNotOptimize(rbf_kernel(x.row(0), x.row(1), -2.0));
}
BENCHMARK(BM_RbfKernel)->Arg(8)->Arg(64)->Arg(512);

void BM_BinarySmo(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const DataTable t = labeled(n, 10);
  std::vector<int> signs;
  for (int l : t.labels) signs.push_back(l ? 1 : -1);
  const HPSetting hp{0.0, -3.0, Provenance::tool_default, "bench"};
  for (auto _ : state) benchmark::DoNotOptimize(train_binary_smo(t.features, signs, hp).bias);
  state.SetComplexityN(static_cast<benchmark::IterationCount>(n));
}
BENCHMARK(BM_BinarySmo)->RangeMultiplier(2)->Range(64, 1024)->Complexity()->Unit(benchmark::kMillisecond);

void BM_CrossValidate(benchmark::State& state) {
  const DataTable t = labeled(static_cast<std::size_t>(state.range(0)), 10);
  const HPSetting hp{1.0, -3.0, Provenance::tool_default, "bench"};
  for (auto _ : state) benchmark::DoNotOptimize(cross_validate(t, hp, 10, 7).mean_bac);
}
BENCHMARK(BM_CrossValidate)->Arg(200)->Arg(500)->Unit(benchmark::kMillisecond);

void BM_WilcoxonExact(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(9);
  std::vector<double> a(n), b(n);
  for (std::size_t i = 0; i < n; ++i) {
    a[i] = rng.uniform(0.0, 1.0);
    b[i] = rng.uniform(0.0, 1.0);
  }
  for (auto _ : state) benchmark::DoNotOptimize(wilcoxon_signed_rank(a, b).p_value);
}
BENCHMARK(BM_WilcoxonExact)->Arg(10)->Arg(25)->Arg(50);

}  // namespace
BENCHMARK_MAIN();
