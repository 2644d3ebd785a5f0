#include "dminer/random_search.hpp"

#include "dminer/error.hpp"
#include "dminer/parallel.hpp"

namespace dminer {

HPSetting sample_uniform(const HPSpace& space, Rng& rng) {
  HPSetting hp;
  hp.log2_cost = rng.uniform(space.cost.lower, space.cost.upper);
  hp.log2_gamma = rng.uniform(space.gamma.lower, space.gamma.upper);
  hp.provenance = Provenance::random_search;
  return hp;
}

RsResult random_search(const DataTable& table, const HPSpace& space, std::size_t budget, std::size_t k,
                       std::uint64_t seed, std::uint64_t cv_seed, const CvOptions& options) {
  if (budget < 1) throw ConfigError("budget", "must be at least 1");
  space.validate();

  Rng rng(seed);
  std::vector<HPSetting> draws(budget);
  for (auto& hp : draws) hp = sample_uniform(space, rng);

  const CvPlan plan(table, k, cv_seed);
  RsResult out;
  out.dataset = table.name;
  out.budget = budget;
  out.seed = seed;
  out.cv_seed = cv_seed;
  out.evaluations.resize(budget);
  CvOptions inner = options;
  inner.jobs = 1;
  parallel_for(budget, options.jobs, [&](std::size_t i) { out.evaluations[i] = cross_validate(plan, draws[i], inner); });

  for (std::size_t i = 1; i < budget; ++i)
    if (out.evaluations[i].mean_bac > out.evaluations[out.best_index].mean_bac) out.best_index = i;
  return out;
}

RsResult random_search(const DataTable& table, const HPSpace& space, std::size_t budget, std::size_t k,
                       std::uint64_t seed, const CvOptions& options) {
  return random_search(table, space, budget, k, seed, seed, options);
}

}  // namespace dminer
