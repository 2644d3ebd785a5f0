#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "dminer/evaluation.hpp"
#include "dminer/random.hpp"

namespace dminer {

/// Uniform draw in the log2 box.
HPSetting sample_uniform(const HPSpace& space, Rng& rng);

struct RsResult {
  std::string dataset;
  std::size_t best_index = 0;  // into evaluations; ties keep the earliest draw
  std::vector<CvResult> evaluations;
  std::size_t budget = 0;
  std::uint64_t seed = 0;     // draw seed
  std::uint64_t cv_seed = 0;  // fold seed shared by every candidate

  const CvResult& best() const { return evaluations.at(best_index); }
};

/// Per-dataset random search. Draws come from `seed`; every candidate is
/// cross-validated on the folds of `cv_seed`.
RsResult random_search(const DataTable& table, const HPSpace& space, std::size_t budget, std::size_t k,
                       std::uint64_t seed, std::uint64_t cv_seed, const CvOptions& options = {});

/// Convenience form: cv_seed = seed.
RsResult random_search(const DataTable& table, const HPSpace& space, std::size_t budget, std::size_t k,
                       std::uint64_t seed, const CvOptions& options = {});

}  // namespace dminer
