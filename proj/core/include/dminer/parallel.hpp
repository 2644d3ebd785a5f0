#pragma once

#include <cstddef>
#include <functional>

namespace dminer {

/// Runs fn(i) for i in [0, count) on up to `jobs` threads (0 = hardware
/// concurrency). Results must be written to per-index slots; the first
/// exception by index order is rethrown after all workers finish.
void parallel_for(std::size_t count, unsigned jobs, const std::function<void(std::size_t)>& fn);

}  // namespace dminer
