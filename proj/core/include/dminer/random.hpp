#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>

namespace dminer {

/// Derives an independent child seed from a parent seed, a tag and an index.
/// Used to build the master-seed hierarchy so that no stream depends on
/// execution order.
std::uint64_t derive_seed(std::uint64_t parent, std::string_view tag, std::uint64_t index = 0);

/// 64-bit FNV-1a over raw bytes.
std::uint64_t fnv1a(std::string_view bytes, std::uint64_t basis = 0xcbf29ce484222325ULL);

/// 16 lowercase hex digits.
std::string to_hex(std::uint64_t value);

/// Seeded generator with platform-independent draws (std distributions are
/// implementation-defined, which would break bitwise reproducibility).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  /// Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
  /// Uniform integer in [0, n).
  std::uint64_t index(std::uint64_t n);
  /// Standard normal (Box-Muller).
  double normal();

  template <typename T>
  void shuffle(std::span<T> values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(index(i));
      std::swap(values[i - 1], values[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace dminer
