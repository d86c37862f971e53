#pragma once

#include <cstdint>

namespace anisograph {

/// Counter-based 64-bit generator. Output k of stream `seed` is
///
///   z = seed + (k + 1) * 0x9E3779B97F4A7C15   (mod 2^64)
///   z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
///   z = (z ^ (z >> 27)) * 0x94D049BB133111EB
///   z =  z ^ (z >> 31)
///
/// i.e. the SplitMix64 finalizer applied to a Weyl sequence. Uniform
/// doubles take the top 53 bits: (z >> 11) * 2^-53, in [0, 1). Every draw
/// is addressable by (seed, k), so results do not depend on evaluation
/// order and are reproducible in any language with 64-bit wrapping ints.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t counter = 0) noexcept
      : seed_(seed), counter_(counter) {}

  static std::uint64_t at(std::uint64_t seed, std::uint64_t counter) noexcept;
  static double uniform_at(std::uint64_t seed, std::uint64_t counter) noexcept;

  /// Derives an independent seed for a named sub-stream.
  static std::uint64_t derive(std::uint64_t seed, std::uint64_t stream) noexcept;

  std::uint64_t next() noexcept { return at(seed_, counter_++); }
  double uniform() noexcept { return uniform_at(seed_, counter_++); }
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n) noexcept;
  /// Standard normal via Box-Muller (consumes two draws).
  double normal() noexcept;

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t seed_;
  std::uint64_t counter_;
};

}  // namespace anisograph
