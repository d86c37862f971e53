#include "anisograph/rng.hpp"

#include <cmath>
#include <numbers>

namespace anisograph {

std::uint64_t CounterRng::at(std::uint64_t seed, std::uint64_t counter) noexcept {
  std::uint64_t z = seed + (counter + 1) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double CounterRng::uniform_at(std::uint64_t seed, std::uint64_t counter) noexcept {
  return static_cast<double>(at(seed, counter) >> 11) * 0x1.0p-53;
}

std::uint64_t CounterRng::derive(std::uint64_t seed, std::uint64_t stream) noexcept {
  return at(seed ^ 0xD1B54A32D192ED03ULL, stream);
}

std::uint64_t CounterRng::below(std::uint64_t n) noexcept {
  // Rejection sampling keeps the result unbiased.
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
  std::uint64_t r = next();
  while (r >= limit) r = next();
  return r % n;
}

double CounterRng::normal() noexcept {
  double u1 = uniform();
  const double u2 = uniform();
  if (u1 <= 0.0) u1 = 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace anisograph
