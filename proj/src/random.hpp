// Portable random helpers: the standard distributions are implementation
// defined, so generated masks and phantoms draw directly from the engine.
#pragma once

#include <cmath>
#include <numbers>
#include <random>

namespace lps::detail {

/// Uniform in the open interval (0, 1).
inline double open_unit(std::mt19937_64& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * open_unit(rng);
}

/// Standard normal via Box-Muller (one draw per call).
inline double standard_normal(std::mt19937_64& rng) {
  const double u1 = open_unit(rng);
  const double u2 = open_unit(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace lps::detail
