#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>

namespace chunklab {

// Thrown when an input violates an operation precondition. Messages are
// stable strings ("no samples", "non-finite input", ...) so callers and the
// CLI can surface them verbatim.
class invalid_input : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline constexpr bool is_power_of_two(std::uint64_t v) {
  return v != 0 && (v & (v - 1)) == 0;
}

// floor(log2(v)) for v >= 1.
inline int log2_exact(std::uint64_t v) {
  int e = 0;
  while (v > 1) {
    v >>= 1;
    ++e;
  }
  return e;
}

// Nearest-integer rounding with exact .5 ties rounding toward +inf.
inline double round_half_up(double x) { return std::floor(x + 0.5); }

inline bool all_finite(std::span<const double> xs) {
  for (double x : xs) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

inline std::size_t ceil_div(std::size_t num, std::size_t den) {
  return (num + den - 1) / den;
}

}  // namespace chunklab
