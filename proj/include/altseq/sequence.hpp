#pragma once

#include <algorithm>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace altseq {

/// An ordered list of observations, each in [0,1].
class Sample {
 public:
  Sample() = default;
  explicit Sample(std::vector<double> values) : values_(std::move(values)) { validate(); }
  Sample(std::initializer_list<double> values) : values_(values) { validate(); }

  std::span<const double> values() const { return values_; }
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }
  double operator[](std::size_t i) const { return values_[i]; }

  operator std::span<const double>() const { return values_; }

 private:
  void validate() const {
    for (std::size_t i = 0; i < values_.size(); ++i) {
      const double v = values_[i];
      if (!(v >= 0.0 && v <= 1.0)) {
        throw std::domain_error("sample value at index " + std::to_string(i) +
                                " lies outside [0,1]");
      }
    }
  }

  std::vector<double> values_;
};

enum class Parity { min, max };

/// y == last_value after a minimum, 1 - last_value after a maximum.
struct FlippedState {
  double y = 0.0;
};

/// Last selected value and whether it was a local minimum or maximum.
/// Starts as if a maximum at 1 had been selected, which makes every first
/// observation feasible (as a minimum).
struct AlternationState {
  double last_value = 1.0;
  Parity parity = Parity::max;

  FlippedState flipped() const {
    return {parity == Parity::min ? last_value : 1.0 - last_value};
  }

  // Maps a raw observation into the frame where acceptance reads x >= y.
  double flipped_observation(double raw) const {
    return parity == Parity::min ? raw : 1.0 - raw;
  }

  // Strict feasibility for extending the alternation.
  bool admits(double raw) const {
    return parity == Parity::min ? raw > last_value : raw < last_value;
  }

  AlternationState after_selecting(double raw) const {
    return {raw, parity == Parity::min ? Parity::max : Parity::min};
  }
};

/// Length of the longest subsequence x_{i1} < x_{i2} > x_{i3} < ... of `x`.
///
/// Single pass: `valley` is the best length ending on an element that must
/// be followed by an ascent (odd length), `peak` the best ending on an
/// element that must be followed by a descent (even length). Ties extend
/// nothing.
inline std::size_t longest_alternating(std::span<const double> x) {
  if (x.empty()) return 0;
  std::size_t valley = 1;
  std::size_t peak = 0;
  for (std::size_t j = 1; j < x.size(); ++j) {
    if (x[j] > x[j - 1]) {
      peak = std::max(peak, valley + 1);
    } else if (x[j] < x[j - 1] && peak > 0) {
      valley = std::max(valley, peak + 1);
    }
  }
  return std::max(valley, peak);
}

inline constexpr std::size_t kOracleMaxLength = 20;

/// Quadratic dynamic program over (index, parity); test oracle for
/// longest_alternating.
inline std::size_t longest_alternating_oracle(std::span<const double> x) {
  if (x.size() > kOracleMaxLength) {
    throw std::length_error("longest_alternating_oracle: length " + std::to_string(x.size()) +
                            " exceeds " + std::to_string(kOracleMaxLength));
  }
  const std::size_t n = x.size();
  // ends_low[j]: best odd-length alternation ending at j; ends_high[j]: even.
  std::vector<std::size_t> ends_low(n, 1), ends_high(n, 0);
  std::size_t best = 0;
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < j; ++i) {
      if (x[i] < x[j]) ends_high[j] = std::max(ends_high[j], ends_low[i] + 1);
      if (x[i] > x[j] && ends_high[i] > 0) ends_low[j] = std::max(ends_low[j], ends_high[i] + 1);
    }
    best = std::max({best, ends_low[j], ends_high[j]});
  }
  return best;
}

struct Moments {
  double mean = 0.0;
  double variance = 0.0;
};

/// Mean and variance of the longest alternating subsequence of a uniform
/// random permutation of size n. The formulas hold for n >= 4 only.
inline Moments permutation_moments(long long n) {
  if (n < 4) {
    throw std::domain_error("permutation_moments: formulas hold for n >= 4, got n = " +
                            std::to_string(n));
  }
  const double m = static_cast<double>(n);
  return {2.0 * m / 3.0 + 1.0 / 6.0, 8.0 * m / 45.0 - 13.0 / 180.0};
}

}  // namespace altseq
