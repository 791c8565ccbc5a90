#pragma once

// Fixed sample size problem: backward induction of the flipped recursion
//   v_i(y) = y v_{i+1}(y) + int_y^1 max{v_{i+1}(y), 1 + v_{i+1}(1-x)} dx,
// with v_{n+1} = 0, and the per-stage threshold curves it induces.

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "altseq/grid.hpp"

namespace altseq {

/// Number of observations in a fixed-size sample, n >= 1.
class Horizon {
 public:
  explicit Horizon(std::size_t n) : n_(n) {
    if (n == 0) throw std::domain_error("horizon must be >= 1");
  }
  std::size_t value() const { return n_; }
  operator std::size_t() const { return n_; }

 private:
  std::size_t n_;
};

/// Value rows v_{1,n} .. v_{n+1,n} and threshold rows f*_{1,n} .. f*_{n,n}
/// on a uniform grid. Stages are 1-based.
class FiniteSolution {
 public:
  FiniteSolution(Horizon n, std::size_t grid_size)
      : n_(n), grid_(grid_size),
        values_((n.value() + 1) * grid_size, 0.0),
        thresholds_(n.value() * grid_size, 0.0),
        shapes_(n.value() + 1, Monotonicity::nonincreasing) {}

  std::size_t horizon() const { return n_; }
  std::size_t grid_size() const { return grid_.size(); }
  const UniformGrid& grid() const { return grid_; }

  std::span<const double> value_row(std::size_t stage) const {
    check_stage(stage, n_ + 1, "value_row");
    return {values_.data() + (stage - 1) * grid_.size(), grid_.size()};
  }
  std::span<const double> threshold_row(std::size_t stage) const {
    check_stage(stage, n_, "threshold_row");
    return {thresholds_.data() + (stage - 1) * grid_.size(), grid_.size()};
  }

  double value(std::size_t stage, double y) const { return grid_.interpolate(value_row(stage), y); }

  // Shape of v_{stage} along the grid; nonincreasing enables binary search.
  Monotonicity row_shape(std::size_t stage) const { return shapes_[stage - 1]; }

 private:
  friend FiniteSolution solve_finite(Horizon n, std::size_t grid_size);

  static void check_stage(std::size_t stage, std::size_t hi, const char* what) {
    if (stage < 1 || stage > hi) {
      throw std::out_of_range(std::string(what) + ": stage " + std::to_string(stage) + " outside [1, " +
                              std::to_string(hi) + "]");
    }
  }

  std::span<double> mutable_value_row(std::size_t stage) {
    return {values_.data() + (stage - 1) * grid_.size(), grid_.size()};
  }
  std::span<double> mutable_threshold_row(std::size_t stage) {
    return {thresholds_.data() + (stage - 1) * grid_.size(), grid_.size()};
  }

  std::size_t n_;
  UniformGrid grid_;
  std::vector<double> values_;
  std::vector<double> thresholds_;
  std::vector<Monotonicity> shapes_;
};

namespace detail {

inline Monotonicity reflected_shape(Monotonicity row) {
  switch (row) {
    case Monotonicity::nonincreasing: return Monotonicity::nondecreasing;
    case Monotonicity::nondecreasing: return Monotonicity::nonincreasing;
    case Monotonicity::none: break;
  }
  return Monotonicity::none;
}

// inf{x in [y, 1] : c <= 1 + next(1 - x)} over the interpolant of `next`.
inline double threshold_from_row(const UniformGrid& grid, std::span<const double> next, Monotonicity shape,
                                 double y) {
  const std::size_t last = grid.last();
  const double c = grid.interpolate(next, y);
  const auto hit = LinearProfile::first_at_least_in(
      grid, [&](std::size_t k) { return 1.0 + next[last - k]; }, reflected_shape(shape), c, y);
  return hit.value_or(1.0);
}

}  // namespace detail

inline FiniteSolution solve_finite(Horizon n, std::size_t grid_size = 2001) {
  FiniteSolution sol(n, grid_size);
  const UniformGrid& grid = sol.grid_;
  const std::size_t last = grid.last();
  const std::vector<double> ys = grid.nodes();

  for (std::size_t stage = n; stage >= 1; --stage) {
    const std::span<const double> next = sol.value_row(stage + 1);
    std::vector<double> accept(grid_size);
    for (std::size_t k = 0; k <= last; ++k) accept[k] = 1.0 + next[last - k];
    const LinearProfile profile(grid, std::move(accept));

    auto row = sol.mutable_value_row(stage);
    auto cut = sol.mutable_threshold_row(stage);
    for (std::size_t j = 0; j <= last; ++j) {
      const double c = next[j];
      row[j] = ys[j] * c + profile.integral_of_max(c, j, last);
      cut[j] = profile.first_at_least(c, ys[j]).value_or(1.0);
    }
    sol.shapes_[stage - 1] = detect_monotonicity(row);
  }
  return sol;
}

/// f*_{i,n}(y): smallest x >= y at which selecting is at least as good as
/// waiting; 1 when no such x exists.
inline double threshold_at(const FiniteSolution& sol, std::size_t stage, double y) {
  if (stage < 1 || stage > sol.horizon()) {
    throw std::out_of_range("threshold_at: stage " + std::to_string(stage) + " outside [1, " +
                            std::to_string(sol.horizon()) + "]");
  }
  if (!(y >= 0.0 && y <= 1.0)) throw std::domain_error("threshold_at: y must lie in [0,1]");
  return detail::threshold_from_row(sol.grid(), sol.value_row(stage + 1), sol.row_shape(stage + 1), y);
}

/// v_{1,n}(0), the optimal expected number of selections from n observations.
inline double optimal_expected(Horizon n, std::size_t grid_size = 2001) {
  return solve_finite(n, grid_size).value_row(1)[0];
}

/// Backward induction on the unreduced (s, r) recursion, used to
/// cross-check the reflection identity v_{i,n}(s,0) = v_{i,n}(1-s,1).
struct FiniteTwoStateSolution {
  std::size_t n = 0;
  std::size_t grid_size = 0;
  std::vector<std::vector<double>> after_min;  // stage i at index i-1, stages 1..n+1
  std::vector<std::vector<double>> after_max;

  double reflection_gap(std::size_t stage) const {
    const auto& a = after_min[stage - 1];
    const auto& b = after_max[stage - 1];
    double gap = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) gap = std::max(gap, std::abs(a[j] - b[a.size() - 1 - j]));
    return gap;
  }
};

inline FiniteTwoStateSolution solve_finite_two_state(Horizon n, std::size_t grid_size = 2001) {
  const UniformGrid grid(grid_size);
  const std::size_t last = grid.last();
  const std::vector<double> ys = grid.nodes();

  FiniteTwoStateSolution out;
  out.n = n;
  out.grid_size = grid_size;
  out.after_min.assign(n + 1, std::vector<double>(grid_size, 0.0));
  out.after_max.assign(n + 1, std::vector<double>(grid_size, 0.0));

  for (std::size_t stage = n; stage >= 1; --stage) {
    const auto& w0 = out.after_min[stage];
    const auto& w1 = out.after_max[stage];
    std::vector<double> g1(grid_size), g0(grid_size);
    for (std::size_t k = 0; k <= last; ++k) {
      g1[k] = 1.0 + w1[k];
      g0[k] = 1.0 + w0[k];
    }
    const LinearProfile to_max(grid, std::move(g1));
    const LinearProfile to_min(grid, std::move(g0));
    auto& v0 = out.after_min[stage - 1];
    auto& v1 = out.after_max[stage - 1];
    for (std::size_t j = 0; j <= last; ++j) {
      const double s = ys[j];
      v0[j] = s * w0[j] + to_max.integral_of_max(w0[j], j, last);
      v1[j] = (1.0 - s) * w1[j] + to_min.integral_of_max(w1[j], 0, j);
    }
  }
  return out;
}

}  // namespace altseq
