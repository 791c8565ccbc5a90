#pragma once

// Uniform grids on [0,1] and exact integration of piecewise-linear
// interpolants, shared by the geometric and finite-horizon solvers.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace altseq {

class UniformGrid {
 public:
  explicit UniformGrid(std::size_t size) : size_(size) {
    if (size < 3) {
      throw std::invalid_argument("grid size must be >= 3, got " + std::to_string(size));
    }
    step_ = 1.0 / static_cast<double>(size - 1);
  }

  std::size_t size() const { return size_; }
  double step() const { return step_; }
  std::size_t last() const { return size_ - 1; }

  double node(std::size_t j) const {
    return j == last() ? 1.0 : static_cast<double>(j) * step_;
  }

  std::vector<double> nodes() const {
    std::vector<double> out(size_);
    for (std::size_t j = 0; j < size_; ++j) out[j] = node(j);
    return out;
  }

  // Cell index j with node(j) <= y <= node(j+1), and the local coordinate.
  std::pair<std::size_t, double> locate(double y) const {
    y = std::clamp(y, 0.0, 1.0);
    const double scaled = y / step_;
    auto j = static_cast<std::size_t>(scaled);
    if (j >= last()) return {last() - 1, 1.0};
    return {j, scaled - static_cast<double>(j)};
  }

  double interpolate(std::span<const double> values, double y) const {
    const auto [j, t] = locate(y);
    return values[j] + t * (values[j + 1] - values[j]);
  }

  // Node values read in reverse order, i.e. x -> f(1 - x).
  static std::vector<double> reflected(std::span<const double> values) {
    return {values.rbegin(), values.rend()};
  }

 private:
  std::size_t size_;
  double step_;
};

enum class Monotonicity { none, nondecreasing, nonincreasing };

/// Monotonicity up to rounding: steps against the trend smaller than
/// `slack * (1 + |g|)` are ignored.
inline Monotonicity detect_monotonicity(std::span<const double> g, double slack = 1e-12) {
  bool up = true, down = true;
  for (std::size_t j = 1; j < g.size(); ++j) {
    const double eps = slack * (1.0 + std::abs(g[j]));
    if (g[j] < g[j - 1] - eps) up = false;
    if (g[j] > g[j - 1] + eps) down = false;
  }
  if (up) return Monotonicity::nondecreasing;
  if (down) return Monotonicity::nonincreasing;
  return Monotonicity::none;
}

/// Integral of max{c, g} over one cell of width h where g is linear from a to b.
inline double cell_integral_of_max(double c, double a, double b, double h) {
  if (a >= c && b >= c) return 0.5 * h * (a + b);
  if (a <= c && b <= c) return h * c;
  const double t = (c - a) / (b - a);
  if (a < c) return t * h * c + (1.0 - t) * h * 0.5 * (c + b);
  return t * h * 0.5 * (a + c) + (1.0 - t) * h * c;
}

/// A continuous piecewise-linear function given by its values on a uniform
/// grid, with cumulative integrals cached so integrals over node-aligned
/// ranges cost O(1).
class LinearProfile {
 public:
  LinearProfile(const UniformGrid& grid, std::vector<double> values)
      : grid_(grid), values_(std::move(values)), cumulative_(values_.size(), 0.0) {
    if (values_.size() != grid_.size()) {
      throw std::invalid_argument("profile size does not match grid size");
    }
    const double h = grid_.step();
    for (std::size_t j = 1; j < values_.size(); ++j) {
      cumulative_[j] = cumulative_[j - 1] + 0.5 * h * (values_[j - 1] + values_[j]);
    }
    shape_ = detect_monotonicity(values_);
  }

  const UniformGrid& grid() const { return grid_; }
  std::span<const double> values() const { return values_; }
  Monotonicity shape() const { return shape_; }

  double operator()(double x) const { return grid_.interpolate(values_, x); }

  double integral(std::size_t lo, std::size_t hi) const { return cumulative_[hi] - cumulative_[lo]; }

  // Integral over [a, b] for arbitrary 0 <= a <= b <= 1.
  double integral(double a, double b) const {
    if (b <= a) return 0.0;
    const auto [ja, ta] = grid_.locate(a);
    const auto [jb, tb] = grid_.locate(b);
    const double h = grid_.step();
    const double ga = (*this)(a), gb = (*this)(b);
    if (ja == jb) return 0.5 * (b - a) * (ga + gb);
    // a up to node ja+1, whole cells, node jb up to b.
    const double head = 0.5 * (1.0 - ta) * h * (ga + values_[ja + 1]);
    const double body = integral(ja + 1, jb);
    const double tail = 0.5 * tb * h * (values_[jb] + gb);
    return head + body + tail;
  }

  /// Exact integral of max{c, g(x)} over [node(lo), node(hi)].
  double integral_of_max(double c, std::size_t lo, std::size_t hi) const {
    if (hi <= lo) return 0.0;
    switch (shape_) {
      case Monotonicity::nondecreasing: return integral_of_max_rising(c, lo, hi);
      case Monotonicity::nonincreasing: return integral_of_max_falling(c, lo, hi);
      case Monotonicity::none: break;
    }
    return integral_of_max_by_cells(c, lo, hi);
  }

  double integral_of_max_by_cells(double c, std::size_t lo, std::size_t hi) const {
    const double h = grid_.step();
    double sum = 0.0;
    for (std::size_t j = lo; j < hi; ++j) sum += cell_integral_of_max(c, values_[j], values_[j + 1], h);
    return sum;
  }

  /// inf{x in [from, 1] : g(x) >= c}, or nullopt when the set is empty.
  std::optional<double> first_at_least(double c, double from) const {
    return first_at_least_in(grid_, [this](std::size_t k) { return values_[k]; }, shape_, c, from);
  }

  /// Same search over node values supplied by `g(k)`, for callers that do
  /// not keep a profile.
  template <class NodeFn>
  static std::optional<double> first_at_least_in(const UniformGrid& grid, NodeFn&& g, Monotonicity shape,
                                                 double c, double from) {
    from = std::clamp(from, 0.0, 1.0);
    const auto [cell, t] = grid.locate(from);
    const double g_from = g(cell) + t * (g(cell + 1) - g(cell));
    if (g_from >= c) return from;
    // First node strictly to the right of `from`.
    std::size_t k = cell + 1;
    const std::size_t last = grid.last();
    if (shape == Monotonicity::nondecreasing) {
      std::size_t lo = k, hi = last + 1;
      while (lo < hi) {
        const std::size_t mid = lo + (hi - lo) / 2;
        if (g(mid) < c) lo = mid + 1; else hi = mid;
      }
      k = lo;
    } else {
      while (k <= last && g(k) < c) ++k;
    }
    if (k > last) return std::nullopt;
    const double x_prev = std::max(grid.node(k - 1), from);
    const double g_prev = x_prev == from ? g_from : g(k - 1);
    const double x_k = grid.node(k);
    return x_prev + (c - g_prev) / (g(k) - g_prev) * (x_k - x_prev);
  }

 private:
  double integral_of_max_rising(double c, std::size_t lo, std::size_t hi) const {
    const auto begin = values_.begin() + static_cast<std::ptrdiff_t>(lo);
    const auto end = values_.begin() + static_cast<std::ptrdiff_t>(hi) + 1;
    const auto k = static_cast<std::size_t>(
        std::partition_point(begin, end, [c](double v) { return v < c; }) - values_.begin());
    if (k == lo) return integral(lo, hi);
    const double h = grid_.step();
    if (k > hi) return c * (grid_.node(hi) - grid_.node(lo));
    const double a = values_[k - 1], b = values_[k];
    const double t = (c - a) / (b - a);
    const double crossing = grid_.node(k - 1) + t * h;
    return c * (crossing - grid_.node(lo)) + 0.5 * (1.0 - t) * h * (c + b) + integral(k, hi);
  }

  double integral_of_max_falling(double c, std::size_t lo, std::size_t hi) const {
    const auto begin = values_.begin() + static_cast<std::ptrdiff_t>(lo);
    const auto end = values_.begin() + static_cast<std::ptrdiff_t>(hi) + 1;
    const auto k = static_cast<std::size_t>(
        std::partition_point(begin, end, [c](double v) { return v >= c; }) - values_.begin());
    if (k > hi) return integral(lo, hi);
    const double h = grid_.step();
    if (k == lo) return c * (grid_.node(hi) - grid_.node(lo));
    const double a = values_[k - 1], b = values_[k];
    const double t = (a - c) / (a - b);
    const double crossing = grid_.node(k - 1) + t * h;
    return integral(lo, k - 1) + 0.5 * t * h * (a + c) + c * (grid_.node(hi) - crossing);
  }

  UniformGrid grid_;
  std::vector<double> values_;
  std::vector<double> cumulative_;
  Monotonicity shape_ = Monotonicity::none;
};

}  // namespace altseq
