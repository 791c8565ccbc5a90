#pragma once

// Discounted (geometric sample size) selection problem: value iteration on a
// uniform grid, threshold extraction, and the closed-form optimum.

#include <array>
#include <cmath>
#include <cstdio>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "altseq/grid.hpp"

namespace altseq {

class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Discount factor, equivalently the parameter of the sample size law
/// P(N = k) = rho^(k-1) (1 - rho).
class DiscountFactor {
 public:
  explicit DiscountFactor(double rho) : rho_(rho) {
    if (!(rho > 0.0 && rho < 1.0)) {
      throw std::domain_error("discount factor must satisfy 0 < rho < 1, got " + std::to_string(rho));
    }
  }
  double value() const { return rho_; }
  operator double() const { return rho_; }

 private:
  double rho_;
};

inline constexpr std::size_t kDefaultGridSize = 2001;
inline constexpr double kDefaultTolerance = 1e-10;

/// ceil(log(tol / v_max) / log(rho)) + 50 with v_max = 1 / (1 - rho).
inline std::size_t iteration_cap(DiscountFactor rho, double tol) {
  const double v_max = 1.0 / (1.0 - rho.value());
  const double needed = std::ceil(std::log(tol / v_max) / std::log(rho.value()));
  return static_cast<std::size_t>(std::max(needed, 0.0)) + 50;
}

struct ValueFunctionGrid {
  double rho = 0.0;
  std::size_t grid_size = 0;
  std::vector<double> ys;
  std::vector<double> values;
  double xi_estimate = 0.0;
  double residual = 0.0;
  std::size_t iterations = 0;
  // Sup-norm of every fixed-point update, in order.
  std::vector<double> update_history;

  double at(double y) const { return UniformGrid(grid_size).interpolate(values, y); }
};

struct TwoStateSolution {
  double rho = 0.0;
  std::size_t grid_size = 0;
  std::vector<double> ys;
  std::vector<double> after_min;  // v(s, 0): next selection must be a maximum
  std::vector<double> after_max;  // v(s, 1): next selection must be a minimum
  double residual = 0.0;
  std::size_t iterations = 0;

  /// max over grid of |v(s,0) - v(1-s,1)|.
  double reflection_gap() const {
    double gap = 0.0;
    const std::size_t m = after_min.size();
    for (std::size_t j = 0; j < m; ++j) gap = std::max(gap, std::abs(after_min[j] - after_max[m - 1 - j]));
    return gap;
  }
};

namespace detail {

inline void check_solver_args(std::size_t grid_size, double tol) {
  if (grid_size < 3) throw std::invalid_argument("grid size must be >= 3, got " + std::to_string(grid_size));
  if (!(tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
}

inline double sup_distance(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) d = std::max(d, std::abs(a[j] - b[j]));
  return d;
}

inline std::vector<double> one_plus_scaled(std::vector<double> v, double scale) {
  for (double& x : v) x = 1.0 + scale * x;
  return v;
}

[[noreturn]] inline void fail_to_converge(const char* what, std::size_t cap, double last) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%s: sup-norm update still %.3g after %zu iterations", what, last, cap);
  throw ConvergenceError(buf);
}

}  // namespace detail

/// Smallest root of 1 + rho v(1-y) - rho v(y) on [0, 1/2], 0 when that
/// quantity is already nonnegative at y = 0.
inline double extract_threshold(const ValueFunctionGrid& v, DiscountFactor rho) {
  const UniformGrid grid(v.grid_size);
  const std::size_t last = grid.last();
  auto gap = [&](std::size_t j) { return 1.0 + rho * v.values[last - j] - rho * v.values[j]; };
  if (gap(0) >= 0.0) return 0.0;
  for (std::size_t j = 1; j <= last && grid.node(j) <= 0.5; ++j) {
    const double now = gap(j);
    if (now >= 0.0) {
      const double before = gap(j - 1);
      return grid.node(j - 1) + before / (before - now) * grid.step();
    }
  }
  return 0.5;
}

/// Value iteration for v(y) = rho y v(y) + int_y^1 max{rho v(y), 1 + rho v(1-x)} dx.
inline ValueFunctionGrid solve_flipped(DiscountFactor rho, std::size_t grid_size = kDefaultGridSize,
                                       double tol = kDefaultTolerance, std::size_t max_iterations = 0) {
  detail::check_solver_args(grid_size, tol);
  const UniformGrid grid(grid_size);
  const std::size_t last = grid.last();
  const std::size_t cap = max_iterations ? max_iterations : iteration_cap(rho, tol);

  ValueFunctionGrid out;
  out.rho = rho;
  out.grid_size = grid_size;
  out.ys = grid.nodes();

  std::vector<double> v(grid_size, 0.0), next(grid_size, 0.0);
  double update = 0.0;
  for (std::size_t it = 1; it <= cap; ++it) {
    const LinearProfile accept(grid, detail::one_plus_scaled(UniformGrid::reflected(v), rho));
    for (std::size_t j = 0; j <= last; ++j) {
      next[j] = rho * out.ys[j] * v[j] + accept.integral_of_max(rho * v[j], j, last);
    }
    update = detail::sup_distance(next, v);
    out.update_history.push_back(update);
    std::swap(v, next);
    if (update < tol) {
      out.values = std::move(v);
      out.residual = update;
      out.iterations = it;
      out.xi_estimate = extract_threshold(out, rho);
      return out;
    }
  }
  detail::fail_to_converge("solve_flipped", cap, update);
}

/// Value iteration on the original two-line equation in (s, r).
inline TwoStateSolution solve_two_state(DiscountFactor rho, std::size_t grid_size = kDefaultGridSize,
                                        double tol = kDefaultTolerance, std::size_t max_iterations = 0) {
  detail::check_solver_args(grid_size, tol);
  const UniformGrid grid(grid_size);
  const std::size_t last = grid.last();
  const std::size_t cap = max_iterations ? max_iterations : iteration_cap(rho, tol);

  TwoStateSolution out;
  out.rho = rho;
  out.grid_size = grid_size;
  out.ys = grid.nodes();

  std::vector<double> v0(grid_size, 0.0), v1(grid_size, 0.0);
  std::vector<double> n0(grid_size), n1(grid_size);
  double update = 0.0;
  for (std::size_t it = 1; it <= cap; ++it) {
    const LinearProfile to_max(grid, detail::one_plus_scaled(v1, rho));
    const LinearProfile to_min(grid, detail::one_plus_scaled(v0, rho));
    for (std::size_t j = 0; j <= last; ++j) {
      const double s = out.ys[j];
      n0[j] = rho * s * v0[j] + to_max.integral_of_max(rho * v0[j], j, last);
      n1[j] = rho * (1.0 - s) * v1[j] + to_min.integral_of_max(rho * v1[j], 0, j);
    }
    update = std::max(detail::sup_distance(n0, v0), detail::sup_distance(n1, v1));
    std::swap(v0, n0);
    std::swap(v1, n1);
    if (update < tol) {
      out.after_min = std::move(v0);
      out.after_max = std::move(v1);
      out.residual = update;
      out.iterations = it;
      return out;
    }
  }
  detail::fail_to_converge("solve_two_state", cap, update);
}

/// Value of the stationary policy "select iff x >= max{xi, y}", by iterating
/// V(y) = (xi v y) rho V(y) + int_{xi v y}^1 {1 + rho V(1-x)} dx.
inline ValueFunctionGrid evaluate_threshold_policy(DiscountFactor rho, double xi,
                                                   std::size_t grid_size = kDefaultGridSize,
                                                   double tol = kDefaultTolerance,
                                                   std::size_t max_iterations = 0) {
  detail::check_solver_args(grid_size, tol);
  if (!(xi >= 0.0 && xi <= 0.5)) throw std::domain_error("threshold xi must lie in [0, 1/2]");
  const UniformGrid grid(grid_size);
  const std::size_t cap = max_iterations ? max_iterations : iteration_cap(rho, tol);

  ValueFunctionGrid out;
  out.rho = rho;
  out.grid_size = grid_size;
  out.ys = grid.nodes();
  out.xi_estimate = xi;

  std::vector<double> v(grid_size, 0.0), next(grid_size);
  double update = 0.0;
  for (std::size_t it = 1; it <= cap; ++it) {
    const LinearProfile accept(grid, detail::one_plus_scaled(UniformGrid::reflected(v), rho));
    for (std::size_t j = 0; j < grid_size; ++j) {
      const double cut = std::max(xi, out.ys[j]);
      next[j] = cut * rho * v[j] + accept.integral(cut, 1.0);
    }
    update = detail::sup_distance(next, v);
    out.update_history.push_back(update);
    std::swap(v, next);
    if (update < tol) {
      out.values = std::move(v);
      out.residual = update;
      out.iterations = it;
      return out;
    }
  }
  detail::fail_to_converge("evaluate_threshold_policy", cap, update);
}

// --- closed forms ---------------------------------------------------------

/// 1/sqrt(2) + (1 - sqrt(2)) / rho, before clamping.
inline double xi0_formula(DiscountFactor rho) {
  return 1.0 / std::sqrt(2.0) + (1.0 - std::sqrt(2.0)) / rho;
}

/// Optimal critical value; clamped at 0 where the formula goes negative
/// (rho <= 2 - sqrt(2)).
inline double xi0_closed(DiscountFactor rho) { return std::max(0.0, xi0_formula(rho)); }

/// (3 - 2 sqrt 2 - rho + rho sqrt 2) / (rho (1 - rho)), valid while xi0 > 0.
inline double value_formula(DiscountFactor rho) {
  const double r = rho, s2 = std::sqrt(2.0);
  return (3.0 - 2.0 * s2 - r + r * s2) / (r * (1.0 - r));
}

/// V(xi) for the threshold policy max{xi, y}:
/// (2 - 2 xi - rho + 2 rho xi - 2 rho xi^2) / (2 (1 - rho)(1 - rho xi)).
inline double threshold_value_closed(DiscountFactor rho, double xi) {
  const double r = rho;
  return (2.0 - 2.0 * xi - r + 2.0 * r * xi - 2.0 * r * xi * xi) / (2.0 * (1.0 - r) * (1.0 - r * xi));
}

/// (2 - rho) / (2 (1 - rho)): the threshold value at xi = 0 (greedy).
inline double value_at_zero_threshold(DiscountFactor rho) { return threshold_value_closed(rho, 0.0); }

/// Optimal expected selections for a geometric sample.
inline double value_closed(DiscountFactor rho) {
  return xi0_closed(rho) > 0.0 ? value_formula(rho) : value_at_zero_threshold(rho);
}

struct ClosedFormGeometric {
  double rho = 0.0;
  double xi0 = 0.0;       // clamped
  double value = 0.0;     // value_closed
  double xi0_raw = 0.0;   // unclamped formula
  double value_formula = 0.0;
  double value_xi_zero = 0.0;
  bool clamped = false;
};

inline ClosedFormGeometric closed_form(DiscountFactor rho) {
  return {rho.value(),        xi0_closed(rho),          value_closed(rho), xi0_formula(rho),
          value_formula(rho), value_at_zero_threshold(rho), xi0_formula(rho) <= 0.0};
}

/// V'(y) = (2 (1 - rho y)^2 - (2 - rho)^2) / (2 (1 - rho + rho y)(1 - rho y)^2) on (xi, 1 - xi).
inline double derivative_closed(DiscountFactor rho, double y) {
  const double r = rho;
  const double b = 1.0 - r * y;
  return (2.0 * b * b - (2.0 - r) * (2.0 - r)) / (2.0 * (1.0 - r + r * y) * b * b);
}

struct FourConditionDiagnostics {
  double v_at_xi = 0.0;
  double v_at_one_minus_xi = 0.0;
  double dv_at_xi = 0.0;
  double dv_at_one_minus_xi = 0.0;
  std::array<double, 4> residuals{};
  std::vector<std::pair<double, double>> derivative_curve;  // (y, V'(y)) on (xi, 1 - xi)
};

/// Explicit V(xi), V(1-xi), V'(xi), V'(1-xi) and the residuals of the four
/// boundary conditions they jointly solve. Uses
/// V(1-xi) = xi (2 - 4 rho xi - rho^2 + 4 rho^2 xi - 2 rho^2 xi^2) / (2 (1-rho)(1-rho xi)(1-rho+rho xi)),
/// the unique solution of the system (it vanishes at xi = 0, as V(1) must).
inline FourConditionDiagnostics closed_form_diagnostics(DiscountFactor rho, double xi,
                                                        std::size_t curve_points = 101) {
  if (!(xi >= 0.0 && xi <= 0.5)) throw std::domain_error("xi must lie in [0, 1/2]");
  const double r = rho;
  const double a = 1.0 - r + r * xi;  // 1 - rho + rho xi
  const double b = 1.0 - r * xi;      // 1 - rho xi

  FourConditionDiagnostics d;
  d.v_at_xi = threshold_value_closed(rho, xi);
  d.v_at_one_minus_xi =
      xi * (2.0 - 4.0 * r * xi - r * r + 4.0 * r * r * xi - 2.0 * r * r * xi * xi) / (2.0 * (1.0 - r) * b * a);
  d.dv_at_xi = (-2.0 + 4.0 * r - 4.0 * r * xi - r * r + 2.0 * r * r * xi * xi) / (2.0 * b * b * a);
  d.dv_at_one_minus_xi = (-2.0 + 4.0 * r * xi + r * r - 4.0 * r * r * xi + 2.0 * r * r * xi * xi) / (2.0 * b * a * a);

  const double V = d.v_at_xi, W = d.v_at_one_minus_xi, dV = d.dv_at_xi, dW = d.dv_at_one_minus_xi;
  d.residuals[0] = W * a - (xi + r * xi * V);
  d.residuals[1] = dV * b - (r * (V - W) - 1.0);
  d.residuals[2] = dW * a - (r * (W - V) - 1.0);
  d.residuals[3] = dW * a * a * b - (dV * b * b * a + a * a - b * b);

  if (curve_points >= 2 && xi < 0.5) {
    const double lo = xi, hi = 1.0 - xi;
    d.derivative_curve.reserve(curve_points);
    for (std::size_t k = 0; k < curve_points; ++k) {
      // interior points only: the open interval excludes both ends
      const double y = lo + (hi - lo) * (static_cast<double>(k) + 0.5) / static_cast<double>(curve_points);
      d.derivative_curve.emplace_back(y, derivative_closed(rho, y));
    }
  }
  return d;
}

}  // namespace altseq
