#pragma once

// Selection policies in flipped coordinates: with state y, an observation x
// (already mapped into the flipped frame) is selected iff x >= threshold,
// after which the state becomes 1 - x.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>

#include "altseq/finite_dp.hpp"
#include "altseq/geometric_dp.hpp"
#include "altseq/sequence.hpp"

namespace altseq {

enum class PolicyKind { fixed_threshold, geometric_optimal, finite_optimal, concatenated };

inline const char* to_string(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::fixed_threshold: return "fixed_threshold";
    case PolicyKind::geometric_optimal: return "geometric_optimal";
    case PolicyKind::finite_optimal: return "finite_optimal";
    case PolicyKind::concatenated: return "concatenated";
  }
  return "unknown";
}

/// 1 - 1/sqrt(2): maximizer of the stationary rate.
inline const double kBestStationaryThreshold = 1.0 - 1.0 / std::sqrt(2.0);

struct PolicySpec {
  PolicyKind kind = PolicyKind::fixed_threshold;
  std::optional<double> xi;                       // fixed_threshold
  std::optional<double> rho;                      // geometric_optimal
  std::shared_ptr<const FiniteSolution> finite;   // finite_optimal, concatenated

  static PolicySpec fixed(double xi) { return {PolicyKind::fixed_threshold, xi, std::nullopt, nullptr}; }
  static PolicySpec greedy() { return fixed(0.0); }
  static PolicySpec timid() { return fixed(0.5); }
  static PolicySpec geometric(double rho) {
    return {PolicyKind::geometric_optimal, std::nullopt, rho, nullptr};
  }
  static PolicySpec finite_optimal(std::shared_ptr<const FiniteSolution> sol) {
    return {PolicyKind::finite_optimal, std::nullopt, std::nullopt, std::move(sol)};
  }
  static PolicySpec concatenated(std::shared_ptr<const FiniteSolution> sol) {
    return {PolicyKind::concatenated, std::nullopt, std::nullopt, std::move(sol)};
  }
};

enum class Decision { skip, select };

enum class Phase { running, seeking, in_block };

struct PolicyState {
  FlippedState y;
  Phase phase = Phase::running;
  std::size_t step_in_block = 0;  // next block stage while in_block (1-based)
  std::size_t wait = 0;           // observations examined in the current seek
  std::size_t blocks_started = 0;
  std::size_t selections = 0;
};

/// Emitted by the concatenated policy whenever a new block starts.
struct Regeneration {
  double y = 0.0;
  std::size_t wait = 0;  // tau_k; for the very first block, the index T_0
  bool initial = false;
};

struct StepResult {
  Decision decision = Decision::skip;
  PolicyState next;
  std::optional<Regeneration> regeneration;
};

inline constexpr double kSeekLevel = 5.0 / 6.0;
inline constexpr double kRegenerationLevel = 1.0 / 6.0;

class Policy {
 public:
  const PolicySpec& spec() const { return spec_; }

  // Critical value used for every state: xi, or xi0 for the geometric optimum.
  double critical_value() const { return critical_; }

  PolicyState initial_state() const {
    PolicyState s;
    if (spec_.kind == PolicyKind::concatenated) s.phase = Phase::seeking;
    return s;
  }

  double threshold(const PolicyState& state, std::size_t i) const {
    const double y = state.y.y;
    switch (spec_.kind) {
      case PolicyKind::fixed_threshold:
      case PolicyKind::geometric_optimal: return std::max(critical_, y);
      case PolicyKind::finite_optimal:
        if (i < 1 || i > spec_.finite->horizon()) {
          throw std::out_of_range("finite-optimal step index " + std::to_string(i) + " outside [1, " +
                                  std::to_string(spec_.finite->horizon()) + "]");
        }
        return threshold_at(*spec_.finite, i, y);
      case PolicyKind::concatenated:
        if (state.phase == Phase::seeking) return std::max(kSeekLevel, y);
        return threshold_at(*spec_.finite, state.step_in_block, y);
    }
    return 1.0;
  }

  /// Selects iff x >= threshold; the tie goes to selection.
  StepResult step(const PolicyState& state, std::size_t i, double x) const {
    StepResult out;
    out.next = state;
    PolicyState& next = out.next;
    const bool take = x >= threshold(state, i);
    if (take) {
      out.decision = Decision::select;
      next.y.y = 1.0 - x;
      ++next.selections;
    }
    if (spec_.kind != PolicyKind::concatenated) return out;

    if (state.phase == Phase::seeking) {
      ++next.wait;
      if (take) {
        out.regeneration = Regeneration{next.y.y, next.wait, state.blocks_started == 0};
        start_block(next);
      }
      return out;
    }
    if (++next.step_in_block > block_length_) {
      if (next.y.y <= kRegenerationLevel) {
        out.regeneration = Regeneration{next.y.y, 0, false};
        start_block(next);
      } else {
        next.phase = Phase::seeking;
        next.wait = 0;
      }
    }
    return out;
  }

 private:
  friend Policy make_policy(const PolicySpec& spec);
  explicit Policy(PolicySpec spec) : spec_(std::move(spec)) {}

  static void start_block(PolicyState& s) {
    s.phase = Phase::in_block;
    s.step_in_block = 1;
    s.wait = 0;
    ++s.blocks_started;
  }

  PolicySpec spec_;
  double critical_ = 0.0;
  std::size_t block_length_ = 0;
};

inline Policy make_policy(const PolicySpec& spec) {
  const bool has_xi = spec.xi.has_value(), has_rho = spec.rho.has_value(), has_finite = spec.finite != nullptr;
  auto require = [&](bool xi, bool rho, bool finite) {
    if (has_xi != xi || has_rho != rho || has_finite != finite) {
      throw std::invalid_argument(std::string("malformed policy spec for ") + to_string(spec.kind) +
                                  ": expected exactly" + (xi ? " xi" : "") + (rho ? " rho" : "") +
                                  (finite ? " finite solution" : ""));
    }
  };
  Policy p(spec);
  switch (spec.kind) {
    case PolicyKind::fixed_threshold:
      require(true, false, false);
      if (!(*spec.xi >= 0.0 && *spec.xi <= 0.5)) throw std::domain_error("threshold xi must lie in [0, 1/2]");
      p.critical_ = *spec.xi;
      break;
    case PolicyKind::geometric_optimal:
      require(false, true, false);
      p.critical_ = xi0_closed(DiscountFactor(*spec.rho));
      break;
    case PolicyKind::finite_optimal:
      require(false, false, true);
      break;
    case PolicyKind::concatenated:
      require(false, false, true);
      if (spec.finite->horizon() < 3) {
        throw std::invalid_argument("concatenated policy needs a finite solution with n >= 3");
      }
      p.block_length_ = spec.finite->horizon() - 2;
      break;
  }
  return p;
}

/// Long-run selections per observation of the threshold policy max{xi, y}
/// under its stationary law: (1 - 2 xi^2) / (2 (1 - xi)).
inline double stationary_rate(double xi) {
  if (!(xi >= 0.0 && xi <= 0.5)) throw std::domain_error("stationary_rate: xi must lie in [0, 1/2]");
  return (1.0 - 2.0 * xi * xi) / (2.0 * (1.0 - xi));
}

}  // namespace altseq
