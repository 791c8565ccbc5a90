#pragma once

// Seeded, reproducible Monte Carlo evaluation of selection policies.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "altseq/policies.hpp"
#include "altseq/rng.hpp"
#include "altseq/sequence.hpp"

namespace altseq {

struct FixedHorizon {
  std::size_t n = 0;
};
struct GeometricHorizon {
  double rho = 0.0;
};
using HorizonSpec = std::variant<FixedHorizon, GeometricHorizon>;

struct SimulationConfig {
  std::optional<PolicySpec> policy;
  HorizonSpec horizon = FixedHorizon{1};
  std::size_t reps = 100000;
  std::uint64_t seed = 42;
  bool keep_counts = false;
  unsigned threads = 0;  // 0: hardware concurrency
};

struct RegenerationStats {
  std::uint64_t count = 0;  // regenerations after the first block
  double mean_wait = 0.0;   // empirical mean of tau_k
};

struct RunResult {
  std::size_t reps = 0;
  double mean = 0.0;
  double variance = 0.0;  // unbiased
  double std_error = 0.0;
  std::optional<std::vector<std::uint64_t>> per_rep_counts;
  // Sample-size statistics: n exactly for fixed horizons, the draws of N otherwise.
  double horizon_mean = 0.0;
  double horizon_std_error = 0.0;
  std::optional<RegenerationStats> regenerations;
};

/// N = 1 + floor(log U / log rho), U uniform on (0,1).
inline std::uint64_t sample_geometric(double rho, CounterStream& stream) {
  const double u = stream.open_uniform();
  const double k = std::floor(std::log(u) / std::log(rho));
  if (!(k >= 0.0)) return 1;
  if (k > 1e15) return static_cast<std::uint64_t>(1e15);
  return 1 + static_cast<std::uint64_t>(k);
}

/// Plays a policy against raw observations and returns the indices it
/// selects. The raw values are mapped into flipped coordinates through the
/// alternation state, so the selected values alternate in the raw sequence.
inline std::vector<std::size_t> play(const Policy& policy, std::span<const double> raw,
                                     const std::function<void(const Regeneration&)>& on_regeneration = {}) {
  std::vector<std::size_t> picked;
  AlternationState alt;
  PolicyState state = policy.initial_state();
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const StepResult r = policy.step(state, i + 1, alt.flipped_observation(raw[i]));
    if (r.decision == Decision::select) {
      picked.push_back(i);
      alt = alt.after_selecting(raw[i]);
    }
    if (r.regeneration && on_regeneration) on_regeneration(*r.regeneration);
    state = r.next;
  }
  return picked;
}

namespace detail {

struct ReplicateOutcome {
  std::uint64_t selections = 0;
  std::uint64_t length = 0;
  std::uint64_t waits = 0;
  std::uint64_t regenerations = 0;
};

inline ReplicateOutcome play_stream(const Policy& policy, CounterStream& stream, std::uint64_t length) {
  ReplicateOutcome out;
  out.length = length;
  AlternationState alt;
  PolicyState state = policy.initial_state();
  for (std::uint64_t i = 0; i < length; ++i) {
    const double raw = stream.uniform();
    const StepResult r = policy.step(state, static_cast<std::size_t>(i + 1), alt.flipped_observation(raw));
    if (r.decision == Decision::select) alt = alt.after_selecting(raw);
    if (r.regeneration && !r.regeneration->initial) {
      ++out.regenerations;
      out.waits += r.regeneration->wait;
    }
    state = r.next;
  }
  out.selections = state.selections;
  return out;
}

template <class Fn>
std::vector<ReplicateOutcome> for_each_replicate(std::size_t reps, unsigned threads, Fn&& fn) {
  std::vector<ReplicateOutcome> out(reps);
  unsigned workers = threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : threads;
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(reps, 1)));
  if (workers <= 1) {
    for (std::size_t r = 0; r < reps; ++r) out[r] = fn(r);
    return out;
  }
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t r = w; r < reps; r += workers) out[r] = fn(r);
      });
    }
  }
  return out;
}

inline double mean_of(const std::vector<ReplicateOutcome>& v, std::uint64_t ReplicateOutcome::*field) {
  std::uint64_t total = 0;
  for (const auto& o : v) total += o.*field;
  return static_cast<double>(total) / static_cast<double>(v.size());
}

inline double variance_of(const std::vector<ReplicateOutcome>& v, std::uint64_t ReplicateOutcome::*field,
                          double mean) {
  if (v.size() < 2) return 0.0;
  double ss = 0.0;
  for (const auto& o : v) {
    const double d = static_cast<double>(o.*field) - mean;
    ss += d * d;
  }
  return ss / static_cast<double>(v.size() - 1);
}

inline RunResult aggregate(const std::vector<ReplicateOutcome>& outcomes, bool keep_counts) {
  RunResult r;
  r.reps = outcomes.size();
  r.mean = mean_of(outcomes, &ReplicateOutcome::selections);
  r.variance = variance_of(outcomes, &ReplicateOutcome::selections, r.mean);
  r.std_error = std::sqrt(r.variance / static_cast<double>(r.reps));
  r.horizon_mean = mean_of(outcomes, &ReplicateOutcome::length);
  r.horizon_std_error = std::sqrt(variance_of(outcomes, &ReplicateOutcome::length, r.horizon_mean) /
                                  static_cast<double>(r.reps));
  if (keep_counts) {
    std::vector<std::uint64_t> counts;
    counts.reserve(outcomes.size());
    for (const auto& o : outcomes) counts.push_back(o.selections);
    r.per_rep_counts = std::move(counts);
  }
  return r;
}

inline void attach_regenerations(RunResult& r, const std::vector<ReplicateOutcome>& outcomes) {
  RegenerationStats s;
  std::uint64_t waits = 0;
  for (const auto& o : outcomes) {
    s.count += o.regenerations;
    waits += o.waits;
  }
  s.mean_wait = s.count == 0 ? 0.0 : static_cast<double>(waits) / static_cast<double>(s.count);
  r.regenerations = s;
}

inline Policy policy_for(const SimulationConfig& cfg) {
  if (!cfg.policy) throw std::invalid_argument("simulation config has no policy");
  if (cfg.reps < 1) throw std::invalid_argument("reps must be >= 1");
  return make_policy(*cfg.policy);
}

}  // namespace detail

inline RunResult run_fixed_horizon(const SimulationConfig& cfg) {
  const auto* fixed = std::get_if<FixedHorizon>(&cfg.horizon);
  if (fixed == nullptr) throw std::invalid_argument("run_fixed_horizon needs a fixed horizon");
  if (fixed->n < 1) throw std::domain_error("horizon must be >= 1");
  const Policy policy = detail::policy_for(cfg);
  if (cfg.policy->kind == PolicyKind::finite_optimal && cfg.policy->finite->horizon() != fixed->n) {
    throw std::invalid_argument("horizon/policy mismatch: finite-optimal policy solved for n = " +
                                std::to_string(cfg.policy->finite->horizon()) + " but horizon is " +
                                std::to_string(fixed->n));
  }
  const auto outcomes = detail::for_each_replicate(cfg.reps, cfg.threads, [&](std::size_t rep) {
    CounterStream stream(cfg.seed, rep);
    return detail::play_stream(policy, stream, fixed->n);
  });
  RunResult r = detail::aggregate(outcomes, cfg.keep_counts);
  if (cfg.policy->kind == PolicyKind::concatenated) detail::attach_regenerations(r, outcomes);
  return r;
}

inline RunResult run_geometric_horizon(const SimulationConfig& cfg) {
  const auto* geo = std::get_if<GeometricHorizon>(&cfg.horizon);
  if (geo == nullptr) throw std::invalid_argument("run_geometric_horizon needs a geometric horizon");
  const DiscountFactor rho(geo->rho);
  const Policy policy = detail::policy_for(cfg);
  if (cfg.policy->kind == PolicyKind::finite_optimal) {
    throw std::invalid_argument("horizon/policy mismatch: finite-optimal policy needs a fixed horizon");
  }
  const auto outcomes = detail::for_each_replicate(cfg.reps, cfg.threads, [&](std::size_t rep) {
    CounterStream stream(cfg.seed, rep);
    const std::uint64_t length = sample_geometric(rho, stream);
    return detail::play_stream(policy, stream, length);
  });
  RunResult r = detail::aggregate(outcomes, cfg.keep_counts);
  if (cfg.policy->kind == PolicyKind::concatenated) detail::attach_regenerations(r, outcomes);
  return r;
}

inline RunResult run(const SimulationConfig& cfg) {
  return std::holds_alternative<FixedHorizon>(cfg.horizon) ? run_fixed_horizon(cfg) : run_geometric_horizon(cfg);
}

/// Longest alternating subsequence of n uniforms, replicated.
inline RunResult run_offline(Horizon n, std::size_t reps, std::uint64_t seed, unsigned threads = 0,
                             bool keep_counts = false) {
  if (reps < 1) throw std::invalid_argument("reps must be >= 1");
  const auto outcomes = detail::for_each_replicate(reps, threads, [&](std::size_t rep) {
    CounterStream stream(seed, rep);
    std::vector<double> x(n);
    for (double& v : x) v = stream.uniform();
    detail::ReplicateOutcome o;
    o.selections = longest_alternating(x);
    o.length = n;
    return o;
  });
  return detail::aggregate(outcomes, keep_counts);
}

}  // namespace altseq
