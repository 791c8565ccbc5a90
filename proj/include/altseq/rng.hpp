#pragma once

#include <cstdint>

namespace altseq {

inline constexpr std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// Counter-based uniform stream: draw k of replicate r under seed s is a
/// pure function of (s, r, k), so replicates can be generated in any order
/// or on any thread with identical results.
class CounterStream {
 public:
  CounterStream(std::uint64_t seed, std::uint64_t replicate)
      : key_(splitmix64(splitmix64(seed) ^ splitmix64(replicate ^ 0xD1B54A32D192ED03ull))) {}

  std::uint64_t bits_at(std::uint64_t index) const {
    return splitmix64(key_ + (index + 1) * 0x9E3779B97F4A7C15ull);
  }

  std::uint64_t next_bits() { return bits_at(counter_++); }

  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(next_bits() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1).
  double open_uniform() { return (static_cast<double>(next_bits() >> 11) + 0.5) * 0x1.0p-53; }

  std::uint64_t position() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace altseq
