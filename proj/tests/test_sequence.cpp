#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "altseq/sequence.hpp"

namespace {

using altseq::longest_alternating;
using altseq::longest_alternating_oracle;

// Exhaustive enumeration of all 2^n subsequences.
std::size_t brute_force_alternating(const std::vector<double>& x) {
  const std::size_t n = x.size();
  std::size_t best = 0;
  for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
    std::vector<double> sub;
    for (std::size_t i = 0; i < n; ++i)
      if (mask & (1u << i)) sub.push_back(x[i]);
    bool ok = true;
    for (std::size_t k = 1; k < sub.size() && ok; ++k) {
      ok = (k % 2 == 1) ? sub[k - 1] < sub[k] : sub[k - 1] > sub[k];
    }
    if (ok) best = std::max(best, sub.size());
  }
  return best;
}

std::vector<double> random_sample(std::mt19937_64& gen, std::size_t n, bool coarse = false) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> level(0, 4);
  std::vector<double> x(n);
  for (double& v : x) v = coarse ? level(gen) / 4.0 : u(gen);
  return x;
}

TEST(Sample, RejectsValuesOutsideUnitInterval) {
  EXPECT_THROW(altseq::Sample({0.2, 1.5}), std::domain_error);
  EXPECT_THROW(altseq::Sample({-0.1}), std::domain_error);
  EXPECT_NO_THROW(altseq::Sample({0.0, 1.0}));
}

TEST(AlternationState, StartsAtFlippedZero) {
  altseq::AlternationState s;
  EXPECT_EQ(s.last_value, 1.0);
  EXPECT_EQ(s.parity, altseq::Parity::max);
  EXPECT_EQ(s.flipped().y, 0.0);
  const auto after = s.after_selecting(0.3);
  EXPECT_EQ(after.parity, altseq::Parity::min);
  EXPECT_DOUBLE_EQ(after.flipped().y, 0.3);
  EXPECT_DOUBLE_EQ(after.after_selecting(0.8).flipped().y, 1.0 - 0.8);
}

TEST(LongestAlternating, WorkedExamples) {
  EXPECT_EQ(longest_alternating(altseq::Sample{0.1, 0.7, 0.4, 0.9}), 4u);
  EXPECT_EQ(brute_force_alternating({0.1, 0.7, 0.4, 0.9}), 4u);
  EXPECT_EQ(longest_alternating(altseq::Sample{0.9, 0.1}), 1u);
  EXPECT_EQ(longest_alternating(altseq::Sample{0.5}), 1u);
  EXPECT_EQ(longest_alternating(altseq::Sample{0.1, 0.2, 0.3}), 2u);
  EXPECT_EQ(brute_force_alternating({0.1, 0.2, 0.3}), 2u);
  EXPECT_EQ(longest_alternating(altseq::Sample{}), 0u);
}

TEST(LongestAlternating, OracleExamples) {
  EXPECT_EQ(longest_alternating_oracle(altseq::Sample{0.1, 0.7, 0.4, 0.9}), 4u);
  EXPECT_EQ(longest_alternating_oracle(altseq::Sample{}), 0u);
  std::vector<double> too_long(21, 0.5);
  EXPECT_THROW(longest_alternating_oracle(too_long), std::length_error);
}

TEST(LongestAlternating, TiesNeverExtend) {
  EXPECT_EQ(longest_alternating(altseq::Sample{0.5, 0.5, 0.5}), 1u);
  EXPECT_EQ(longest_alternating(altseq::Sample{0.2, 0.2, 0.6, 0.6, 0.1}), 3u);
}

TEST(LongestAlternating, OracleAgreesWithBruteForce) {
  std::mt19937_64 gen(11);
  for (std::size_t n = 0; n <= 12; ++n) {
    for (int rep = 0; rep < 60; ++rep) {
      const auto x = random_sample(gen, n, rep % 3 == 0);
      ASSERT_EQ(longest_alternating_oracle(x), brute_force_alternating(x)) << "n=" << n;
    }
  }
}

TEST(LongestAlternating, ScanAgreesWithOracleOnRandomSamples) {
  std::mt19937_64 gen(2024);
  for (int rep = 0; rep < 1000; ++rep) {
    const auto x = random_sample(gen, 1 + rep % 12, rep % 4 == 0);
    ASSERT_EQ(longest_alternating(x), longest_alternating_oracle(x));
  }
}

TEST(LongestAlternating, PropertyInvariants) {
  std::mt19937_64 gen(7);
  for (int rep = 0; rep < 500; ++rep) {
    auto x = random_sample(gen, 1 + rep % 30);
    const std::size_t a = longest_alternating(x);
    EXPECT_GE(a, 1u);
    EXPECT_LE(a, x.size());

    std::vector<double> warped(x);
    for (double& v : warped) v = std::pow(v, 3.0);
    EXPECT_EQ(longest_alternating(warped), a);

    x.push_back(x.back());
    EXPECT_EQ(longest_alternating(x), a);
  }
}

TEST(PermutationMoments, Formulas) {
  const auto m4 = altseq::permutation_moments(4);
  EXPECT_NEAR(m4.mean, 17.0 / 6.0, 1e-15);
  EXPECT_NEAR(m4.variance, 115.0 / 180.0, 1e-15);
  const auto m100 = altseq::permutation_moments(100);
  EXPECT_NEAR(m100.mean, 66.833333, 1e-6);
  EXPECT_NEAR(m100.variance, 17.705556, 1e-6);
  EXPECT_THROW(altseq::permutation_moments(3), std::domain_error);
}

}  // namespace
