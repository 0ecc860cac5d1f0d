#include <array>
#include <cmath>
#include <set>

#include <gtest/gtest.h>

#include "rangeland/rng.hpp"

using namespace rangeland;

TEST(Rng, SameKeyAndCounterGiveSameDraws) {
  RngStream a(42), b(42);
  for (int i = 0; i < 1000; ++i) EXPECT_EQ(a.next_bits(), b.next_bits());
  RngStream c(42);
  c.seek(500);
  RngStream d(42);
  for (int i = 0; i < 500; ++i) d.next_bits();
  EXPECT_EQ(c.next_bits(), d.next_bits());
}

TEST(Rng, DrawIsPureFunctionOfKeyAndCounter) {
  RngStream s(7);
  s.seek(123);
  EXPECT_EQ(s.uniform(), RngStream::uniform_at(7, 123));
  EXPECT_EQ(s.counter(), 124u);
}

TEST(Rng, DistinctKeysGiveDistinctStreams) {
  std::set<std::uint64_t> firsts;
  for (std::uint64_t k = 0; k < 1000; ++k) firsts.insert(RngStream::bits_at(k, 0));
  EXPECT_EQ(firsts.size(), 1000u);
  EXPECT_NE(hash_combine(1, 2), hash_combine(2, 1));
}

TEST(Rng, UniformIsOpenUnitIntervalWithCorrectMoments) {
  RngStream s(99);
  const int n = 200000;
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = s.uniform();
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u, sum2 += u * u;
  }
  const double mean = sum / n;
  EXPECT_NEAR(mean, 0.5, 4.0 * std::sqrt(1.0 / 12.0 / n));
  EXPECT_NEAR(sum2 / n - mean * mean, 1.0 / 12.0, 2e-3);
}

TEST(Rng, NormalPairMoments) {
  RngStream s(5);
  const int n = 200000;
  double m1 = 0.0, m2 = 0.0, cross = 0.0;
  for (int i = 0; i < n; ++i) {
    const auto [a, b] = s.normal_pair();
    m1 += a + b, m2 += a * a + b * b, cross += a * b;
  }
  EXPECT_NEAR(m1 / (2.0 * n), 0.0, 0.01);
  EXPECT_NEAR(m2 / (2.0 * n), 1.0, 0.01);
  EXPECT_NEAR(cross / n, 0.0, 0.01);
}

TEST(Rng, BelowStaysInRange) {
  RngStream s(3);
  std::array<int, 7> counts{};
  for (int i = 0; i < 70000; ++i) {
    const auto v = s.below(7);
    ASSERT_LT(v, 7u);
    ++counts[v];
  }
  for (int c : counts) EXPECT_NEAR(c, 10000, 500);
}

TEST(Rng, LogNormalMomentMatching) {
  const auto ln = LogNormalMoments::from_mean_sd(10.0, 14.0);
  const double mean = std::exp(ln.mu + 0.5 * ln.sigma * ln.sigma);
  const double var = (std::exp(ln.sigma * ln.sigma) - 1.0) * mean * mean;
  EXPECT_NEAR(mean, 10.0, 1e-12);
  EXPECT_NEAR(std::sqrt(var), 14.0, 1e-12);
  EXPECT_EQ(unit_lognormal(0.0, 3.0), 1.0);
}

TEST(Rng, UnitLognormalHasUnitMean) {
  RngStream s(11);
  double sum = 0.0, sum2 = 0.0;
  const int n = 400000;
  for (int i = 0; i < n; ++i) {
    const double v = unit_lognormal(0.3, s.normal());
    sum += v, sum2 += v * v;
  }
  const double mean = sum / n;
  EXPECT_NEAR(mean, 1.0, 0.005);
  EXPECT_NEAR(std::sqrt(sum2 / n - mean * mean), 0.3, 0.005);
}
