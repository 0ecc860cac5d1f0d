#include <array>
#include <cmath>
#include <numbers>
#include <numeric>

#include <gtest/gtest.h>

#include "rangeland/sa.hpp"

using namespace rangeland;

namespace {

constexpr double kPi = std::numbers::pi;
const std::vector<SobolMethod> kMethods{SobolMethod::B3, SobolMethod::JansenSaltelli};

// Ishigami partial variances, a = 7, b = 0.1, inputs uniform on (-pi, pi).
struct IshigamiOracle {
  double a = 7.0, b = 0.1;
  double v1() const { return 0.5 * std::pow(1.0 + b * std::pow(kPi, 4) / 5.0, 2); }
  double v2() const { return a * a / 8.0; }
  double v13() const { return b * b * std::pow(kPi, 8) * (1.0 / 18.0 - 1.0 / 50.0); }
  double total() const { return v1() + v2() + v13(); }
  std::array<double, 3> s() const { return {v1() / total(), v2() / total(), 0.0}; }
  std::array<double, 3> st() const { return {(v1() + v13()) / total(), v2() / total(), v13() / total()}; }
};

double ishigami(std::span<const double> x) {
  return std::sin(x[0]) + 7.0 * std::pow(std::sin(x[1]), 2) + 0.1 * std::pow(x[2], 4) * std::sin(x[0]);
}

const std::vector<double> kIshLo(3, -kPi), kIshHi(3, kPi);

} // namespace

TEST(Sa, IshigamiOracleMatchesKnownValues) {
  const IshigamiOracle o;
  EXPECT_NEAR(o.total(), 7.0 * 7.0 / 8.0 + 0.1 * std::pow(kPi, 4) / 5.0 + 0.01 * std::pow(kPi, 8) / 18.0 + 0.5, 1e-12);
  EXPECT_NEAR(o.s()[0], 0.3139, 1e-4);
  EXPECT_NEAR(o.s()[1], 0.4424, 1e-4);
  EXPECT_NEAR(o.st()[0], 0.5576, 1e-4);
  EXPECT_NEAR(o.st()[2], 0.2437, 1e-4);
}

TEST(Sa, LhsFourStrataOnThirtyPercentRange) {
  RngStream rng(1);
  const std::vector<double> lo{70.0}, hi{130.0};
  const auto m = lhs_sample(lo, hi, 4, rng);
  std::array<int, 4> hits{};
  for (std::size_t r = 0; r < 4; ++r) {
    const double x = m(r, 0);
    ASSERT_GE(x, 70.0);
    ASSERT_LT(x, 130.0);
    ++hits[static_cast<std::size_t>((x - 70.0) / 15.0)];
  }
  for (int h : hits) EXPECT_EQ(h, 1);
}

TEST(Sa, LhsTwoPointsInDistinctHalves) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    RngStream rng(seed);
    const auto m = lhs_sample(std::vector<double>{0.0}, std::vector<double>{1.0}, 2, rng);
    EXPECT_NE(m(0, 0) < 0.5, m(1, 0) < 0.5);
  }
}

TEST(Sa, LhsStratificationHoldsForEveryColumn) {
  RngStream rng(3);
  const std::size_t n = 257, k = 12;
  std::vector<double> lo(k), hi(k);
  for (std::size_t j = 0; j < k; ++j) lo[j] = -1.0 * j, hi[j] = 1.0 + 3.0 * j;
  const auto m = lhs_sample(lo, hi, n, rng);
  for (std::size_t j = 0; j < k; ++j) {
    std::vector<int> hits(n, 0);
    const double w = (hi[j] - lo[j]) / n;
    for (std::size_t r = 0; r < n; ++r) {
      const auto s = static_cast<std::size_t>(std::floor((m(r, j) - lo[j]) / w));
      ASSERT_LT(s, n);
      ++hits[s];
    }
    for (int h : hits) ASSERT_EQ(h, 1);
  }
}

TEST(Sa, LhsRejectsDegenerateInput) {
  RngStream rng(1);
  EXPECT_THROW(lhs_sample(std::vector<double>{1.0}, std::vector<double>{1.0}, 4, rng), std::invalid_argument);
  EXPECT_THROW(lhs_sample(std::vector<double>{0.0}, std::vector<double>{1.0}, 1, rng), std::invalid_argument);
}

TEST(Sa, LhsColumnMeanConvergesToMidpoint) {
  // within-stratum uniform: Var(mean) = w^2 / (12 N^2) * N = (range/N)^2 / (12 N)
  const std::size_t n = 16, reps = 200;
  const double sd = (1.0 / n) / std::sqrt(12.0 * n);
  double worst = 0.0, grand = 0.0;
  for (std::size_t rep = 0; rep < reps; ++rep) {
    RngStream rng(hash_combine(8, rep));
    const auto m = lhs_sample(std::vector<double>{0.0}, std::vector<double>{1.0}, n, rng);
    double mean = 0.0;
    for (std::size_t r = 0; r < n; ++r) mean += m(r, 0) / n;
    worst = std::max(worst, std::abs(mean - 0.5));
    grand += mean / reps;
  }
  EXPECT_LT(worst, 4.0 * sd);
  EXPECT_LT(std::abs(grand - 0.5), 3.0 * sd / std::sqrt(static_cast<double>(reps)));
}

TEST(Sa, ScenarioMatrixLayout) {
  RngStream ra(1), rb(2);
  const std::vector<double> lo(5, 0.0), hi(5, 1.0);
  const auto A = lhs_sample(lo, hi, 6, ra), B = lhs_sample(lo, hi, 6, rb);
  const auto S = build_scenarios(A, B);
  ASSERT_EQ(S.rows, scenario_count(6, 5));
  for (std::size_t r = 0; r < 6; ++r) {
    for (std::size_t c = 0; c < 5; ++c) {
      EXPECT_EQ(S(r, c), A(r, c));
      EXPECT_EQ(S(6 + r, c), B(r, c));
    }
    for (std::size_t i = 0; i < 5; ++i) {
      int differ = 0;
      for (std::size_t c = 0; c < 5; ++c) {
        const double v = S((2 + i) * 6 + r, c);
        EXPECT_EQ(v, c == i ? B(r, c) : A(r, c));
        differ += v != A(r, c);
      }
      EXPECT_EQ(differ, 1);
    }
  }
}

TEST(Sa, IdenticalMatricesGiveIdenticalRows) {
  RngStream ra(1);
  const auto A = lhs_sample(std::vector<double>(3, 0.0), std::vector<double>(3, 1.0), 5, ra);
  const auto S = build_scenarios(A, A);
  for (std::size_t b = 0; b < 5; ++b)
    for (std::size_t r = 0; r < 5; ++r)
      for (std::size_t c = 0; c < 3; ++c) EXPECT_EQ(S(b * 5 + r, c), A(r, c));
}

TEST(Sa, ConstantOutputIsDegenerate) {
  for (auto method : kMethods) {
    const auto idx = sobol_of_function([](std::span<const double>) { return 4.2; }, kIshLo, kIshHi, 64, method, 1);
    EXPECT_TRUE(idx.degenerate);
    for (std::size_t i = 0; i < 3; ++i) {
      EXPECT_EQ(idx.si[i], 0.0);
      EXPECT_EQ(idx.sti[i], 0.0);
    }
  }
}

TEST(Sa, SingleInputIdentity) {
  for (auto method : kMethods) {
    const auto idx =
        sobol_of_function([](std::span<const double> x) { return x[0]; }, kIshLo, kIshHi, 4096, method, 2);
    EXPECT_NEAR(idx.sti[0], 1.0, 0.03) << to_string(method);
    EXPECT_NEAR(idx.si[0], 1.0, 0.03) << to_string(method);
    for (std::size_t i = 1; i < 3; ++i) {
      EXPECT_NEAR(idx.sti[i], 0.0, 0.03) << to_string(method);
      EXPECT_NEAR(idx.si[i], 0.0, 0.03) << to_string(method);
    }
  }
}

TEST(Sa, IshigamiBothMethods) {
  const IshigamiOracle o;
  for (auto method : kMethods) {
    const auto idx = sobol_of_function(ishigami, kIshLo, kIshHi, 4096, method, 3);
    for (std::size_t i = 0; i < 3; ++i) {
      EXPECT_NEAR(idx.si[i], o.s()[i], 0.03) << to_string(method) << " S" << i + 1;
      EXPECT_NEAR(idx.sti[i], o.st()[i], 0.03) << to_string(method) << " ST" << i + 1;
    }
    EXPECT_NEAR(idx.variance, o.total(), 0.05 * o.total());
  }
}

TEST(Sa, AdditiveFunctionHasEqualFirstAndTotal) {
  const std::vector<double> lo(4, 0.0), hi(4, 1.0);
  auto f = [](std::span<const double> x) { return x[0] + 2.0 * x[1] * x[1] + std::sin(3.0 * x[2]) + 0.5 * x[3]; };
  for (auto method : kMethods) {
    const auto idx = sobol_of_function(f, lo, hi, 4096, method, 4);
    for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(idx.si[i], idx.sti[i], 0.03) << to_string(method) << " " << i;
  }
}

TEST(Sa, MethodsAgreeOnBenchmarks) {
  const auto b3 = sobol_of_function(ishigami, kIshLo, kIshHi, 4096, SobolMethod::B3, 5);
  const auto js = sobol_of_function(ishigami, kIshLo, kIshHi, 4096, SobolMethod::JansenSaltelli, 5);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_NEAR(b3.sti[i], js.sti[i], 0.04);
    EXPECT_NEAR(b3.si[i], js.si[i], 0.04);
  }
}

TEST(Sa, BootstrapErrorsAndDominance) {
  RngStream ra(11), rb(12);
  const auto A = lhs_sample(kIshLo, kIshHi, 1024, ra), B = lhs_sample(kIshLo, kIshHi, 1024, rb);
  const auto S = build_scenarios(A, B);
  std::vector<double> y(S.rows);
  for (std::size_t r = 0; r < S.rows; ++r) y[r] = ishigami(S.row(r));
  for (auto method : kMethods) {
    const auto res = analyze(A, B, y, {}, method, 7, 200);
    double sum_si = 0.0, se_sum = 0.0;
    for (std::size_t i = 0; i < 3; ++i) {
      EXPECT_GT(res.errors.se_sti[i], 0.0);
      EXPECT_LT(res.errors.se_sti[i], 0.1);
      EXPECT_GE(res.indices.sti[i], res.indices.si[i] - 3.0 * std::max(res.errors.se_si[i], res.errors.se_sti[i]));
      sum_si += res.indices.si[i];
      se_sum += res.errors.se_si[i];
    }
    EXPECT_LE(sum_si, 1.0 + 3.0 * se_sum);
    EXPECT_EQ(res.excluded, 0u);
    // x1 enters through sin(x1) with a positive net effect
    EXPECT_GT(res.sign[0], 0.0);
  }
}

TEST(Sa, FailedRunsDropTheirBasicScenario) {
  RngStream ra(1), rb(2);
  const auto A = lhs_sample(kIshLo, kIshHi, 64, ra), B = lhs_sample(kIshLo, kIshHi, 64, rb);
  const auto S = build_scenarios(A, B);
  std::vector<double> y(S.rows);
  for (std::size_t r = 0; r < S.rows; ++r) y[r] = ishigami(S.row(r));
  std::vector<char> valid(S.rows, 1);
  valid[3] = 0;             // A row 3
  valid[2 * 64 + 10] = 0;   // AB(1) row 10
  const auto res = analyze(A, B, y, valid, SobolMethod::JansenSaltelli, 1, 10);
  EXPECT_EQ(res.excluded, 2u);
}

TEST(Sa, ConvergenceReportIdenticalEstimates) {
  const std::vector<double> sti{0.2, 0.5, 0.1};
  const auto c = convergence_report({8, 16, 32, 64}, {sti, sti, sti, sti});
  ASSERT_EQ(c.max_delta.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(c.max_delta[i], 0.0);
    EXPECT_FALSE(c.unstable[i]);
  }
}

TEST(Sa, ConvergenceReportCoversEveryParameterAndShrinks) {
  // Ishigami deltas over successive doublings shrink roughly as 1/sqrt(N)
  RngStream ra(21), rb(22);
  const std::size_t n = 8192;
  const auto A = lhs_sample(kIshLo, kIshHi, n, ra), B = lhs_sample(kIshLo, kIshHi, n, rb);
  const auto S = build_scenarios(A, B);
  std::vector<double> y(S.rows);
  for (std::size_t r = 0; r < S.rows; ++r) y[r] = ishigami(S.row(r));
  const auto res = analyze(A, B, y, {}, SobolMethod::JansenSaltelli, 3, 20);
  const auto& c = res.convergence;
  EXPECT_EQ(c.sizes, (std::vector<std::size_t>{1024, 2048, 4096, 8192}));
  EXPECT_EQ(c.max_delta.size(), 3u);
  // error of each level against the oracle falls by about sqrt(8) from N/8 to N
  const IshigamiOracle o;
  double first = 0.0, last = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    first += std::abs(c.sti.front()[i] - o.st()[i]);
    last += std::abs(c.sti.back()[i] - o.st()[i]);
  }
  EXPECT_LT(last, first + 0.01);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_LT(c.last_delta[i], 0.05);
}

TEST(Sa, SpearmanBasics) {
  const std::vector<double> x{1, 2, 3, 4, 5}, up{2, 4, 9, 16, 30}, down{5, 4, 3, 2, 1};
  EXPECT_NEAR(spearman(x, up), 1.0, 1e-12);
  EXPECT_NEAR(spearman(x, down), -1.0, 1e-12);
  EXPECT_EQ(ranks(std::vector<double>{3.0, 1.0, 3.0}), (std::vector<double>{2.5, 1.0, 2.5}));
}

TEST(Sa, MethodNames) {
  EXPECT_EQ(method_from_string("b3"), SobolMethod::B3);
  EXPECT_EQ(method_from_string("jansen-saltelli"), SobolMethod::JansenSaltelli);
  EXPECT_THROW(method_from_string("sobol"), std::invalid_argument);
}
