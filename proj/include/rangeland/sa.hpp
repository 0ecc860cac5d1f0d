#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "params.hpp"
#include "rng.hpp"

namespace rangeland {

/// Dense row-major matrix.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double v = 0.0) : rows(r), cols(c), data(r * c, v) {}

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }
  bool operator==(const Matrix&) const = default;
};

/// Two independent basic-scenario matrices.
struct SampleMatrices {
  Matrix A;
  Matrix B;
};

enum class SobolMethod { B3, JansenSaltelli };

inline std::string_view to_string(SobolMethod m) { return m == SobolMethod::B3 ? "b3" : "jansen-saltelli"; }

inline SobolMethod method_from_string(std::string_view s) {
  if (s == "b3") return SobolMethod::B3;
  if (s == "jansen-saltelli") return SobolMethod::JansenSaltelli;
  throw std::invalid_argument("unknown estimation method '" + std::string(s) + "'");
}

/// Latin hypercube on explicit ranges: column j has exactly one point in
/// each of the N equal strata of [lo_j, hi_j), strata independently permuted.
inline Matrix lhs_sample(std::span<const double> lo, std::span<const double> hi, std::size_t n, RngStream& rng) {
  if (n < 2) throw std::invalid_argument("LHS needs at least two points");
  if (lo.size() != hi.size()) throw std::invalid_argument("LHS bounds differ in length");
  const std::size_t k = lo.size();
  Matrix m(n, k);
  std::vector<std::size_t> perm(n);
  for (std::size_t j = 0; j < k; ++j) {
    if (!(lo[j] < hi[j])) throw std::invalid_argument("degenerate LHS range in column " + std::to_string(j));
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    for (std::size_t i = n - 1; i > 0; --i) std::swap(perm[i], perm[rng.below(i + 1)]);
    const double w = (hi[j] - lo[j]) / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double s = static_cast<double>(perm[i]);
      const double x = lo[j] + (s + rng.uniform()) * w;
      // keep rounding inside the stratum
      const double top = std::nextafter(lo[j] + (s + 1.0) * w, lo[j]);
      m(i, j) = std::clamp(x, lo[j] + s * w, top);
    }
  }
  return m;
}

inline Matrix lhs_sample(const ParamSpace& space, std::size_t n, RngStream& rng) {
  return lhs_sample(space.lo, space.hi, n, rng);
}

inline std::size_t scenario_count(std::size_t n, std::size_t k) { return n * (k + 2); }

/// Rows of A, rows of B, then for i = 1..k the rows of A with column i taken from B.
inline Matrix build_scenarios(const Matrix& A, const Matrix& B) {
  if (A.rows != B.rows || A.cols != B.cols) throw std::invalid_argument("A and B are not conformable");
  const std::size_t n = A.rows, k = A.cols;
  Matrix s(scenario_count(n, k), k);
  std::copy(A.data.begin(), A.data.end(), s.data.begin());
  std::copy(B.data.begin(), B.data.end(), s.data.begin() + static_cast<std::ptrdiff_t>(n * k));
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t r = 0; r < n; ++r) {
      const std::size_t row = (2 + i) * n + r;
      for (std::size_t c = 0; c < k; ++c) s(row, c) = c == i ? B(r, c) : A(r, c);
    }
  }
  return s;
}

/// Outputs of one target arranged per scenario block.
struct SobolOutputs {
  std::vector<double> yA;
  std::vector<double> yB;
  std::vector<std::vector<double>> yAB;  // k vectors of N

  std::size_t n() const noexcept { return yA.size(); }
  std::size_t k() const noexcept { return yAB.size(); }

  /// Splits a flat vector ordered as build_scenarios.
  static SobolOutputs from_flat(std::span<const double> y, std::size_t n, std::size_t k) {
    if (y.size() != scenario_count(n, k)) throw std::invalid_argument("output count does not match N(k+2)");
    SobolOutputs o;
    o.yA.assign(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(n));
    o.yB.assign(y.begin() + static_cast<std::ptrdiff_t>(n), y.begin() + static_cast<std::ptrdiff_t>(2 * n));
    o.yAB.resize(k);
    for (std::size_t i = 0; i < k; ++i)
      o.yAB[i].assign(y.begin() + static_cast<std::ptrdiff_t>((2 + i) * n),
                      y.begin() + static_cast<std::ptrdiff_t>((3 + i) * n));
    return o;
  }

  /// Rows selected by index (bootstrap resamples, leading subsets, filtering).
  SobolOutputs select(std::span<const std::size_t> rows) const {
    SobolOutputs o;
    o.yAB.resize(k());
    for (std::size_t r : rows) {
      o.yA.push_back(yA[r]);
      o.yB.push_back(yB[r]);
      for (std::size_t i = 0; i < k(); ++i) o.yAB[i].push_back(yAB[i][r]);
    }
    return o;
  }
};

struct SobolIndices {
  std::vector<double> si;
  std::vector<double> sti;
  double mean = 0.0;
  double variance = 0.0;
  bool degenerate = false;
};

namespace sa_detail {

inline double mean_of(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

// Standardized copy; an all-zero vector when the spread vanishes.
inline std::vector<double> standardize(std::span<const double> v) {
  const double m = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  const double sd = std::sqrt(ss / static_cast<double>(v.size()));
  std::vector<double> z(v.size(), 0.0);
  if (sd > 0.0 && sd > 1e-14 * std::abs(m))
    for (std::size_t j = 0; j < v.size(); ++j) z[j] = (v[j] - m) / sd;
  return z;
}

inline double corr_std(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) s += a[j] * b[j];
  return std::clamp(s / static_cast<double>(a.size()), -1.0, 1.0);
}

// Standardized coefficient of x when regressing y on x and z, given the
// pairwise correlations; reduces to rxy when x and z are uncorrelated.
inline double coefficient(double rxy, double rzy, double rxz) {
  const double den = 1.0 - rxz * rxz;
  if (!(den > 1e-12)) return 0.0;
  return (rxy - rzy * rxz) / den;
}

} // namespace sa_detail

/// First-order and total indices of one target.
inline SobolIndices estimate_indices(const SobolOutputs& y, SobolMethod method) {
  using namespace sa_detail;
  const std::size_t n = y.n(), k = y.k();
  if (n < 2) throw std::invalid_argument("at least two basic scenarios are needed");
  SobolIndices r;
  r.si.assign(k, 0.0);
  r.sti.assign(k, 0.0);
  std::vector<double> pooled(y.yA);
  pooled.insert(pooled.end(), y.yB.begin(), y.yB.end());
  for (double v : pooled)
    if (!std::isfinite(v)) throw std::invalid_argument("non-finite output");
  r.mean = mean_of(pooled);
  double ss = 0.0;
  for (double v : pooled) ss += (v - r.mean) * (v - r.mean);
  r.variance = ss / static_cast<double>(pooled.size() - 1);
  if (!(r.variance > 1e-24 * std::max(1.0, r.mean * r.mean))) {
    r.degenerate = true;
    return r;
  }

  if (method == SobolMethod::JansenSaltelli) {
    for (std::size_t i = 0; i < k; ++i) {
      double st = 0.0, s1 = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        const double d = y.yA[j] - y.yAB[i][j];
        st += d * d;
        s1 += y.yB[j] * (y.yAB[i][j] - y.yA[j]);
      }
      r.sti[i] = st / (2.0 * static_cast<double>(n) * r.variance);
      r.si[i] = s1 / (static_cast<double>(n) * r.variance);
    }
    return r;
  }

  // Correlation estimators on outputs standardized per matrix. yAB_i is
  // regressed on yA and yB jointly, which removes the spurious sample
  // correlation between the two basic matrices.
  const auto zA = standardize(y.yA);
  const auto zB = standardize(y.yB);
  const double rAB = corr_std(zA, zB);
  for (std::size_t i = 0; i < k; ++i) {
    const auto zi = standardize(y.yAB[i]);
    const double rAi = corr_std(zA, zi);
    const double rBi = corr_std(zB, zi);
    r.si[i] = coefficient(rBi, rAi, rAB);
    r.sti[i] = 1.0 - coefficient(rAi, rBi, rAB);
  }
  return r;
}

struct BootstrapErrors {
  std::vector<double> se_si;
  std::vector<double> se_sti;
};

/// Standard errors from resampling basic-scenario rows jointly with their
/// companions.
inline BootstrapErrors bootstrap(const SobolOutputs& y, SobolMethod method, std::size_t replicates, RngStream rng) {
  const std::size_t n = y.n(), k = y.k();
  std::vector<double> s1(k, 0.0), s2(k, 0.0), t1(k, 0.0), t2(k, 0.0);
  std::vector<std::size_t> rows(n);
  std::size_t used = 0;
  for (std::size_t b = 0; b < replicates; ++b) {
    for (auto& r : rows) r = static_cast<std::size_t>(rng.below(n));
    const auto est = estimate_indices(y.select(rows), method);
    if (est.degenerate) continue;
    ++used;
    for (std::size_t i = 0; i < k; ++i) {
      s1[i] += est.si[i], s2[i] += est.si[i] * est.si[i];
      t1[i] += est.sti[i], t2[i] += est.sti[i] * est.sti[i];
    }
  }
  BootstrapErrors e{std::vector<double>(k, 0.0), std::vector<double>(k, 0.0)};
  if (used < 2) return e;
  const double m = static_cast<double>(used);
  for (std::size_t i = 0; i < k; ++i) {
    e.se_si[i] = std::sqrt(std::max(0.0, (s2[i] - s1[i] * s1[i] / m) / (m - 1.0)));
    e.se_sti[i] = std::sqrt(std::max(0.0, (t2[i] - t1[i] * t1[i] / m) / (m - 1.0)));
  }
  return e;
}

/// Average ranks, ties sharing their mean rank.
inline std::vector<double> ranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t t = i; t <= j; ++t) r[order[t]] = avg;
    i = j + 1;
  }
  return r;
}

inline double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("spearman needs paired samples");
  const auto zx = sa_detail::standardize(ranks(x));
  const auto zy = sa_detail::standardize(ranks(y));
  return sa_detail::corr_std(zx, zy);
}

/// Changes of STi between successive sample sizes.
struct ConvergenceReport {
  std::vector<std::size_t> sizes;
  std::vector<std::vector<double>> sti;  // per size, per parameter
  std::vector<double> max_delta;         // per parameter, over successive sizes
  std::vector<double> last_delta;        // per parameter, last doubling
  std::vector<bool> unstable;            // last change above tolerance
  double tolerance = 0.05;
};

inline ConvergenceReport convergence_report(std::vector<std::size_t> sizes, std::vector<std::vector<double>> sti,
                                            double tolerance = 0.05) {
  if (sizes.size() < 2 || sizes.size() != sti.size()) throw std::invalid_argument("need at least two sample sizes");
  ConvergenceReport c;
  c.tolerance = tolerance;
  const std::size_t k = sti.front().size();
  c.max_delta.assign(k, 0.0);
  c.last_delta.assign(k, 0.0);
  c.unstable.assign(k, false);
  for (std::size_t l = 1; l < sti.size(); ++l) {
    for (std::size_t i = 0; i < k; ++i) {
      const double d = std::abs(sti[l][i] - sti[l - 1][i]);
      c.max_delta[i] = std::max(c.max_delta[i], d);
      if (l + 1 == sti.size()) c.last_delta[i] = d;
    }
  }
  for (std::size_t i = 0; i < k; ++i) c.unstable[i] = c.last_delta[i] > tolerance;
  c.sizes = std::move(sizes);
  c.sti = std::move(sti);
  return c;
}

/// Everything reported for one target.
struct SobolResult {
  SobolIndices indices;
  BootstrapErrors errors;
  std::vector<double> sign;  // Spearman correlation of the output with each input
  ConvergenceReport convergence;
  std::size_t excluded = 0;  // basic scenarios dropped for failed runs
};

/// Leading sample sizes N/8, N/4, N/2, N (those with at least two rows).
inline std::vector<std::size_t> convergence_sizes(std::size_t n) {
  std::vector<std::size_t> s;
  for (std::size_t d : {8u, 4u, 2u, 1u})
    if (n / d >= 2 && (s.empty() || s.back() != n / d)) s.push_back(n / d);
  if (s.size() < 2) s = {n, n};
  return s;
}

/// Full analysis of one target. `valid` flags runs to keep (ordered as
/// build_scenarios); a basic scenario is dropped if any of its k + 2 runs
/// failed.
inline SobolResult analyze(const Matrix& A, const Matrix& B, std::span<const double> y, std::span<const char> valid,
                           SobolMethod method, std::uint64_t seed, std::size_t replicates = 200) {
  const std::size_t n = A.rows, k = A.cols;
  const auto all = SobolOutputs::from_flat(y, n, k);
  std::vector<std::size_t> keep;
  for (std::size_t j = 0; j < n; ++j) {
    bool ok = true;
    for (std::size_t b = 0; b < k + 2 && ok; ++b) ok = valid.empty() || valid[b * n + j];
    if (ok) keep.push_back(j);
  }
  SobolResult res;
  res.excluded = n - keep.size();
  const auto out = all.select(keep);
  res.indices = estimate_indices(out, method);
  res.errors = bootstrap(out, method, replicates, RngStream(hash_combine(seed, 0xB007)));

  std::vector<double> col, yy;
  res.sign.assign(k, 0.0);
  if (!res.indices.degenerate) {
    for (std::size_t i = 0; i < k; ++i) {
      col.clear(), yy.clear();
      for (std::size_t t = 0; t < keep.size(); ++t) {
        col.push_back(A(keep[t], i)), yy.push_back(out.yA[t]);
        col.push_back(B(keep[t], i)), yy.push_back(out.yB[t]);
      }
      res.sign[i] = spearman(col, yy);
    }
  }

  std::vector<std::size_t> sizes;
  std::vector<std::vector<double>> series;
  for (std::size_t m : convergence_sizes(keep.size())) {
    std::vector<std::size_t> lead(m);
    std::iota(lead.begin(), lead.end(), std::size_t{0});
    sizes.push_back(m);
    series.push_back(estimate_indices(out.select(lead), method).sti);
  }
  res.convergence = convergence_report(sizes, series);
  return res;
}

/// Sobol analysis of a function of k inputs on a box, for benchmarks.
template <class F>
SobolIndices sobol_of_function(F&& f, std::span<const double> lo, std::span<const double> hi, std::size_t n,
                               SobolMethod method, std::uint64_t seed) {
  RngStream ra(hash_combine(seed, 1)), rb(hash_combine(seed, 2));
  const Matrix A = lhs_sample(lo, hi, n, ra);
  const Matrix B = lhs_sample(lo, hi, n, rb);
  const Matrix S = build_scenarios(A, B);
  std::vector<double> y(S.rows);
  for (std::size_t r = 0; r < S.rows; ++r) y[r] = f(S.row(r));
  return estimate_indices(SobolOutputs::from_flat(y, n, A.cols), method);
}

} // namespace rangeland
