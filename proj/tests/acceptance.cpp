// Acceptance checks: prints one PASS/FAIL line per criterion and exits
// nonzero if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <numbers>
#include <string>
#include <thread>
#include <vector>

#include "rangeland.hpp"

using namespace rangeland;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

int failures = 0;

void report(int id, bool pass, const std::string& detail) {
  failures += !pass;
  std::printf("criterion %d: %s  %s\n", id, pass ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

// Ishigami (a = 7, b = 0.1) on [-pi, pi]^3, closed-form partial variances.
void criterion_1() {
  const double a = 7.0, b = 0.1, pi = std::numbers::pi;
  const double v1 = 0.5 * std::pow(1.0 + b * std::pow(pi, 4) / 5.0, 2);
  const double v2 = a * a / 8.0;
  const double v13 = b * b * std::pow(pi, 8) * (1.0 / 18.0 - 1.0 / 50.0);
  const double v = v1 + v2 + v13;
  const std::vector<double> s{v1 / v, v2 / v, 0.0}, st{(v1 + v13) / v, v2 / v, v13 / v};

  const std::vector<double> lo(3, -pi), hi(3, pi);
  auto f = [&](std::span<const double> x) { return std::sin(x[0]) + a * std::pow(std::sin(x[1]), 2) + b * std::pow(x[2], 4) * std::sin(x[0]); };
  const auto t0 = Clock::now();
  double worst = 0.0;
  for (auto m : {SobolMethod::B3, SobolMethod::JansenSaltelli}) {
    const auto idx = sobol_of_function(f, lo, hi, 4096, m, 1);
    worst = std::max({worst, max_abs_diff(idx.si, s), max_abs_diff(idx.sti, st)});
  }
  const double secs = seconds_since(t0);
  report(1, worst <= 0.03 && secs < 10.0,
         fmt("Ishigami N=4096, max |error| over S and ST for both methods = %.4f (tol 0.03), %.2f s (limit 10 s)", worst,
             secs));
}

// Sobol g-function, k = 8.
void criterion_2() {
  const std::vector<double> coef{0, 1, 4.5, 9, 99, 99, 99, 99};
  const std::size_t k = coef.size();
  std::vector<double> vi(k);
  double prod = 1.0;
  for (std::size_t i = 0; i < k; ++i) {
    vi[i] = 1.0 / (3.0 * (1.0 + coef[i]) * (1.0 + coef[i]));
    prod *= 1.0 + vi[i];
  }
  const double v = prod - 1.0;
  std::vector<double> s(k), st(k);
  for (std::size_t i = 0; i < k; ++i) {
    s[i] = vi[i] / v;
    st[i] = vi[i] * (prod / (1.0 + vi[i])) / v;
  }
  const std::vector<double> lo(k, 0.0), hi(k, 1.0);
  auto g = [&](std::span<const double> x) {
    double y = 1.0;
    for (std::size_t i = 0; i < k; ++i) y *= (std::abs(4.0 * x[i] - 2.0) + coef[i]) / (1.0 + coef[i]);
    return y;
  };
  double worst = 0.0;
  for (auto m : {SobolMethod::B3, SobolMethod::JansenSaltelli}) {
    const auto idx = sobol_of_function(g, lo, hi, 8192, m, 2);
    worst = std::max({worst, max_abs_diff(idx.si, s), max_abs_diff(idx.sti, st)});
  }
  report(2, worst <= 0.05, fmt("g-function N=8192, max |error| over S and ST for both methods = %.4f (tol 0.05)", worst));
}

void criterion_3() {
  CampaignSpec small;
  small.n = 8;
  small.horizon = 1.0;
  const auto plan = plan_campaign(ParamSet::defaults(), small);
  const auto res = run_campaign(plan, RunConfig{small.dt, small.horizon, small.seed, false}, 1);
  std::size_t executed = 0;
  for (const auto& r : res) executed += r.steps > 0;
  CampaignSpec full;
  full.n = 4000;
  const auto big = plan_campaign(ParamSet::defaults(), full);
  report(3, plan.k() == 70 && executed == 576 && big.count() == 288000,
         fmt("k = %zu; N=8 executed %zu runs (expect 576); N=4000 scheduled %zu (expect 288000)", plan.k(), executed,
             big.count()));
}

void criterion_4(unsigned workers) {
  const auto base = ParamSet::defaults();
  const auto space = build_space(base);
  RngStream rng(hash_combine(4, 10000));
  const Matrix X = lhs_sample(space, 10000, rng);
  const auto t0 = Clock::now();
  const auto res = run_indexed(
      X.rows, [&](std::size_t i) { return apply_scenario(base, space, X.row(i)); }, RunConfig{}, workers);
  std::size_t failed = 0, nonfinite = 0;
  double residual = 0.0;
  for (const auto& r : res) {
    failed += !r.ok();
    for (std::size_t t = 0; t < Targets::kCount; ++t) nonfinite += !std::isfinite(r.targets[t]);
    residual = std::max(residual, r.max_water_residual);
  }
  report(4, failed == 0 && nonfinite == 0 && residual <= 1e-9,
         fmt("10000 random 300-y runs: %zu failed, %zu non-finite targets, max water residual %.3g mm (limit 1e-9), "
             "%.0f s",
             failed, nonfinite, residual, seconds_since(t0)));
}

void criterion_5() {
  const auto ps = ParamSet::defaults();
  const EnvModel m(ps);
  const double d0 = m.initial_depth();
  bool ok = true;
  std::string detail;
  auto expect = [&](const char* what, double got, double want) {
    if (got != want) {
      ok = false;
      detail += fmt(" %s=%.17g(want %g)", what, got, want);
    }
  };
  expect("wilting", m.growth_fraction(EnvState{m.wilting_point(d0), d0, 100, 100}), 0.0);
  expect("no_soil", m.growth_fraction(EnvState{0.0, 0.0, 100, 100}), 0.0);
  expect("field_capacity", m.growth_fraction(EnvState{m.field_capacity(d0), d0, 100, 100}), 1.0);
  // porosity 0.30 gives 1.855 g/cm3 against a threshold 0.01 below it
  const auto dense = ps.with_value(P::initial_porosity, 0.30).with_value(P::bd_threshold_herbage, 1.845);
  const EnvModel md(dense);
  expect("above_threshold", md.growth_fraction(EnvState{md.field_capacity(d0), d0, 100, 100}), 0.0);
  report(5, ok, "growth fraction exact at wilting point, zero soil, field capacity, above BD threshold" + detail);
}

// Probability that 2.65 (1 - porosity) exceeds the threshold, both uniform
// on their sampled ranges, by Simpson integration over porosity.
double denudation_probability(double plo, double phi, double tlo, double thi, double particle) {
  const int n = 20000;
  const double h = (phi - plo) / n;
  double sum = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double rho = particle * (1.0 - (plo + i * h));
    const double p = std::clamp((rho - tlo) / (thi - tlo), 0.0, 1.0);
    sum += p * (i == 0 || i == n ? 1.0 : i % 2 ? 4.0 : 2.0);
  }
  return sum * h / 3.0 / (phi - plo);
}

double exceed_fraction(const CampaignPlan& plan) {
  const auto& ids = plan.space.ids;
  const auto pos = [&](const char* id) { return static_cast<std::size_t>(std::find(ids.begin(), ids.end(), id) - ids.begin()); };
  const std::size_t ip = pos("initial_porosity"), it = pos("bd_threshold_herbage");
  const double particle = plan.base[P::particle_density];
  std::size_t hits = 0;
  for (std::size_t i = 0; i < plan.count(); ++i) {
    const auto x = plan.scenario(i);
    hits += particle * (1.0 - x[ip]) > x[it];
  }
  return static_cast<double>(hits) / static_cast<double>(plan.count());
}

void criterion_6(const CampaignPlan& desk) {
  CampaignSpec full;
  full.n = 4000;
  const auto plan = plan_campaign(ParamSet::defaults(), full);
  const auto& ids = plan.space.ids;
  const auto pos = [&](const char* id) { return static_cast<std::size_t>(std::find(ids.begin(), ids.end(), id) - ids.begin()); };
  const std::size_t ip = pos("initial_porosity"), it = pos("bd_threshold_herbage");
  const double p = denudation_probability(plan.space.lo[ip], plan.space.hi[ip], plan.space.lo[it], plan.space.hi[it],
                                          plan.base[P::particle_density]);
  const double f = exceed_fraction(plan), f256 = exceed_fraction(desk);
  const double se = std::sqrt(p * (1.0 - p) / (2.0 * 4000.0));
  report(6, std::abs(f - p) <= 0.01,
         fmt("analytic P = %.4f; N=4000 plan fraction %.4f (|diff| %.4f, tol 0.01, binomial SE over 8000 basic "
             "scenarios %.4f); N=256 fraction %.4f",
             p, f, std::abs(f - p), se, f256));
}

struct Campaign {
  std::vector<Ranking> rankings;
  double seconds = 0.0;
};

Campaign run_desk(const CampaignPlan& plan, const CampaignSpec& spec, unsigned workers) {
  Campaign c;
  const auto t0 = Clock::now();
  const auto res = run_campaign(plan, RunConfig{spec.dt, spec.horizon, spec.seed, false}, workers);
  c.seconds = seconds_since(t0);
  save_sweep(spec.out, spec, plan, res);
  c.rankings = rank_directory(spec.out, spec.methods(), spec.seed);
  return c;
}

void criterion_7(const Campaign& c) {
  bool ok = true;
  std::string detail;
  for (const auto& r : c.rankings) {
    detail += fmt(" [%s:", std::string(to_string(r.method)).c_str());
    for (std::size_t t = 0; t < Targets::kCount; ++t) {
      const double e = r.sector_sti(t, Sector::Economic), b = r.sector_sti(t, Sector::Biophysical);
      const bool socio = t == 1 || t == 2 || t == 4;
      const bool dom = socio ? e > b : b > e;
      ok = ok && dom;
      detail += fmt(" %s econ %.3f bio %.3f%s;", Targets::names[t], e, b, dom ? "" : " WRONG");
    }
    const std::size_t wop = r.index_of("wop_level"), oc = r.index_of("oc_level"), sd = r.index_of("rain_depth_sd");
    for (std::size_t t : {1u, 2u, 4u}) {
      const auto& sign = r.targets[t].result.sign;
      const bool good = sign[wop] > 0.0 && sign[oc] < 0.0;
      ok = ok && good;
      detail += fmt(" %s wop %s oc %s%s;", Targets::names[t], sign_symbol(sign[wop]), sign_symbol(sign[oc]),
                    good ? "" : " WRONG");
    }
    const bool sd_neg = r.targets[0].result.sign[sd] < 0.0;
    ok = ok && sd_neg;
    detail += fmt(" soil_depth_end rain_depth_sd %s%s]", sign_symbol(r.targets[0].result.sign[sd]), sd_neg ? "" : " WRONG");
  }
  report(7, ok, "N=256 sector dominance and signs:" + detail);
}

void criterion_8(const fs::path& a, const fs::path& b, unsigned workers) {
  bool same = true;
  std::string diff;
  for (const auto* f : {"manifest.json", "matrices.csv", "targets.csv", "sobol.csv", "sobol-jansen-saltelli.csv",
                        "sobol.json", "report.md", "report-jansen-saltelli.md"}) {
    if (read_text(a / f) != read_text(b / f)) {
      same = false;
      diff += std::string(" ") + f;
    }
  }
  report(8, same,
         fmt("N=256 campaign serial vs %u workers, all output files byte-identical%s", workers,
             same ? "" : (" except:" + diff).c_str()));
}

void criterion_9(double campaign_seconds, unsigned workers) {
  const auto ps = ParamSet::defaults();
  simulate(ps, RunConfig{});
  std::vector<double> ms;
  for (int i = 0; i < 11; ++i) {
    const auto t0 = Clock::now();
    simulate(ps, RunConfig{});
    ms.push_back(seconds_since(t0) * 1000.0);
  }
  std::nth_element(ms.begin(), ms.begin() + 5, ms.end());
  const double median = ms[5];
  report(9, median <= 50.0 && campaign_seconds <= 1200.0,
         fmt("single 300-y run median %.1f ms (limit 50); N=256 campaign %.0f s on %u worker(s) (limit 1200 s)", median,
             campaign_seconds, workers));
}

} // namespace

int main(int argc, char** argv) {
  fs::path work = fs::temp_directory_path() / "rangeland_acceptance";
  for (int i = 1; i + 1 < argc; ++i)
    if (std::string(argv[i]) == "--workdir") work = argv[i + 1];
  fs::remove_all(work);
  fs::create_directories(work);
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const unsigned parallel = std::max(2u, hw);

  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4(hw);
  criterion_5();

  CampaignSpec spec;
  spec.n = 256;
  spec.seed = 1;
  spec.method = "both";
  spec.out = (work / "serial").string();
  const auto plan = plan_campaign(ParamSet::defaults(), spec);
  criterion_6(plan);

  const auto serial = run_desk(plan, spec, 1);
  criterion_7(serial);
  spec.out = (work / "parallel").string();
  const auto par = run_desk(plan, spec, parallel);
  criterion_8(work / "serial", work / "parallel", parallel);
  criterion_9(std::min(serial.seconds, par.seconds), hw);

  std::printf("%s: %d criterion(s) failed\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
