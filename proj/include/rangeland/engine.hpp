#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "drivers.hpp"
#include "env.hpp"
#include "params.hpp"
#include "rng.hpp"
#include "socio.hpp"

namespace rangeland {

struct RunConfig {
  double dt = 0.0078125;     // yr
  double horizon = 300.0;    // yr
  std::uint64_t seed_key = 1;  // base seed of the campaign
  bool record_traces = false;

  /// Number of steps; throws if horizon is not a whole number of steps.
  std::int64_t steps() const {
    if (!(dt > 0.0) || !(horizon > 0.0) || !std::isfinite(dt) || !std::isfinite(horizon))
      throw std::invalid_argument("dt and horizon must be positive and finite");
    const double n = horizon / dt;
    const double r = std::round(n);
    if (std::abs(n - r) > 1e-9 * std::max(1.0, r)) throw std::invalid_argument("horizon is not a multiple of dt");
    return static_cast<std::int64_t>(r);
  }
};

struct Targets {
  double soil_depth_end = 0.0;  // mm
  double avg_farmers = 0.0;     // frm
  double avg_stocking = 0.0;    // LU/ha
  double avg_herbage = 0.0;     // kg DM/ha
  double avg_earnings = 0.0;    // EUR/frm/yr

  static constexpr std::size_t kCount = 5;
  static constexpr const char* names[kCount] = {"soil_depth_end", "avg_farmers", "avg_stocking", "avg_herbage",
                                                "avg_earnings"};
  double operator[](std::size_t i) const {
    switch (i) {
    case 0: return soil_depth_end;
    case 1: return avg_farmers;
    case 2: return avg_stocking;
    case 3: return avg_herbage;
    case 4: return avg_earnings;
    default: throw std::out_of_range("target index");
    }
  }
  bool operator==(const Targets&) const = default;
};

/// Per-step records; one row per step, sampled after the step.
struct Traces {
  std::vector<double> time;
  std::vector<DriverSample> drivers;
  std::vector<EnvState> env;
  std::vector<EnvDerived> env_flows;
  std::vector<SocioState> socio;
  std::vector<FlowReport> socio_flows;
};

enum class RunStatus { Ok, Failed };

struct RunResult {
  RunStatus status = RunStatus::Ok;
  Targets targets;
  std::string diagnostics;   // empty when ok
  std::int64_t steps = 0;    // steps executed
  double max_water_residual = 0.0;  // mm, largest per-step water-balance closure error
  Traces traces;             // filled when record_traces is set

  bool ok() const noexcept { return status == RunStatus::Ok; }
};

/// Stream key of one run: the campaign seed combined with the run's own
/// sampled seed parameter. Runs sharing that parameter share their weather.
inline std::uint64_t stream_key(std::uint64_t base_seed, double random_seed_param) {
  return hash_combine(base_seed, static_cast<std::uint64_t>(std::floor(std::max(0.0, random_seed_param))));
}

/// One coupled run. Socio uses the previous step's herbage; env uses this
/// step's stocking rate. Targets average the post-step states.
inline RunResult simulate(const ParamSet& ps, const RunConfig& cfg) {
  RunResult res;
  const std::int64_t n = cfg.steps();
  const DriverModel drivers(ps);
  const EnvModel env(ps);
  const SocioModel socio(ps);
  RngStream rng(stream_key(cfg.seed_key, ps[P::random_seed]));

  EnvState es = env.initial_state(ps);
  rng.seek(0);
  SocioState ss = socio.initial_state(ps, drivers.sample(0.0, rng));
  if (cfg.record_traces) {
    auto& t = res.traces;
    t.time.reserve(n), t.drivers.reserve(n), t.env.reserve(n), t.env_flows.reserve(n);
    t.socio.reserve(n), t.socio_flows.reserve(n);
  }

  double sum_farmers = 0.0, sum_stocking = 0.0, sum_herbage = 0.0, sum_earnings = 0.0;
  std::int64_t k = 0;
  try {
    for (; k < n; ++k) {
      const double t = static_cast<double>(k) * cfg.dt;
      rng.seek(static_cast<std::uint64_t>(k) * DriverModel::kDrawsPerStep);
      const DriverSample d = drivers.sample(t, rng);

      FlowReport f;
      const SocioState sn = socio.step(ss, es.herbage(), d, cfg.dt, f);
      const double stocking = socio.stocking_rate(sn);

      EnvDerived ed;
      const EnvState en = env.step(es, d, stocking, cfg.dt, ed);
      const double residual = std::abs((es.soil_moisture + d.rain_depth) -
                                       (en.soil_moisture + ed.runoff + ed.actual_et + ed.drainage));
      res.max_water_residual = std::max(res.max_water_residual, residual);

      es = en;
      ss = sn;
      sum_farmers += ss.active_farmers;
      sum_stocking += stocking;
      sum_herbage += es.herbage();
      sum_earnings += f.profit_per_farmer_rate;
      if (cfg.record_traces) {
        auto& tr = res.traces;
        tr.time.push_back(t + cfg.dt);
        tr.drivers.push_back(d);
        tr.env.push_back(es);
        tr.env_flows.push_back(ed);
        tr.socio.push_back(ss);
        tr.socio_flows.push_back(f);
      }
    }
  } catch (const std::exception& e) {
    res.status = RunStatus::Failed;
    std::ostringstream msg;
    msg << "step " << k << ": " << e.what();
    res.diagnostics = msg.str();
  }
  res.steps = k;
  const double inv = k > 0 ? 1.0 / static_cast<double>(k) : 0.0;
  res.targets = {es.soil_depth, sum_farmers * inv, sum_stocking * inv, sum_herbage * inv, sum_earnings * inv};
  if (res.ok()) {
    bool finite = true;
    for (std::size_t i = 0; i < Targets::kCount; ++i) finite = finite && std::isfinite(res.targets[i]);
    if (!finite) {
      res.status = RunStatus::Failed;
      res.diagnostics = "non-finite target";
    }
  }
  return res;
}

/// Runs every scenario; results keep input order regardless of workers.
inline std::vector<RunResult> run_batch(const std::vector<ParamSet>& scenarios, const RunConfig& cfg,
                                        unsigned workers = 1) {
  if (scenarios.empty()) throw std::invalid_argument("empty scenario list");
  std::vector<RunResult> out(scenarios.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < scenarios.size(); i = next++) out[i] = simulate(scenarios[i], cfg);
  };
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(scenarios.size())));
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  return out;
}

/// Indices of failed runs, for the aggregate failure report.
inline std::vector<std::size_t> failed_indices(const std::vector<RunResult>& results) {
  std::vector<std::size_t> f;
  for (std::size_t i = 0; i < results.size(); ++i)
    if (!results[i].ok()) f.push_back(i);
  return f;
}

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_targets_csv(std::ostream& os, const std::vector<RunResult>& results) {
  os << "scenario_id,soil_depth_end,avg_farmers,avg_stocking,avg_herbage,avg_earnings,status\n";
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& r = results[i];
    os << i;
    for (std::size_t j = 0; j < Targets::kCount; ++j) os << ',' << format_double(r.targets[j]);
    os << ',' << (r.ok() ? "ok" : "failed") << '\n';
  }
}

inline void write_driver_trace(std::ostream& os, const Traces& t) {
  os << "step,time,rain_depth,rain_energy,et0,runoff_noise,wop,wsfp,wbfp,other_costs,opp_cost\n";
  for (std::size_t i = 0; i < t.time.size(); ++i) {
    const auto& d = t.drivers[i];
    os << i + 1 << ',';
    for (double v : {t.time[i], d.rain_depth, d.rain_energy, d.et0, d.runoff_noise, d.wop, d.wsfp, d.wbfp,
                     d.other_costs})
      os << format_double(v) << ',';
    os << format_double(d.opp_cost) << '\n';
  }
}

inline void write_env_trace(std::ostream& os, const Traces& t) {
  os << "step,time,soil_moisture,soil_depth,green_herbage,dry_herbage,herbage,bulk_density,canopy_cover,runoff,erosion,"
        "growth_fraction,actual_et,drainage,grazed\n";
  for (std::size_t i = 0; i < t.time.size(); ++i) {
    const auto& s = t.env[i];
    const auto& f = t.env_flows[i];
    os << i + 1 << ',';
    for (double v : {t.time[i], s.soil_moisture, s.soil_depth, s.green_herbage, s.dry_herbage, s.herbage(),
                     f.bulk_density, f.canopy_cover, f.runoff, f.erosion, f.growth_fraction, f.actual_et, f.drainage})
      os << format_double(v) << ',';
    os << format_double(f.grazed) << '\n';
  }
}

inline void write_socio_trace(std::ostream& os, const Traces& t, const SocioModel& model) {
  os << "step,time,active_farmers,breeding_females,young_females,stocking_rate,price_output,price_old,price_feed,"
        "price_breeding,inventory_output,inventory_old,inventory_feed,inventory_breeding,expected_profit,"
        "expected_margin,feed_demand,feed_delivered,attainment,profit_this_step,earnings\n";
  for (std::size_t i = 0; i < t.time.size(); ++i) {
    const auto& s = t.socio[i];
    const auto& f = t.socio_flows[i];
    os << i + 1 << ',';
    for (double v : {t.time[i], s.active_farmers, s.breeding_females, s.young_females, model.stocking_rate(s),
                     s.prices[0], s.prices[1], s.prices[2], s.prices[3], s.inventories[0], s.inventories[1],
                     s.inventories[2], s.inventories[3], s.expected_profit, s.expected_margin, f.feed_demand,
                     f.feed_delivered, f.attainment, f.profit_this_step})
      os << format_double(v) << ',';
    os << format_double(f.profit_per_farmer_rate) << '\n';
  }
}

} // namespace rangeland
