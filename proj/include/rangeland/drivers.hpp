#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <tuple>
#include <utility>

#include "params.hpp"
#include "rng.hpp"

namespace rangeland {

/// Exogenous inputs of one time step.
struct DriverSample {
  double rain_depth = 0.0;   // mm
  double rain_energy = 0.0;  // MJ/ha
  double et0 = 0.0;          // mm
  double wop = 0.0;          // EUR/kg output
  double wsfp = 0.0;         // EUR/kg feed
  double wbfp = 0.0;         // EUR/head
  double other_costs = 0.0;  // EUR/farm/yr
  double opp_cost = 0.0;     // EUR/farm/yr
  double runoff_noise = 1.0; // unit-mean multiplier of the dry-bare-soil runoff coefficient
};

struct EconomicDrivers {
  double wop;
  double wsfp;
  double wbfp;
  double other_costs;
  double opp_cost;
};

namespace drivers_detail {
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
// Phase lags of the feed and breeding-female price cycles behind the output price cycle.
inline constexpr double kFeedPriceLag = 2.0;
inline constexpr double kBreedingPriceLag = 0.5;
inline constexpr double kOppCostLag = std::numbers::pi / 2.0;
// Drought cycle starts at its trough.
inline constexpr double kDroughtPhase = -std::numbers::pi / 2.0;
inline constexpr double kPriceFloor = 1e-6;

inline double cycle(double level, double amplitude, double t, double period, double phase) {
  return std::max(kPriceFloor, level * (1.0 + amplitude * std::sin(kTwoPi * t / period + phase)));
}
} // namespace drivers_detail

/// Weather and economic generators with their parameters unpacked.
class DriverModel {
public:
  /// Random draws consumed per time step; step n uses counters [n*k, n*k + k).
  static constexpr std::uint64_t kDrawsPerStep = 5;

  explicit DriverModel(const ParamSet& ps)
      : p_mean_(ps[P::rain_prob_mean]), rain_season_(ps[P::rain_seasonality]), rain_phase_(ps[P::rain_phase]),
        severity_(ps[P::drought_severity]), return_period_(ps[P::drought_return_period]),
        sharpness_(ps[P::drought_sharpness]), depth_mean_(ps[P::rain_depth_mean]), depth_sd_(ps[P::rain_depth_sd]),
        depth_ln_(LogNormalMoments::from_mean_sd(ps[P::rain_depth_mean], ps[P::rain_depth_sd])),
        energy_coef_(ps[P::rain_energy_coef]), energy_exp_(ps[P::rain_energy_exponent]),
        energy_cv_(ps[P::rain_energy_cv]), et0_mean_(ps[P::et0_mean]), et0_season_(ps[P::et0_seasonality]),
        et0_phase_(ps[P::et0_phase]), et0_cv_(ps[P::et0_cv]), runoff_cv_(ps[P::runoff_dbs_cv]),
        wop_(ps[P::wop_level]), wsfp_(ps[P::wsfp_level]), wbfp_(ps[P::wbfp_level]),
        price_amp_(ps[P::price_amplitude]), price_period_(ps[P::wop_period]), price_phase_(ps[P::price_phase]),
        oc_(ps[P::oc_level]), opc_(ps[P::opc_level]), cost_amp_(ps[P::cost_amplitude]),
        cost_period_(ps[P::oc_period]) {}

  double rain_probability(double t) const {
    using namespace drivers_detail;
    const double season = 1.0 + rain_season_ * std::sin(kTwoPi * t + rain_phase_);
    const double w = std::pow(0.5 + 0.5 * std::sin(kTwoPi * t / return_period_ + kDroughtPhase), sharpness_);
    const double drought = 1.0 - severity_ * w;
    return std::clamp(p_mean_ * season * drought, 0.0, 1.0);
  }

  /// Rain depth and energy of one step. Always consumes three draws.
  std::pair<double, double> sample_rain(double t, RngStream& rng) const {
    const double u = rng.uniform();
    const auto [z_depth, z_energy] = rng.normal_pair();
    if (!(u < rain_probability(t))) return {0.0, 0.0};
    const double depth = depth_sd_ > 0.0 ? depth_ln_.sample(z_depth) : depth_mean_;
    // power law anchored at the mean depth, so the exponent shapes but does not rescale energy
    const double energy =
        energy_coef_ * depth_mean_ * std::pow(depth / depth_mean_, energy_exp_) * unit_lognormal(energy_cv_, z_energy);
    return {depth, energy};
  }

  double et0_seasonal(double t) const {
    return et0_mean_ * (1.0 + et0_season_ * std::sin(drivers_detail::kTwoPi * t + et0_phase_));
  }

  double rain_seasonal(double t) const {
    return 1.0 + rain_season_ * std::sin(drivers_detail::kTwoPi * t + rain_phase_);
  }

  /// Reference ET of one step and the runoff noise multiplier drawn with it.
  /// Always consumes two draws.
  std::pair<double, double> sample_et0(double t, RngStream& rng) const {
    const auto [z_et, z_runoff] = rng.normal_pair();
    const double et0 = std::max(0.0, et0_seasonal(t) * unit_lognormal(et0_cv_, z_et));
    return {et0, unit_lognormal(runoff_cv_, z_runoff)};
  }

  EconomicDrivers economic(double t) const {
    using namespace drivers_detail;
    return {cycle(wop_, price_amp_, t, price_period_, price_phase_),
            cycle(wsfp_, price_amp_, t, price_period_, price_phase_ + kFeedPriceLag),
            cycle(wbfp_, price_amp_, t, price_period_, price_phase_ + kBreedingPriceLag),
            cycle(oc_, cost_amp_, t, cost_period_, price_phase_),
            cycle(opc_, cost_amp_, t, cost_period_, price_phase_ + kOppCostLag)};
  }

  DriverSample sample(double t, RngStream& rng) const {
    DriverSample d;
    std::tie(d.rain_depth, d.rain_energy) = sample_rain(t, rng);
    std::tie(d.et0, d.runoff_noise) = sample_et0(t, rng);
    const auto e = economic(t);
    d.wop = e.wop;
    d.wsfp = e.wsfp;
    d.wbfp = e.wbfp;
    d.other_costs = e.other_costs;
    d.opp_cost = e.opp_cost;
    return d;
  }

private:
  double p_mean_, rain_season_, rain_phase_, severity_, return_period_, sharpness_;
  double depth_mean_, depth_sd_;
  LogNormalMoments depth_ln_;
  double energy_coef_, energy_exp_, energy_cv_;
  double et0_mean_, et0_season_, et0_phase_, et0_cv_;
  double runoff_cv_;
  double wop_, wsfp_, wbfp_, price_amp_, price_period_, price_phase_;
  double oc_, opc_, cost_amp_, cost_period_;
};

// Free-function forms for callers holding only a ParamSet.

inline double rain_probability(double t, const ParamSet& ps) { return DriverModel(ps).rain_probability(t); }

inline std::pair<double, double> sample_rain(double t, RngStream& rng, const ParamSet& ps) {
  return DriverModel(ps).sample_rain(t, rng);
}

inline double reference_et(double t, RngStream& rng, const ParamSet& ps) {
  return DriverModel(ps).sample_et0(t, rng).first;
}

inline EconomicDrivers economic_drivers(double t, const ParamSet& ps) { return DriverModel(ps).economic(t); }

} // namespace rangeland
