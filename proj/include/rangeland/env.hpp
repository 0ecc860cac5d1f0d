#pragma once

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>

#include "drivers.hpp"
#include "params.hpp"

namespace rangeland {

/// Raised when a submodel step produces a state violating its invariants.
class InvariantError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Stocks of the representative hectare.
struct EnvState {
  double soil_moisture = 0.0;  // mm
  double soil_depth = 0.0;     // mm
  double green_herbage = 0.0;  // kg DM/ha
  double dry_herbage = 0.0;    // kg DM/ha

  double herbage() const noexcept { return green_herbage + dry_herbage; }
};

/// Rates and auxiliaries of one environmental step.
struct EnvDerived {
  double bulk_density = 0.0;     // g/cm3
  double canopy_cover = 0.0;     // fraction
  double runoff = 0.0;           // mm
  double erosion = 0.0;          // mm soil
  double growth_fraction = 0.0;  // fraction
  double actual_et = 0.0;        // mm
  double drainage = 0.0;         // mm
  double grazed = 0.0;           // kg DM/ha
};

/// Representative-hectare model: bucket water balance, runoff, erosion with
/// bulk-density feedback, and green/dry herbage under grazing.
class EnvModel {
public:
  explicit EnvModel(const ParamSet& ps)
      : depth0_(ps[P::initial_soil_depth]), rho_rock_(ps[P::rock_density]),
        rho0_(ps[P::particle_density] * (1.0 - ps[P::initial_porosity])), bd_threshold_(ps[P::bd_threshold_herbage]),
        theta_fc_(ps[P::swc_field_capacity]), theta_wp_(ps[P::wilting_ratio] * ps[P::swc_field_capacity]),
        intake_capacity_(ps[P::soil_intake_capacity]), energy_coef_(ps[P::rain_energy_coef]),
        growth_rate_(ps[P::gh_growth_rate]), gh_max_(ps[P::gh_max]), senescence_(ps[P::gh_senescence_rate]),
        decay_(ps[P::dh_decay_rate]), intake_half_(ps[P::intake_half_saturation]),
        max_intake_(ps[P::energy_intake_per_lu] / ps[P::herbage_energy_content]), runoff_dbs_(ps[P::runoff_dbs_mean]),
        canopy_runoff_(ps[P::canopy_runoff_reduction]), canopy_protection_(ps[P::canopy_protection]),
        canopy_extinction_(ps[P::canopy_extinction]), bare_evaporation_(ps[P::bare_evaporation_fraction]),
        weathering_(ps[P::weathering_rate]), energy_exp_(ps[P::erosion_energy_exponent]),
        runoff_cal_(ps[P::runoff_calibration]), bare_area_cal_(ps[P::canopy_cover_calibration]) {
    // Slope factor normalized to a 22.13 m plot at 9% gradient.
    const double slope = std::sqrt(ps[P::slope_length] / 22.13) * std::pow(ps[P::slope_gradient] / 0.09, 1.3);
    kappa_ = ps[P::erosion_calibration] * ps[P::erodibility] * slope;
  }

  double initial_depth() const noexcept { return depth0_; }
  double initial_bulk_density() const noexcept { return rho0_; }
  double field_capacity(double depth) const noexcept { return theta_fc_ * depth; }
  double wilting_point(double depth) const noexcept { return theta_wp_ * depth; }

  /// Linear profile from the topsoil density at the initial depth to the
  /// parent-rock density at zero depth.
  double bulk_density(double depth) const noexcept {
    const double rel = std::clamp(depth / depth0_, 0.0, 1.0);
    return rho_rock_ - (rho_rock_ - rho0_) * rel;
  }

  /// 0 at wilting point, 1 at field capacity.
  double water_availability(const EnvState& s) const noexcept {
    if (s.soil_depth <= 0.0) return 0.0;
    const double wp = wilting_point(s.soil_depth);
    const double fc = field_capacity(s.soil_depth);
    if (fc <= wp) return s.soil_moisture >= fc ? 1.0 : 0.0;
    return std::clamp((s.soil_moisture - wp) / (fc - wp), 0.0, 1.0);
  }

  /// Fraction of the potential herbage growth rate realised. Zero at
  /// wilting point, with no soil, or at or above the bulk-density threshold;
  /// one only at field capacity on undegraded soil.
  double growth_fraction(const EnvState& s) const noexcept {
    if (s.soil_depth <= 0.0) return 0.0;
    const double rho = bulk_density(s.soil_depth);
    if (rho >= bd_threshold_) return 0.0;
    const double soil = std::min(1.0, s.soil_depth / depth0_);
    const double compaction = std::min(1.0, (bd_threshold_ - rho) / (bd_threshold_ - rho0_));
    return water_availability(s) * soil * compaction;
  }

  double bare_area(double stocking) const noexcept { return 1.0 - std::exp(-bare_area_cal_ * stocking); }

  double canopy_cover(const EnvState& s, double stocking) const noexcept {
    const double cover = 1.0 - std::exp(-canopy_extinction_ * s.herbage());
    return std::clamp(cover * (1.0 - bare_area(stocking)), 0.0, 1.0);
  }

  /// Runoff depth of one step. On dry bare soil the coefficient is the
  /// dry-bare-soil coefficient times the noise multiplier; wetness and
  /// rain energy add saturation runoff; canopy reduces both.
  double surface_runoff(double rain_depth, double rain_energy, const EnvState& s, double canopy,
                        double noise = 1.0) const noexcept {
    if (rain_depth <= 0.0) return 0.0;
    const double base = std::min(1.0, runoff_dbs_ * noise);
    // relative wetness between wilting point and field capacity; bare rock is saturated
    const double saturation = s.soil_depth > 0.0 ? water_availability(s) : 1.0;
    const double wet = saturation * (1.0 - std::exp(-runoff_cal_ * rain_energy / (energy_coef_ * intake_capacity_)));
    const double coefficient = (base + (1.0 - base) * wet) * (1.0 - canopy_runoff_ * std::clamp(canopy, 0.0, 1.0));
    return std::clamp(coefficient, 0.0, 1.0) * rain_depth;
  }

  /// Soil depth lost in one step.
  double erosion_rate(double runoff, double energy, double canopy, double rho) const noexcept {
    if (runoff <= 0.0 || energy <= 0.0) return 0.0;
    const double cover = 1.0 - canopy_protection_ * std::clamp(canopy, 0.0, 1.0);
    return std::max(0.0, kappa_ * runoff * std::pow(energy, energy_exp_) * cover / rho);
  }

  double erosion_scale() const noexcept { return kappa_; }

  /// Explicit one-step update. Throws InvariantError on a broken state.
  EnvState step(const EnvState& s, const DriverSample& d, double stocking, double dt, EnvDerived& out) const {
    out.bulk_density = bulk_density(s.soil_depth);
    out.canopy_cover = canopy_cover(s, stocking);
    out.growth_fraction = growth_fraction(s);
    const double availability = water_availability(s);

    // water
    out.runoff = surface_runoff(d.rain_depth, d.rain_energy, s, out.canopy_cover, d.runoff_noise);
    const double infiltration = d.rain_depth - out.runoff;
    const double et_demand =
        d.et0 * availability * (bare_evaporation_ + (1.0 - bare_evaporation_) * out.canopy_cover);
    out.actual_et = std::clamp(et_demand, 0.0, std::max(0.0, s.soil_moisture + infiltration));

    // soil
    out.erosion = erosion_rate(out.runoff, d.rain_energy, out.canopy_cover, out.bulk_density);
    EnvState n;
    n.soil_depth = std::max(0.0, s.soil_depth + weathering_ * dt - out.erosion);
    const double stored = s.soil_moisture + infiltration - out.actual_et;
    n.soil_moisture = std::clamp(stored, 0.0, field_capacity(n.soil_depth));
    out.drainage = stored - n.soil_moisture;

    // herbage
    const double bare = bare_area(stocking);
    const double growth =
        growth_rate_ * out.growth_fraction * (1.0 - bare) * std::max(0.0, 1.0 - s.green_herbage / gh_max_) * dt;
    const double senesced = out.bulk_density >= bd_threshold_
                                ? s.green_herbage
                                : s.green_herbage * std::min(1.0, senescence_ * (1.0 - 0.75 * availability) * dt);
    const double decayed = s.dry_herbage * std::min(1.0, decay_ * dt);
    const double available = s.herbage();
    const double demand = available > 0.0 ? stocking * max_intake_ * dt * available / (available + intake_half_) : 0.0;
    const double green = s.green_herbage + growth - senesced;
    const double from_green = std::clamp(demand, 0.0, green);
    const double dry = s.dry_herbage + senesced - decayed;
    const double from_dry = std::clamp(demand - from_green, 0.0, dry);
    n.green_herbage = std::max(0.0, green - from_green);
    n.dry_herbage = std::max(0.0, dry - from_dry);
    out.grazed = from_green + from_dry;

    check(n, out);
    return n;
  }

  void check(const EnvState& s, const EnvDerived& out) const {
    const bool ok = std::isfinite(s.soil_moisture) && std::isfinite(s.soil_depth) &&
                    std::isfinite(s.green_herbage) && std::isfinite(s.dry_herbage) && s.soil_moisture >= 0.0 &&
                    s.soil_depth >= 0.0 && s.green_herbage >= 0.0 && s.dry_herbage >= 0.0 &&
                    s.soil_moisture <= field_capacity(s.soil_depth) * (1.0 + 1e-12) + 1e-12 &&
                    std::isfinite(out.runoff) && std::isfinite(out.erosion) && out.canopy_cover >= 0.0 &&
                    out.canopy_cover <= 1.0;
    if (!ok) {
      std::ostringstream msg;
      msg << "environmental invariant broken: moisture=" << s.soil_moisture << " depth=" << s.soil_depth
          << " green=" << s.green_herbage << " dry=" << s.dry_herbage << " canopy=" << out.canopy_cover;
      throw InvariantError(msg.str());
    }
  }

  EnvState initial_state(const ParamSet& ps) const {
    EnvState s;
    s.soil_depth = ps[P::initial_soil_depth];
    s.soil_moisture = std::min(ps[P::initial_soil_moisture], field_capacity(s.soil_depth));
    s.green_herbage = ps[P::initial_green_herbage];
    s.dry_herbage = ps[P::initial_dry_herbage];
    return s;
  }

private:
  double depth0_, rho_rock_, rho0_, bd_threshold_;
  double theta_fc_, theta_wp_, intake_capacity_, energy_coef_;
  double growth_rate_, gh_max_, senescence_, decay_, intake_half_, max_intake_;
  double runoff_dbs_, canopy_runoff_, canopy_protection_, canopy_extinction_, bare_evaporation_;
  double weathering_, energy_exp_, runoff_cal_, bare_area_cal_;
  double kappa_ = 0.0;
};

inline double bulk_density(double soil_depth, const ParamSet& ps) { return EnvModel(ps).bulk_density(soil_depth); }

inline double growth_fraction(const EnvState& s, const ParamSet& ps) { return EnvModel(ps).growth_fraction(s); }

inline double surface_runoff(double rain_depth, double rain_energy, const EnvState& s, double canopy,
                             const ParamSet& ps, double noise = 1.0) {
  return EnvModel(ps).surface_runoff(rain_depth, rain_energy, s, canopy, noise);
}

inline double erosion_rate(double runoff, double energy, double canopy, double rho, const ParamSet& ps) {
  return EnvModel(ps).erosion_rate(runoff, energy, canopy, rho);
}

inline std::pair<EnvState, EnvDerived> step_env(const EnvState& s, const DriverSample& d, double stocking, double dt,
                                                const ParamSet& ps) {
  EnvDerived out;
  EnvState n = EnvModel(ps).step(s, d, stocking, dt, out);
  return {n, out};
}

} // namespace rangeland
