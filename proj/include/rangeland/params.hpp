#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <memory>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

namespace rangeland {

class ParseError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class ValidationError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

enum class Group { DriverWeather, DriverEconomic, SystemSocio, SystemEnv, InitialStock, Calibration };

/// Which side of the coupled model a parameter configures. Used to
/// aggregate sensitivity by economic vs biophysical origin.
enum class Sector { Economic, Biophysical };

inline constexpr std::string_view to_string(Group g) {
  switch (g) {
  case Group::DriverWeather: return "driver-weather";
  case Group::DriverEconomic: return "driver-economic";
  case Group::SystemSocio: return "system-socio";
  case Group::SystemEnv: return "system-env";
  case Group::InitialStock: return "initial-stock";
  case Group::Calibration: return "calibration";
  }
  return "?";
}

inline constexpr std::string_view to_string(Sector s) {
  return s == Sector::Economic ? "economic" : "biophysical";
}

inline Group group_from_string(std::string_view s) {
  for (auto g : {Group::DriverWeather, Group::DriverEconomic, Group::SystemSocio, Group::SystemEnv,
                 Group::InitialStock, Group::Calibration})
    if (to_string(g) == s) return g;
  throw ParseError("unknown parameter group '" + std::string(s) + "'");
}

inline Sector sector_from_string(std::string_view s) {
  if (s == "economic") return Sector::Economic;
  if (s == "biophysical") return Sector::Biophysical;
  throw ParseError("unknown parameter sector '" + std::string(s) + "'");
}

/// Model parameter slots. The order is the canonical order of the shipped
/// parameter set; model code indexes values with these.
enum class P : std::size_t {
  // weather drivers
  rain_prob_mean,
  rain_seasonality,
  rain_phase,
  drought_severity,
  drought_return_period,
  drought_sharpness,
  rain_depth_mean,
  rain_depth_sd,
  rain_energy_coef,
  rain_energy_exponent,
  rain_energy_cv,
  et0_mean,
  et0_seasonality,
  et0_phase,
  et0_cv,
  random_seed,
  // economic drivers
  wop_level,
  wsfp_level,
  wbfp_level,
  price_amplitude,
  wop_period,
  price_phase,
  oc_level,
  oc_period,
  opc_level,
  cost_amplitude,
  // socio-economic system
  total_area,
  potential_farmers,
  reference_herd,
  target_output_per_lu,
  energy_intake_per_lu,
  feed_energy_content,
  herbage_energy_content,
  young_lu_equivalent,
  cull_rate,
  rearing_time,
  subsidy_per_farmer,
  default_market_output,
  default_market_feed,
  default_market_breeding,
  trader_sensitivity,
  trader_expectation_delay,
  trader_target_delay,
  farmer_profit_sensitivity,
  farmer_price_sensitivity,
  farmer_expectation_delay,
  farmer_target_delay,
  // environmental system
  bd_threshold_herbage,
  initial_porosity,
  particle_density,
  rock_density,
  swc_field_capacity,
  wilting_ratio,
  soil_intake_capacity,
  gh_growth_rate,
  gh_max,
  gh_senescence_rate,
  dh_decay_rate,
  intake_half_saturation,
  runoff_dbs_mean,
  runoff_dbs_cv,
  canopy_runoff_reduction,
  canopy_protection,
  canopy_extinction,
  bare_evaporation_fraction,
  erodibility,
  slope_length,
  slope_gradient,
  weathering_rate,
  erosion_energy_exponent,
  // calibration
  erosion_calibration,
  runoff_calibration,
  canopy_cover_calibration,
  feed_willingness_calibration,
  feed_willingness_steepness,
  herd_response_calibration,
  // initial stocks
  initial_soil_moisture,
  initial_soil_depth,
  initial_green_herbage,
  initial_dry_herbage,
  initial_farmers,
  initial_breeding_females,
  initial_young_females,
  initial_output_inventory,
  initial_old_inventory,
  initial_feed_inventory,
  initial_breeding_inventory,
  count_
};

inline constexpr std::size_t kParamCount = static_cast<std::size_t>(P::count_);
inline constexpr std::size_t kInitialStockCount = 11;
inline constexpr std::size_t kVariedCount = 70;

struct Bounds {
  double lo;
  double hi;
  friend bool operator==(const Bounds&, const Bounds&) = default;
};

struct ParamDef {
  std::string id;
  std::string label;  // short display name used in ranking tables
  std::string description;
  std::string units;
  double default_value = 0.0;
  Group group = Group::SystemEnv;
  Sector sector = Sector::Biophysical;
  bool vary_in_sa = true;
  std::optional<Bounds> hard_bounds;

  friend bool operator==(const ParamDef&, const ParamDef&) = default;
};

namespace detail {

inline std::vector<ParamDef> build_registry() {
  using G = Group;
  constexpr auto E = Sector::Economic;
  constexpr auto B = Sector::Biophysical;
  constexpr std::optional<Bounds> none;
  const auto unit = std::optional<Bounds>(Bounds{0.0, 1.0});
  const auto pos = std::optional<Bounds>(Bounds{0.0, 1e12});
  std::vector<ParamDef> r;
  r.reserve(kParamCount);
  auto add = [&](P slot, std::string id, std::string label, std::string desc, std::string units, double def,
                 G group, Sector sector, bool vary, std::optional<Bounds> bounds) {
    if (r.size() != static_cast<std::size_t>(slot))
      throw std::logic_error("parameter registry out of order at " + id);
    r.push_back({std::move(id), std::move(label), std::move(desc) + " [reconstructed default]", std::move(units),
                 def, group, sector, vary, bounds});
  };

  // clang-format off
  add(P::rain_prob_mean, "rain_prob_mean", "Av. Rain. Probilty. / TS", "mean probability that it rains during one time step", "-", 0.30, G::DriverWeather, B, true, unit);
  add(P::rain_seasonality, "rain_seasonality", "Rainfall seasonality", "relative amplitude of the annual cycle of rain probability", "-", 0.80, G::DriverWeather, B, true, unit);
  add(P::rain_phase, "rain_phase", "Rainfall phase", "phase of the annual rain cycle; 0 starts the run at wet-season onset", "rad", 0.0, G::DriverWeather, B, false, none);
  add(P::drought_severity, "drought_severity", "Severity droughts", "fractional reduction of rain probability at drought peak", "-", 0.50, G::DriverWeather, B, true, unit);
  add(P::drought_return_period, "drought_return_period", "Return period droughts", "period of the interannual drought cycle", "yr", 8.0, G::DriverWeather, B, true, pos);
  add(P::drought_sharpness, "drought_sharpness", "Drought sharpness", "exponent that makes drought episodes short relative to their return period", "-", 4.0, G::DriverWeather, B, true, pos);
  add(P::rain_depth_mean, "rain_depth_mean", "Av. Rain. depth / TS", "mean rainfall depth of a wet time step", "mm", 12.0, G::DriverWeather, B, true, pos);
  add(P::rain_depth_sd, "rain_depth_sd", "SD Rain. depth / TS", "standard deviation of rainfall depth of a wet time step", "mm", 14.0, G::DriverWeather, B, true, pos);
  add(P::rain_energy_coef, "rain_energy_coef", "Rain energy coefficient", "kinetic energy of rainfall per mm of depth at the mean wet-step depth", "MJ/ha/mm", 0.20, G::DriverWeather, B, true, pos);
  add(P::rain_energy_exponent, "rain_energy_exponent", "Rain energy exponent", "exponent of the depth-energy power law around the mean depth", "-", 1.2, G::DriverWeather, B, true, pos);
  add(P::rain_energy_cv, "rain_energy_cv", "CV Rain. energy", "coefficient of variation of rainfall energy at given depth", "-", 0.30, G::DriverWeather, B, true, pos);
  add(P::et0_mean, "et0_mean", "Av. ET_o per TS", "mean reference evapotranspiration per time step", "mm", 8.5, G::DriverWeather, B, true, pos);
  add(P::et0_seasonality, "et0_seasonality", "ET_o seasonality", "relative amplitude of the annual ET_o cycle", "-", 0.70, G::DriverWeather, B, true, unit);
  add(P::et0_phase, "et0_phase", "ET_o phase", "phase of the annual ET_o cycle; opposite to rainfall", "rad", std::numbers::pi, G::DriverWeather, B, false, none);
  add(P::et0_cv, "et0_cv", "CV ET_o per TS", "coefficient of variation of ET_o per time step", "-", 0.20, G::DriverWeather, B, true, pos);
  add(P::random_seed, "random_seed", "Random seed", "seed of the weather generator; floored to an integer stream key", "-", 1000.0, G::DriverWeather, B, true, pos);

  add(P::wop_level, "wop_level", "Av. WOP level", "mean world/regional output price", "EUR/kg", 2.5, G::DriverEconomic, E, true, pos);
  add(P::wsfp_level, "wsfp_level", "Av. WSFP level", "mean world/regional supplementary feed price", "EUR/kg", 0.12, G::DriverEconomic, E, true, pos);
  add(P::wbfp_level, "wbfp_level", "Av. WBFP level", "mean world/regional breeding female price", "EUR/head", 1100.0, G::DriverEconomic, E, true, pos);
  add(P::price_amplitude, "price_amplitude", "Amplitude price cycles", "relative amplitude of world price cycles", "-", 0.15, G::DriverEconomic, E, true, Bounds{0.0, 0.9});
  add(P::wop_period, "wop_period", "Period WOP cycles", "period of world price cycles", "yr", 10.0, G::DriverEconomic, E, true, pos);
  add(P::price_phase, "price_phase", "Price cycle phase", "phase of economic cycles at t = 0", "rad", 0.0, G::DriverEconomic, E, false, none);
  add(P::oc_level, "oc_level", "Av. OC level", "mean costs other than feed and breeding females", "EUR/farm/yr", 20000.0, G::DriverEconomic, E, true, pos);
  add(P::oc_period, "oc_period", "Period OC cycles", "period of cost cycles (other and opportunity costs)", "yr", 12.0, G::DriverEconomic, E, true, pos);
  add(P::opc_level, "opc_level", "Av. OPC level", "mean opportunity cost of a farmer", "EUR/farm/yr", 22000.0, G::DriverEconomic, E, true, pos);
  add(P::cost_amplitude, "cost_amplitude", "Amplitude cost cycles", "relative amplitude of cost cycles", "-", 0.10, G::DriverEconomic, E, true, Bounds{0.0, 0.9});

  add(P::total_area, "total_area", "Total area", "area of the farming region", "ha", 10000.0, G::SystemSocio, E, false, pos);
  add(P::potential_farmers, "potential_farmers", "Potential No. Farmers", "number of farms the area can hold", "frm", 40.0, G::SystemSocio, E, true, pos);
  add(P::reference_herd, "reference_herd", "Reference herd per farm", "breeding herd per farm at neutral profitability", "head/frm", 80.0, G::SystemSocio, E, true, pos);
  add(P::target_output_per_lu, "target_output_per_lu", "Target output per LU", "weaned output per breeding female and year with full nutrition", "kg/LU/yr", 190.0, G::SystemSocio, E, true, pos);
  add(P::energy_intake_per_lu, "energy_intake_per_lu", "Energy intake per LU", "metabolisable energy requirement per livestock unit", "MJ/LU/yr", 27000.0, G::SystemSocio, E, true, pos);
  add(P::feed_energy_content, "feed_energy_content", "S. Feed energy content", "energy content of supplementary feed", "MJ/kg", 12.0, G::SystemSocio, E, true, pos);
  add(P::herbage_energy_content, "herbage_energy_content", "Herbage energy content", "energy content of grazed herbage", "MJ/kg DM", 9.0, G::SystemSocio, E, true, pos);
  add(P::young_lu_equivalent, "young_lu_equivalent", "LU per young female", "livestock units per replacement female", "LU/head", 0.6, G::SystemSocio, E, true, unit);
  add(P::cull_rate, "cull_rate", "Culling rate", "fraction of breeding females leaving production per year", "1/yr", 0.15, G::SystemSocio, E, true, unit);
  add(P::rearing_time, "rearing_time", "Rearing time", "time for a young female to enter the breeding herd", "yr", 2.0, G::SystemSocio, E, true, pos);
  add(P::subsidy_per_farmer, "subsidy_per_farmer", "Subsidy per farmer", "flat subsidy per active farm", "EUR/farm/yr", 12000.0, G::SystemSocio, E, true, pos);
  add(P::default_market_output, "default_market_output", "Default market output", "external demand for output at world price", "kg/yr", 1.0e6, G::SystemSocio, E, true, pos);
  add(P::default_market_feed, "default_market_feed", "Default market S. Feed", "external supply of feed at world price", "kg/yr", 5.0e6, G::SystemSocio, E, true, pos);
  add(P::default_market_breeding, "default_market_breeding", "Default market breeding f.", "external trade in breeding and old females at world price", "head/yr", 1500.0, G::SystemSocio, E, true, pos);
  add(P::trader_sensitivity, "trader_sensitivity", "Snstty. Traders - market", "price elasticity of external flows handled by traders", "-", 3.0, G::SystemSocio, E, true, pos);
  add(P::trader_expectation_delay, "trader_expectation_delay", "DTTA expectations", "time for traders to adjust prices", "yr", 0.25, G::SystemSocio, E, true, pos);
  add(P::trader_target_delay, "trader_target_delay", "DTTA targets", "time for traders to adjust inventory targets (also target coverage)", "yr", 0.5, G::SystemSocio, E, true, pos);
  add(P::farmer_profit_sensitivity, "farmer_profit_sensitivity", "Snstty. Farmers - profit", "entry/exit responsiveness of farmers to expected profit", "1/yr", 0.15, G::SystemSocio, E, true, pos);
  add(P::farmer_price_sensitivity, "farmer_price_sensitivity", "Snstty. Farmers - prices", "herd-size response to the breeding price payback", "-", 1.0, G::SystemSocio, E, true, pos);
  add(P::farmer_expectation_delay, "farmer_expectation_delay", "DTFA expectations", "time for farmers to adjust profit expectations", "yr", 1.0, G::SystemSocio, E, true, pos);
  add(P::farmer_target_delay, "farmer_target_delay", "DTFA targets", "time for farmers to close the gap to their desired herd", "yr", 3.0, G::SystemSocio, E, true, pos);

  add(P::bd_threshold_herbage, "bd_threshold_herbage", "BD threshold herbage", "bulk density above which herbage does not grow", "g/cm3", 1.82, G::SystemEnv, B, true, pos);
  add(P::initial_porosity, "initial_porosity", "Initial topsoil porosity", "porosity of the undegraded topsoil", "-", 0.40, G::SystemEnv, B, true, Bounds{0.01, 0.99});
  add(P::particle_density, "particle_density", "Particle density", "density of soil mineral particles", "g/cm3", 2.65, G::SystemEnv, B, false, pos);
  add(P::rock_density, "rock_density", "Parent rock density", "bulk density reached when soil runs out", "g/cm3", 2.65, G::SystemEnv, B, false, pos);
  add(P::swc_field_capacity, "swc_field_capacity", "SWC field capacity", "volumetric soil water content at field capacity", "mm/mm", 0.25, G::SystemEnv, B, true, unit);
  add(P::wilting_ratio, "wilting_ratio", "Wilting ratio", "wilting-point water content as a fraction of field capacity", "-", 0.40, G::SystemEnv, B, true, Bounds{0.0, 0.95});
  add(P::soil_intake_capacity, "soil_intake_capacity", "Soil field capacity", "rain energy, as equivalent depth, the wet soil absorbs before saturation runoff", "mm", 20.0, G::SystemEnv, B, true, pos);
  add(P::gh_growth_rate, "gh_growth_rate", "GH pot. growth rate", "potential growth rate of green herbage", "kg DM/ha/yr", 6000.0, G::SystemEnv, B, true, pos);
  add(P::gh_max, "gh_max", "Max. green herbage", "green herbage mass at which growth stops", "kg DM/ha", 3000.0, G::SystemEnv, B, true, pos);
  add(P::gh_senescence_rate, "gh_senescence_rate", "GH senescence rate", "senescence rate of green herbage on dry soil", "1/yr", 4.0, G::SystemEnv, B, true, pos);
  add(P::dh_decay_rate, "dh_decay_rate", "DH decaying rate", "decay rate of dry herbage", "1/yr", 1.5, G::SystemEnv, B, true, pos);
  add(P::intake_half_saturation, "intake_half_saturation", "Herbage half-intake mass", "herbage mass at which grazing intake is half its maximum", "kg DM/ha", 800.0, G::SystemEnv, B, true, pos);
  add(P::runoff_dbs_mean, "runoff_dbs_mean", "Av. Runoff DBS", "mean runoff coefficient of dry and bare soil", "-", 0.35, G::SystemEnv, B, true, unit);
  add(P::runoff_dbs_cv, "runoff_dbs_cv", "CV Runoff DBS", "coefficient of variation of the dry-bare-soil runoff coefficient", "-", 0.30, G::SystemEnv, B, true, pos);
  add(P::canopy_runoff_reduction, "canopy_runoff_reduction", "Canopy runoff reduction", "fractional runoff reduction under full canopy", "-", 0.70, G::SystemEnv, B, true, unit);
  add(P::canopy_protection, "canopy_protection", "Canopy erosion protection", "fractional erosion reduction under full canopy", "-", 0.90, G::SystemEnv, B, true, unit);
  add(P::canopy_extinction, "canopy_extinction", "Canopy extinction coef.", "canopy cover gained per unit standing herbage", "ha/kg DM", 0.002, G::SystemEnv, B, true, pos);
  add(P::bare_evaporation_fraction, "bare_evaporation_fraction", "Bare soil evaporation", "actual to potential ET ratio of bare moist soil", "-", 0.30, G::SystemEnv, B, true, unit);
  add(P::erodibility, "erodibility", "Init. Topsoil erodibilty.", "topsoil erodibility factor", "-", 1.0, G::SystemEnv, B, true, pos);
  add(P::slope_length, "slope_length", "Hill-slope length", "length of the representative hill-slope", "m", 50.0, G::SystemEnv, B, false, pos);
  add(P::slope_gradient, "slope_gradient", "Hill-slope gradient", "gradient of the representative hill-slope", "m/m", 0.08, G::SystemEnv, B, false, pos);
  add(P::weathering_rate, "weathering_rate", "Weathering rate", "soil formation from parent rock", "mm/yr", 0.02, G::SystemEnv, B, true, pos);
  add(P::erosion_energy_exponent, "erosion_energy_exponent", "Erosion energy exponent", "exponent of rainfall energy in the erosion law", "-", 1.0, G::SystemEnv, B, false, pos);

  add(P::erosion_calibration, "erosion_calibration", "Erosion rate calibration", "scale of the erosion law", "mm/(mm*MJ/ha)", 0.0003, G::Calibration, B, true, pos);
  add(P::runoff_calibration, "runoff_calibration", "Runoff calibration", "scale of saturation runoff on wet soil", "-", 1.0, G::Calibration, B, true, pos);
  add(P::canopy_cover_calibration, "canopy_cover_calibration", "Canopy cover calibration", "bare area created per unit stocking rate", "ha/LU", 0.2, G::Calibration, B, true, pos);
  add(P::feed_willingness_calibration, "feed_willingness_calibration", "Feed willingness calibration", "value/cost ratio at which half of the energy gap is supplemented", "-", 0.6, G::Calibration, E, true, pos);
  add(P::feed_willingness_steepness, "feed_willingness_steepness", "Feed willingness steepness", "steepness of the supplementation response", "-", 4.0, G::Calibration, E, false, pos);
  add(P::herd_response_calibration, "herd_response_calibration", "Herd response calibration", "response of the desired herd to the expected operating margin", "-", 1.0, G::Calibration, E, true, pos);

  add(P::initial_soil_moisture, "initial_soil_moisture", "Initial soil moisture", "stored soil water at t = 0", "mm", 30.0, G::InitialStock, B, false, pos);
  add(P::initial_soil_depth, "initial_soil_depth", "Initial soil depth", "soil depth at t = 0; reference depth of the bulk density profile", "mm", 250.0, G::InitialStock, B, false, pos);
  add(P::initial_green_herbage, "initial_green_herbage", "Initial green herbage", "green herbage mass at t = 0", "kg DM/ha", 300.0, G::InitialStock, B, true, pos);
  add(P::initial_dry_herbage, "initial_dry_herbage", "Initial dry herbage", "dry herbage mass at t = 0", "kg DM/ha", 500.0, G::InitialStock, B, false, pos);
  add(P::initial_farmers, "initial_farmers", "Initial No. farmers", "active farms at t = 0", "frm", 32.0, G::InitialStock, E, true, pos);
  add(P::initial_breeding_females, "initial_breeding_females", "Initial breeding females", "breeding herd of the area at t = 0", "head", 2560.0, G::InitialStock, E, true, pos);
  add(P::initial_young_females, "initial_young_females", "Initial young females", "replacement females at t = 0", "head", 768.0, G::InitialStock, E, true, pos);
  add(P::initial_output_inventory, "initial_output_inventory", "Initial unsold output", "traders' output inventory at t = 0", "kg", 1.5e6, G::InitialStock, E, false, pos);
  add(P::initial_old_inventory, "initial_old_inventory", "Initial unsold old females", "traders' old-female inventory at t = 0", "head", 750.0, G::InitialStock, E, false, pos);
  add(P::initial_feed_inventory, "initial_feed_inventory", "Initial undelivered feed", "traders' feed inventory at t = 0", "kg", 2.5e6, G::InitialStock, E, false, pos);
  add(P::initial_breeding_inventory, "initial_breeding_inventory", "Initial unsold breeding f.", "traders' breeding-female inventory at t = 0", "head", 750.0, G::InitialStock, E, false, pos);
  // clang-format on
  return r;
}

} // namespace detail

/// The shipped default parameter definitions, in canonical order.
inline const std::shared_ptr<const std::vector<ParamDef>>& default_defs() {
  static const auto defs = std::make_shared<const std::vector<ParamDef>>(detail::build_registry());
  return defs;
}

/// A named, validated parameter vector. Values are aligned with `defs()`;
/// the model reads them through the `P` slots.
class ParamSet {
public:
  ParamSet(std::shared_ptr<const std::vector<ParamDef>> defs, std::vector<double> values)
      : defs_(std::move(defs)), values_(std::move(values)) {
    if (!defs_ || defs_->size() != values_.size())
      throw ValidationError("parameter values do not match definitions");
  }

  static ParamSet defaults() {
    const auto& defs = default_defs();
    std::vector<double> v;
    v.reserve(defs->size());
    for (const auto& d : *defs) v.push_back(d.default_value);
    return ParamSet(defs, std::move(v));
  }

  double operator[](P slot) const noexcept { return values_[static_cast<std::size_t>(slot)]; }
  double operator[](std::size_t i) const noexcept { return values_[i]; }

  std::size_t size() const noexcept { return values_.size(); }
  const std::vector<ParamDef>& defs() const noexcept { return *defs_; }
  const std::shared_ptr<const std::vector<ParamDef>>& shared_defs() const noexcept { return defs_; }
  std::span<const double> values() const noexcept { return values_; }

  std::optional<std::size_t> find(std::string_view id) const {
    for (std::size_t i = 0; i < defs_->size(); ++i)
      if ((*defs_)[i].id == id) return i;
    return std::nullopt;
  }

  std::size_t index_of(std::string_view id) const {
    if (auto i = find(id)) return *i;
    throw ValidationError("unknown parameter id '" + std::string(id) + "'");
  }

  double value(std::string_view id) const { return values_[index_of(id)]; }

  ParamSet with_value(std::string_view id, double v) const { return with_value(index_of(id), v); }
  ParamSet with_value(P slot, double v) const { return with_value(static_cast<std::size_t>(slot), v); }
  ParamSet with_value(std::size_t i, double v) const {
    ParamSet out = *this;
    out.values_.at(i) = v;
    return out;
  }

  /// Copy with a different SA flag on one definition.
  ParamSet with_vary(std::string_view id, bool vary) const {
    auto defs = *defs_;
    defs[index_of(id)].vary_in_sa = vary;
    return ParamSet(std::make_shared<const std::vector<ParamDef>>(std::move(defs)), values_);
  }

  std::vector<std::size_t> varied_indices() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < defs_->size(); ++i)
      if ((*defs_)[i].vary_in_sa) out.push_back(i);
    return out;
  }

  friend bool operator==(const ParamSet& a, const ParamSet& b) {
    return a.values_ == b.values_ && (a.defs_ == b.defs_ || *a.defs_ == *b.defs_);
  }

private:
  std::shared_ptr<const std::vector<ParamDef>> defs_;
  std::vector<double> values_;
};

/// Checks per-definition invariants; `strict` additionally enforces the
/// shipped set's shape (87 parameters, 11 initial stocks, 70 varied).
inline void validate(const ParamSet& ps, bool strict = false) {
  const auto& defs = ps.defs();
  std::unordered_set<std::string_view> seen;
  for (std::size_t i = 0; i < defs.size(); ++i) {
    const auto& d = defs[i];
    if (!seen.insert(d.id).second) throw ValidationError("duplicate parameter id '" + d.id + "'");
    const double v = ps[i];
    if (!std::isfinite(v)) throw ValidationError("parameter '" + d.id + "' is not finite");
    if (!std::isfinite(d.default_value))
      throw ValidationError("parameter '" + d.id + "' has a non-finite default");
    if (d.hard_bounds) {
      const auto [lo, hi] = *d.hard_bounds;
      if (lo > hi) throw ValidationError("parameter '" + d.id + "' has inverted bounds");
      if (v < lo || v > hi)
        throw ValidationError("parameter '" + d.id + "' = " + std::to_string(v) + " outside hard bounds [" +
                              std::to_string(lo) + ", " + std::to_string(hi) + "]");
      if (d.default_value < lo || d.default_value > hi)
        throw ValidationError("default of '" + d.id + "' outside its hard bounds");
    }
  }
  if (strict) {
    const auto stocks = std::count_if(defs.begin(), defs.end(),
                                      [](const ParamDef& d) { return d.group == Group::InitialStock; });
    const auto varied = std::count_if(defs.begin(), defs.end(), [](const ParamDef& d) { return d.vary_in_sa; });
    if (defs.size() != kParamCount)
      throw ValidationError("expected " + std::to_string(kParamCount) + " parameters, found " +
                            std::to_string(defs.size()));
    if (static_cast<std::size_t>(stocks) != kInitialStockCount)
      throw ValidationError("expected 11 initial stocks, found " + std::to_string(stocks));
    if (static_cast<std::size_t>(varied) != kVariedCount)
      throw ValidationError("expected 70 varied parameters, found " + std::to_string(varied));
  }
}

/// Sampling ranges of the varied parameters.
struct ParamSpace {
  std::vector<std::size_t> indices;  // positions in the ParamSet
  std::vector<std::string> ids;
  std::vector<double> lo;
  std::vector<double> hi;
  double fraction = 0.30;

  std::size_t dim() const noexcept { return indices.size(); }
};

/// Ranges value * [1 - f, 1 + f] intersected with hard bounds, centred on
/// the set's current values. A zero value falls back to its hard bounds
/// when it has them.
inline ParamSpace build_space(const ParamSet& ps, double fraction = 0.30) {
  if (!(fraction > 0.0 && fraction < 1.0))
    throw ValidationError("perturbation fraction must lie in (0, 1)");
  ParamSpace space;
  space.fraction = fraction;
  const auto& defs = ps.defs();
  for (std::size_t i : ps.varied_indices()) {
    const auto& d = defs[i];
    const double v = ps[i];
    double lo = std::min(v * (1.0 - fraction), v * (1.0 + fraction));
    double hi = std::max(v * (1.0 - fraction), v * (1.0 + fraction));
    if (v == 0.0) {
      if (!d.hard_bounds)
        throw ValidationError("parameter '" + d.id + "' has value 0: multiplicative range is empty");
      lo = d.hard_bounds->lo;
      hi = d.hard_bounds->hi;
    }
    if (d.hard_bounds) {
      lo = std::max(lo, d.hard_bounds->lo);
      hi = std::min(hi, d.hard_bounds->hi);
    }
    if (!(lo < hi)) throw ValidationError("parameter '" + d.id + "' has a degenerate sampling range");
    space.indices.push_back(i);
    space.ids.push_back(d.id);
    space.lo.push_back(lo);
    space.hi.push_back(hi);
  }
  return space;
}

/// New set with the varied coordinates replaced by `x`.
inline ParamSet apply_scenario(const ParamSet& ps, const ParamSpace& space, std::span<const double> x) {
  if (x.size() != space.dim())
    throw ValidationError("scenario has " + std::to_string(x.size()) + " coordinates, space has " +
                          std::to_string(space.dim()));
  std::vector<double> values(ps.values().begin(), ps.values().end());
  for (std::size_t j = 0; j < x.size(); ++j) {
    if (!(x[j] >= space.lo[j] && x[j] <= space.hi[j]))
      throw ValidationError("coordinate " + std::to_string(j) + " ('" + space.ids[j] + "') = " +
                            std::to_string(x[j]) + " outside its range");
    values[space.indices[j]] = x[j];
  }
  return ParamSet(ps.shared_defs(), std::move(values));
}

inline std::vector<double> scenario_of(const ParamSet& ps, const ParamSpace& space) {
  std::vector<double> x;
  x.reserve(space.dim());
  for (std::size_t i : space.indices) x.push_back(ps[i]);
  return x;
}

} // namespace rangeland
