#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <sstream>

#include "drivers.hpp"
#include "env.hpp"
#include "params.hpp"

namespace rangeland {

enum class Market : std::size_t { Output = 0, Old = 1, Feed = 2, Breeding = 3 };
inline constexpr std::size_t kMarketCount = 4;

constexpr std::size_t idx(Market m) noexcept { return static_cast<std::size_t>(m); }

/// Stocks of the farming area.
struct SocioState {
  double active_farmers = 0.0;    // frm
  double breeding_females = 0.0;  // head
  double young_females = 0.0;     // head
  std::array<double, kMarketCount> prices{};       // local prices
  std::array<double, kMarketCount> inventories{};  // traders' unsold/undelivered stocks
  std::array<double, kMarketCount> throughput{};   // traders' smoothed throughput, per yr
  double expected_profit = 0.0;  // farmers' smoothed profit, EUR/frm/yr
  double expected_margin = 0.0;  // farmers' smoothed operating margin
  double last_profit_rate = 0.0; // EUR/frm/yr of the previous step
  double last_margin = 0.0;
  double cumulative_profit = 0.0; // EUR, area total
};

/// Flows of one socio-economic step. Quantities are per step unless noted.
struct FlowReport {
  double output_supply = 0.0;  // kg
  double old_supply = 0.0;     // head
  double feed_demand = 0.0;    // kg
  double feed_delivered = 0.0; // kg
  double breeding_demand_internal = 0.0;  // head (ongoing purchases + entrants)
  double breeding_supply_internal = 0.0;  // head (ongoing sales + exits)
  double breeding_bought = 0.0;  // head, ongoing purchases delivered
  double breeding_sold = 0.0;    // head, ongoing sales
  std::array<double, kMarketCount> external_in{};   // per step
  std::array<double, kMarketCount> external_out{};  // per step
  double revenue = 0.0;
  double costs = 0.0;
  double profit_this_step = 0.0;  // EUR, area total
  double profit_per_farmer_rate = 0.0;  // EUR/frm/yr
  double stocking_rate = 0.0;     // LU/ha
  double total_lu = 0.0;
  double attainment = 1.0;
  double farmer_rate = 0.0;       // frm/yr
};

/// Coefficients of one market.
struct MarketParams {
  double default_flow = 1.0;   // external flow at world price, per yr
  double elasticity = 1.0;     // trader responsiveness
  double price_delay = 0.25;   // yr
  double target_delay = 0.5;   // yr; also inventory coverage
};

struct MarketFlows {
  double delivered_local = 0.0;
  double external_in = 0.0;
  double external_out = 0.0;
};

struct MarketState {
  double price;
  double inventory;
  double throughput;
};

namespace socio_detail {
inline constexpr double kOldPriceRatio = 0.45;  // old-female price relative to breeding-female price
inline constexpr double kMaxPriceRatio = 100.0;
inline constexpr double kNoFarmers = 1e-9;
inline constexpr double kMarginWillingness = 0.5;
} // namespace socio_detail

/// One trader-mediated market step. Local supply and demand are rates per
/// year; external flows respond to the local/world price ratio; the price
/// moves against the projected inventory gap.
inline MarketState step_market(const MarketState& m, double local_supply, double local_demand, double world_price,
                               const MarketParams& mp, double dt, MarketFlows& out) {
  using namespace socio_detail;
  const double ratio = std::clamp(m.price / world_price, 1.0 / kMaxPriceRatio, kMaxPriceRatio);
  const double lift = std::exp(mp.elasticity * std::log(ratio));
  const double ext_in = mp.default_flow * lift;
  const double ext_out = mp.default_flow / lift;
  const double inflow = local_supply + ext_in;
  const double wanted = local_demand + ext_out;

  const double available = m.inventory + inflow * dt;
  out.delivered_local = std::min(local_demand * dt, available);
  out.external_in = ext_in * dt;
  out.external_out = std::min(ext_out * dt, available - out.delivered_local);

  MarketState n;
  n.inventory = std::max(0.0, available - out.delivered_local - out.external_out);
  n.throughput = m.throughput + (0.5 * (inflow + wanted) - m.throughput) * dt / mp.target_delay;
  const double target = n.throughput * mp.target_delay;
  const double projected = std::max(0.0, n.inventory + mp.target_delay * (inflow - wanted));
  const double r = target > 0.0 ? projected / target : 1.0;
  const double h = (1.0 - r) / (1.0 + r);
  n.price = std::clamp(m.price * std::exp(h * dt / mp.price_delay), world_price / kMaxPriceRatio,
                       world_price * kMaxPriceRatio);
  return n;
}

/// Farming-area model: farmers, herd, feed, four local markets, profits.
class SocioModel {
public:
  explicit SocioModel(const ParamSet& ps)
      : potential_(ps[P::potential_farmers]), area_per_farm_(ps[P::total_area] / ps[P::potential_farmers]),
        reference_herd_(ps[P::reference_herd]), target_output_(ps[P::target_output_per_lu]),
        energy_req_(ps[P::energy_intake_per_lu]), feed_energy_(ps[P::feed_energy_content]),
        young_lu_(ps[P::young_lu_equivalent]), cull_(ps[P::cull_rate]), rearing_(ps[P::rearing_time]),
        subsidy_(ps[P::subsidy_per_farmer]), intake_half_(ps[P::intake_half_saturation]),
        profit_sens_(ps[P::farmer_profit_sensitivity]), price_sens_(ps[P::farmer_price_sensitivity]),
        expectation_delay_(ps[P::farmer_expectation_delay]), herd_delay_(ps[P::farmer_target_delay]),
        willingness_half_(ps[P::feed_willingness_calibration]), willingness_k_(ps[P::feed_willingness_steepness]),
        herd_response_(ps[P::herd_response_calibration]) {
    const auto& defs = ps.defs();
    // Payback reference from the shipped defaults, so that price levels move herds.
    payback_ref_ = defs[static_cast<std::size_t>(P::wop_level)].default_value *
                   defs[static_cast<std::size_t>(P::target_output_per_lu)].default_value /
                   defs[static_cast<std::size_t>(P::wbfp_level)].default_value;
    for (std::size_t m = 0; m < kMarketCount; ++m) {
      markets_[m].elasticity = ps[P::trader_sensitivity];
      markets_[m].price_delay = ps[P::trader_expectation_delay];
      markets_[m].target_delay = ps[P::trader_target_delay];
    }
    markets_[idx(Market::Output)].default_flow = ps[P::default_market_output];
    markets_[idx(Market::Old)].default_flow = ps[P::default_market_breeding];
    markets_[idx(Market::Feed)].default_flow = ps[P::default_market_feed];
    markets_[idx(Market::Breeding)].default_flow = ps[P::default_market_breeding];
  }

  const MarketParams& market(Market m) const noexcept { return markets_[idx(m)]; }
  double area_per_farm() const noexcept { return area_per_farm_; }

  double total_lu(const SocioState& s) const noexcept { return s.breeding_females + young_lu_ * s.young_females; }

  double stocking_rate(const SocioState& s) const noexcept {
    if (s.active_farmers <= socio_detail::kNoFarmers) return 0.0;
    return total_lu(s) / (s.active_farmers * area_per_farm_);
  }

  /// Net entry (+) or exit (-) of farms per year.
  double farmer_flow(const SocioState& s, double opp_cost) const noexcept {
    const double x = (s.expected_profit - opp_cost) / opp_cost;
    const double headroom = x > 0.0 ? potential_ - s.active_farmers : s.active_farmers;
    return profit_sens_ * std::tanh(x) * std::max(0.0, headroom);
  }

  /// Share of the herbage energy gap farmers are willing to cover with feed.
  double feeding_willingness(const SocioState& s) const noexcept {
    const double value_per_mj = s.prices[idx(Market::Output)] * target_output_ / energy_req_;
    const double cost_per_mj = s.prices[idx(Market::Feed)] / feed_energy_;
    const double ratio = value_per_mj / cost_per_mj * (1.0 + socio_detail::kMarginWillingness * std::tanh(s.expected_margin));
    const double a = std::pow(ratio, willingness_k_);
    return a / (a + std::pow(willingness_half_, willingness_k_));
  }

  /// Energy the herd obtains from grazing in one step, MJ.
  double grazed_energy(const SocioState& s, double herbage_avail, double dt) const noexcept {
    const double a = std::max(0.0, herbage_avail);
    return total_lu(s) * energy_req_ * dt * a / (a + intake_half_);
  }

  /// Feed wanted in one step, kg.
  double feed_demand(const SocioState& s, double herbage_avail, double dt) const noexcept {
    const double gap = std::max(0.0, total_lu(s) * energy_req_ * dt - grazed_energy(s, herbage_avail, dt));
    return gap / feed_energy_ * feeding_willingness(s);
  }

  /// Breeding herd per farm farmers aim for.
  double desired_herd(const SocioState& s) const noexcept {
    const double payback =
        s.prices[idx(Market::Output)] * target_output_ / s.prices[idx(Market::Breeding)];
    const double z = herd_response_ * s.expected_margin + price_sens_ * std::log(payback / payback_ref_);
    return reference_herd_ * 2.0 / (1.0 + std::exp(-z));
  }

  struct Profit {
    double total;       // EUR this step
    double per_farmer;  // EUR/frm this step
  };

  /// Area ledger of one step at the state's local prices.
  Profit profit_step(const SocioState& s, const FlowReport& f, const DriverSample& d, double dt) const noexcept {
    const auto& p = s.prices;
    const double revenue = p[idx(Market::Output)] * f.output_supply + p[idx(Market::Old)] * f.old_supply +
                           p[idx(Market::Breeding)] * f.breeding_sold;
    const double costs = p[idx(Market::Feed)] * f.feed_delivered + p[idx(Market::Breeding)] * f.breeding_bought +
                         d.other_costs * s.active_farmers * dt;
    const double total = revenue - costs + subsidy_ * s.active_farmers * dt;
    const double per = s.active_farmers > socio_detail::kNoFarmers ? total / s.active_farmers : 0.0;
    return {total, per};
  }

  SocioState step(const SocioState& s0, double herbage_avail, const DriverSample& d, double dt, FlowReport& f) const {
    using namespace socio_detail;
    f = FlowReport{};
    SocioState s = s0;

    // expectations
    const double w = std::min(1.0, dt / expectation_delay_);
    s.expected_profit += (s0.last_profit_rate - s0.expected_profit) * w;
    s.expected_margin += (s0.last_margin - s0.expected_margin) * w;

    const double farmers = s.active_farmers;
    const bool has_farmers = farmers > kNoFarmers;
    f.total_lu = total_lu(s);
    f.stocking_rate = stocking_rate(s);
    f.farmer_rate = farmer_flow(s, d.opp_cost);
    const double d_farmers = std::clamp(f.farmer_rate * dt, -farmers, potential_ - farmers);

    // feed
    const std::array<double, kMarketCount> world{d.wop, kOldPriceRatio * d.wbfp, d.wsfp, d.wbfp};
    std::array<MarketFlows, kMarketCount> mf{};
    f.feed_demand = feed_demand(s, herbage_avail, dt);
    const auto feed = step_market({s.prices[2], s.inventories[2], s.throughput[2]}, 0.0, f.feed_demand / dt,
                                  world[2], markets_[2], dt, mf[2]);
    f.feed_delivered = mf[2].delivered_local;

    // production
    const double required = f.total_lu * energy_req_ * dt;
    const double supplied = grazed_energy(s, herbage_avail, dt) + f.feed_delivered * feed_energy_;
    f.attainment = required > 0.0 ? std::min(1.0, supplied / required) : 1.0;
    f.output_supply = s.breeding_females * target_output_ * f.attainment * dt;
    f.old_supply = cull_ * s.breeding_females * dt;

    // breeding trade: ongoing herd adjustment plus pro-rata herds of entrants and leavers
    const double herd_rate = has_farmers ? (farmers * desired_herd(s) - s.breeding_females) / herd_delay_ : 0.0;
    const double funding = std::max(0.0, s.expected_profit) * farmers / s.prices[3];
    const double buy = std::clamp(herd_rate, 0.0, funding) * dt;
    const double sell = std::min(std::max(0.0, -herd_rate) * dt, s.breeding_females);
    double exit_b = 0.0, exit_y = 0.0, entrant_demand = 0.0;
    if (d_farmers < 0.0 && has_farmers) {
      const double share = -d_farmers / farmers;
      exit_b = share * s.breeding_females;
      exit_y = share * s.young_females;
    } else if (d_farmers > 0.0) {
      entrant_demand = d_farmers * (has_farmers ? s.breeding_females / farmers : reference_herd_);
    }
    f.breeding_demand_internal = buy + entrant_demand;
    f.breeding_supply_internal = sell + exit_b + exit_y;
    const auto breeding = step_market({s.prices[3], s.inventories[3], s.throughput[3]},
                                      f.breeding_supply_internal / dt, f.breeding_demand_internal / dt, world[3],
                                      markets_[3], dt, mf[3]);
    const double filled = f.breeding_demand_internal > 0.0 ? mf[3].delivered_local / f.breeding_demand_internal : 0.0;
    f.breeding_bought = buy * filled;
    f.breeding_sold = sell;
    const double entrant_herd = entrant_demand * filled;

    const auto output = step_market({s.prices[0], s.inventories[0], s.throughput[0]}, f.output_supply / dt, 0.0,
                                    world[0], markets_[0], dt, mf[0]);
    const auto old = step_market({s.prices[1], s.inventories[1], s.throughput[1]}, f.old_supply / dt, 0.0, world[1],
                                 markets_[1], dt, mf[1]);
    for (std::size_t m = 0; m < kMarketCount; ++m) {
      f.external_in[m] = mf[m].external_in;
      f.external_out[m] = mf[m].external_out;
    }

    // ledger at the prices trade happened at
    const auto profit = profit_step(s, f, d, dt);
    f.profit_this_step = profit.total;
    f.revenue = s.prices[0] * f.output_supply + s.prices[1] * f.old_supply + s.prices[3] * f.breeding_sold;
    f.costs = f.revenue + subsidy_ * farmers * dt - profit.total;
    f.profit_per_farmer_rate = has_farmers ? profit.per_farmer / dt : 0.0;
    const double operating_revenue = s.prices[0] * f.output_supply + s.prices[1] * f.old_supply;
    const double operating =
        operating_revenue - s.prices[2] * f.feed_delivered - (d.other_costs - subsidy_) * farmers * dt;

    SocioState n = s;
    n.prices = {output.price, old.price, feed.price, breeding.price};
    n.inventories = {output.inventory, old.inventory, feed.inventory, breeding.inventory};
    n.throughput = {output.throughput, old.throughput, feed.throughput, breeding.throughput};
    n.breeding_females = s.breeding_females +
                         (s.young_females / rearing_ - cull_ * s.breeding_females) * dt + f.breeding_bought - sell -
                         exit_b + entrant_herd;
    n.young_females = s.young_females + (cull_ * s.breeding_females - s.young_females / rearing_) * dt - exit_y;
    n.breeding_females = std::max(0.0, n.breeding_females);
    n.young_females = std::max(0.0, n.young_females);
    n.active_farmers = std::clamp(farmers + d_farmers, 0.0, potential_);
    n.last_profit_rate = f.profit_per_farmer_rate;
    n.last_margin = operating_revenue > 0.0 ? std::clamp(operating / operating_revenue, -2.0, 1.0) : -1.0;
    n.cumulative_profit = s.cumulative_profit + profit.total;
    check(n, f);
    return n;
  }

  void check(const SocioState& s, const FlowReport& f) const {
    bool ok = std::isfinite(s.active_farmers) && s.active_farmers >= 0.0 && s.active_farmers <= potential_ &&
              std::isfinite(s.breeding_females) && s.breeding_females >= 0.0 && std::isfinite(s.young_females) &&
              s.young_females >= 0.0 && std::isfinite(s.expected_profit) && std::isfinite(s.expected_margin) &&
              std::isfinite(f.profit_this_step) && std::isfinite(f.stocking_rate) && f.stocking_rate >= 0.0;
    for (std::size_t m = 0; m < kMarketCount; ++m)
      ok = ok && std::isfinite(s.prices[m]) && s.prices[m] > 0.0 && std::isfinite(s.inventories[m]) &&
           s.inventories[m] >= 0.0;
    if (!ok) {
      std::ostringstream msg;
      msg << "socio-economic invariant broken: farmers=" << s.active_farmers << " breeding=" << s.breeding_females
          << " young=" << s.young_females << " prices=(" << s.prices[0] << "," << s.prices[1] << "," << s.prices[2]
          << "," << s.prices[3] << ") profit=" << f.profit_this_step;
      throw InvariantError(msg.str());
    }
  }

  SocioState initial_state(const ParamSet& ps, const DriverSample& d0) const {
    SocioState s;
    s.active_farmers = std::min(ps[P::initial_farmers], potential_);
    s.breeding_females = ps[P::initial_breeding_females];
    s.young_females = ps[P::initial_young_females];
    s.prices = {d0.wop, socio_detail::kOldPriceRatio * d0.wbfp, d0.wsfp, d0.wbfp};
    s.inventories = {ps[P::initial_output_inventory], ps[P::initial_old_inventory], ps[P::initial_feed_inventory],
                     ps[P::initial_breeding_inventory]};
    for (std::size_t m = 0; m < kMarketCount; ++m) s.throughput[m] = markets_[m].default_flow;
    s.expected_profit = d0.opp_cost;
    s.last_profit_rate = d0.opp_cost;
    return s;
  }

private:
  double potential_, area_per_farm_, reference_herd_, target_output_, energy_req_, feed_energy_;
  double young_lu_, cull_, rearing_, subsidy_, intake_half_;
  double profit_sens_, price_sens_, expectation_delay_, herd_delay_;
  double willingness_half_, willingness_k_, herd_response_;
  double payback_ref_ = 1.0;
  std::array<MarketParams, kMarketCount> markets_{};
};

// Free-function forms.

inline double farmer_flow(const SocioState& s, double opp_cost, const ParamSet& ps) {
  return SocioModel(ps).farmer_flow(s, opp_cost);
}

inline double feed_demand(const SocioState& s, double herbage_avail, const ParamSet& ps, double dt) {
  return SocioModel(ps).feed_demand(s, herbage_avail, dt);
}

/// Price after one market step with constant local flows.
inline double local_price_update(double price, double supply_rate, double demand_rate, double inventory,
                                 double throughput, double world_price, const MarketParams& mp, double dt) {
  MarketFlows out;
  return step_market({price, inventory, throughput}, supply_rate, demand_rate, world_price, mp, dt, out).price;
}

inline SocioModel::Profit profit_step(const SocioState& s, const FlowReport& f, const DriverSample& d,
                                      const ParamSet& ps, double dt) {
  return SocioModel(ps).profit_step(s, f, d, dt);
}

inline std::pair<SocioState, FlowReport> step_socio(const SocioState& s, double herbage_avail, const DriverSample& d,
                                                    const ParamSet& ps, double dt) {
  FlowReport f;
  SocioState n = SocioModel(ps).step(s, herbage_avail, d, dt, f);
  return {n, f};
}

} // namespace rangeland
