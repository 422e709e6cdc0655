#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "storval/price_model.hpp"

namespace storval {

/// Physical battery. Charging u >= 0 MWh adds charge_eff * u to storage;
/// selling u >= 0 MWh removes discharge_eff * u. Stored energy decays by the
/// factor (1 - leakage) per stage.
struct BatterySpec {
  double capacity = 1.0;        // MWh
  double speed_fraction = 0.4;  // alpha: default speed bound = alpha * capacity
  double charge_eff = 0.95;     // c+
  double discharge_eff = 1.05;  // c-
  double leakage = 0.0;
  std::optional<double> max_charge_override;
  std::optional<double> max_discharge_override;

  double max_charge() const noexcept { return max_charge_override.value_or(speed_fraction * capacity); }
  double max_discharge() const noexcept {
    return max_discharge_override.value_or(speed_fraction * capacity);
  }

  /// Requires 0 < c+ <= c-, capacity >= 0, 0 <= leakage <= 1, alpha in (0, 1].
  void validate() const;
};

/// Exponential utility v(z) = (1 - exp(-rho z)) / rho.
struct UtilitySpec {
  double risk_aversion = 0.03;
  double initial_wealth = 0.0;

  void validate() const;
};

/// Prices and battery coefficients for one (stage, node) pair.
struct StageData {
  int stage = 0;
  std::size_t node = 0;
  double bid = 0.0;
  double ask = 0.0;
  double leak_factor = 1.0;
  double charge_eff = 1.0;
  double discharge_eff = 1.0;
  double capacity = 0.0;
  double u_max_charge = 0.0;
  double u_max_discharge = 0.0;
};

StageData make_stage_data(const BatterySpec& battery, int stage, std::size_t node, BidAsk prices);

/// bid / c- <= ask / c+ (within 1e-12). When it holds, simultaneous buying
/// and selling is never profitable.
bool check_spread_condition(const StageData& stage);

/// Relaxed controls may buy and sell in the same stage. States are indexed
/// 0..T (index 0 is the initial state); controls are indexed 0..T-1 for
/// stages 1..T.
struct RelaxedTrajectory {
  std::vector<double> wealth;
  std::vector<double> energy;
  std::vector<double> charge;     // U-hat
  std::vector<double> discharge;  // U-check

  int horizon() const noexcept { return static_cast<int>(charge.size()); }
};

/// Complementary trajectory with a signed net control (positive = buy).
struct ComplementaryTrajectory {
  std::vector<double> wealth;
  std::vector<double> energy;
  std::vector<double> net_control;
};

/// Throws InfeasibleInput if the relaxed dynamics or bounds are violated.
void check_relaxed_feasible(const RelaxedTrajectory& relaxed, std::span<const BidAsk> prices,
                            const BatterySpec& battery, double initial_wealth);

/// Maps a relaxed trajectory onto a complementary one with the same energy
/// path and no lower wealth at any stage. Throws InfeasibleInput or
/// ConditionViolated (spread condition fails at some stage).
ComplementaryTrajectory recover_complementary(const RelaxedTrajectory& relaxed,
                                              std::span<const BidAsk> prices,
                                              const BatterySpec& battery, double initial_wealth);

/// Net control (buy > 0) equivalent to a relaxed pair at equal energy change.
double complementary_control(double charge, double discharge, double charge_eff,
                             double discharge_eff) noexcept;

/// Wealth below this is rejected by terminal_cost: exp(-rho w) stays finite.
double default_wealth_floor(double risk_aversion) noexcept;

/// Terminal cost -v(w) = (exp(-rho w) - 1) / rho. Throws OverflowGuard
/// below the wealth floor.
double terminal_cost(const UtilitySpec& utility, double wealth);
double terminal_cost(const UtilitySpec& utility, double wealth, double wealth_floor);

/// terminal_cost(w) + 1/rho = exp(-rho w) / rho, the terminal cost measured
/// from its infimum. Same OverflowGuard as terminal_cost.
double terminal_excess_cost(const UtilitySpec& utility, double wealth);

/// d/dw of terminal_cost: -exp(-rho w).
double terminal_cost_derivative(const UtilitySpec& utility, double wealth);

/// v(w) = (1 - exp(-rho w)) / rho.
double utility_of(const UtilitySpec& utility, double wealth);

}  // namespace storval
