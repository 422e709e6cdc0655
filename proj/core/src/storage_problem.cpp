#include "storval/storage_problem.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "storval/errors.hpp"

namespace storval {

namespace {

bool close(double a, double b, double tol = 1e-9) {
  return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace

void BatterySpec::validate() const {
  if (!(capacity >= 0.0)) fail(ErrorKind::InvalidArgument, "capacity must be >= 0");
  if (!(speed_fraction > 0.0 && speed_fraction <= 1.0)) {
    fail(ErrorKind::InvalidArgument, "speed fraction must lie in (0, 1]");
  }
  if (!(charge_eff > 0.0 && charge_eff <= discharge_eff)) {
    fail(ErrorKind::InvalidArgument, "efficiencies must satisfy 0 < c+ <= c-");
  }
  if (!(leakage >= 0.0 && leakage <= 1.0)) fail(ErrorKind::InvalidArgument, "leakage must lie in [0, 1]");
  if (!(max_charge() >= 0.0) || !(max_discharge() >= 0.0)) {
    fail(ErrorKind::InvalidArgument, "speed bounds must be >= 0");
  }
}

void UtilitySpec::validate() const {
  if (!(risk_aversion > 0.0)) fail(ErrorKind::InvalidArgument, "risk aversion must be > 0");
  if (!std::isfinite(initial_wealth)) fail(ErrorKind::InvalidArgument, "initial wealth must be finite");
}

StageData make_stage_data(const BatterySpec& battery, int stage, std::size_t node, BidAsk prices) {
  StageData d;
  d.stage = stage;
  d.node = node;
  d.bid = prices.bid;
  d.ask = prices.ask;
  d.leak_factor = 1.0 - battery.leakage;
  d.charge_eff = battery.charge_eff;
  d.discharge_eff = battery.discharge_eff;
  d.capacity = battery.capacity;
  d.u_max_charge = battery.max_charge();
  d.u_max_discharge = battery.max_discharge();
  return d;
}

bool check_spread_condition(const StageData& stage) {
  return stage.bid / stage.discharge_eff <= stage.ask / stage.charge_eff + 1e-12;
}

double complementary_control(double charge, double discharge, double charge_eff,
                             double discharge_eff) noexcept {
  const double energy_change = charge_eff * charge - discharge_eff * discharge;
  return energy_change >= 0.0 ? energy_change / charge_eff : energy_change / discharge_eff;
}

void check_relaxed_feasible(const RelaxedTrajectory& relaxed, std::span<const BidAsk> prices,
                            const BatterySpec& battery, double initial_wealth) {
  const auto T = relaxed.charge.size();
  if (relaxed.discharge.size() != T || relaxed.wealth.size() != T + 1 ||
      relaxed.energy.size() != T + 1 || prices.size() != T) {
    fail(ErrorKind::InfeasibleInput, "trajectory arrays have inconsistent lengths");
  }
  if (!close(relaxed.wealth[0], initial_wealth)) fail(ErrorKind::InfeasibleInput, "initial wealth mismatch");
  if (!close(relaxed.energy[0], 0.0)) fail(ErrorKind::InfeasibleInput, "initial energy must be 0");
  const double tol = 1e-9;
  for (std::size_t t = 0; t < T; ++t) {
    const double up = relaxed.charge[t];
    const double down = relaxed.discharge[t];
    const std::string at = " at stage " + std::to_string(t + 1);
    if (up < -tol || up > battery.max_charge() + tol) fail(ErrorKind::InfeasibleInput, "charge out of bounds" + at);
    if (down < -tol || down > battery.max_discharge() + tol) {
      fail(ErrorKind::InfeasibleInput, "discharge out of bounds" + at);
    }
    const double e = relaxed.energy[t + 1];
    if (e < -tol || e > battery.capacity + tol) fail(ErrorKind::InfeasibleInput, "energy out of bounds" + at);
    const double e_expected = (1.0 - battery.leakage) * relaxed.energy[t] + battery.charge_eff * up -
                              battery.discharge_eff * down;
    if (!close(e, e_expected)) fail(ErrorKind::InfeasibleInput, "energy dynamics violated" + at);
    const double w_expected = relaxed.wealth[t] - prices[t].ask * up + prices[t].bid * down;
    if (!close(relaxed.wealth[t + 1], w_expected)) fail(ErrorKind::InfeasibleInput, "wealth dynamics violated" + at);
  }
}

ComplementaryTrajectory recover_complementary(const RelaxedTrajectory& relaxed,
                                              std::span<const BidAsk> prices,
                                              const BatterySpec& battery, double initial_wealth) {
  check_relaxed_feasible(relaxed, prices, battery, initial_wealth);
  const auto T = relaxed.charge.size();
  for (std::size_t t = 0; t < T; ++t) {
    const auto stage = make_stage_data(battery, static_cast<int>(t + 1), 0, prices[t]);
    if (!check_spread_condition(stage)) {
      fail(ErrorKind::ConditionViolated, "bid/c- > ask/c+ at stage " + std::to_string(t + 1));
    }
  }

  ComplementaryTrajectory out;
  out.wealth.resize(T + 1);
  out.energy = relaxed.energy;
  out.net_control.resize(T);
  out.wealth[0] = initial_wealth;
  for (std::size_t t = 0; t < T; ++t) {
    const double u = complementary_control(relaxed.charge[t], relaxed.discharge[t], battery.charge_eff,
                                           battery.discharge_eff);
    out.net_control[t] = u;
    const double buy = std::max(u, 0.0);
    const double sell = std::max(-u, 0.0);
    out.wealth[t + 1] = out.wealth[t] - prices[t].ask * buy + prices[t].bid * sell;
  }
  return out;
}

double default_wealth_floor(double risk_aversion) noexcept { return -700.0 / risk_aversion; }

double terminal_cost(const UtilitySpec& utility, double wealth) {
  return terminal_cost(utility, wealth, default_wealth_floor(utility.risk_aversion));
}

double terminal_cost(const UtilitySpec& utility, double wealth, double wealth_floor) {
  if (!(wealth >= wealth_floor)) {
    fail(ErrorKind::OverflowGuard, "terminal wealth " + std::to_string(wealth) + " below floor " +
                                       std::to_string(wealth_floor));
  }
  const double rho = utility.risk_aversion;
  return std::expm1(-rho * wealth) / rho;
}

double terminal_excess_cost(const UtilitySpec& utility, double wealth) {
  const double floor = default_wealth_floor(utility.risk_aversion);
  if (!(wealth >= floor)) {
    fail(ErrorKind::OverflowGuard, "terminal wealth " + std::to_string(wealth) + " below floor " +
                                       std::to_string(floor));
  }
  return std::exp(-utility.risk_aversion * wealth) / utility.risk_aversion;
}

double terminal_cost_derivative(const UtilitySpec& utility, double wealth) {
  return -std::exp(-utility.risk_aversion * wealth);
}

double utility_of(const UtilitySpec& utility, double wealth) {
  return -std::expm1(-utility.risk_aversion * wealth) / utility.risk_aversion;
}

}  // namespace storval
