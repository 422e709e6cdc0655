#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "storval/errors.hpp"
#include "storval/storage_problem.hpp"

using namespace storval;

namespace {

StageData stage_with(double bid, double ask, double cp, double cm) {
  BatterySpec b;
  b.charge_eff = cp;
  b.discharge_eff = cm;
  return make_stage_data(b, 1, 0, {bid, ask});
}

// Random relaxed trajectory inside the energy box (rejection sampling per stage).
RelaxedTrajectory random_relaxed(std::mt19937_64& rng, const BatterySpec& b, int horizon, double x0) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  RelaxedTrajectory r;
  r.wealth.push_back(x0);
  r.energy.push_back(0.0);
  for (int t = 0; t < horizon; ++t) {
    const double e = r.energy.back();
    double ch = 0.0, dis = 0.0, next = e;
    for (int attempt = 0; attempt < 100; ++attempt) {
      ch = u01(rng) * b.max_charge();
      dis = u01(rng) * b.max_discharge();
      next = e + b.charge_eff * ch - b.discharge_eff * dis;
      if (next >= 0.0 && next <= b.capacity) break;
      ch = dis = 0.0;
      next = e;
    }
    r.charge.push_back(ch);
    r.discharge.push_back(dis);
    r.energy.push_back(next);
    r.wealth.push_back(0.0);
  }
  return r;
}

void fill_wealth(RelaxedTrajectory& r, const std::vector<BidAsk>& prices) {
  for (std::size_t t = 0; t < r.charge.size(); ++t) {
    r.wealth[t + 1] = r.wealth[t] - prices[t].ask * r.charge[t] + prices[t].bid * r.discharge[t];
  }
}

// Energy implied by the relaxed controls, to replace clamping drift.
void fill_energy(RelaxedTrajectory& r, const BatterySpec& b) {
  for (std::size_t t = 0; t < r.charge.size(); ++t) {
    r.energy[t + 1] = (1.0 - b.leakage) * r.energy[t] + b.charge_eff * r.charge[t] - b.discharge_eff * r.discharge[t];
  }
}

}  // namespace

TEST_CASE("spread condition examples") {
  CHECK(check_spread_condition(stage_with(49.0, 51.0, 0.95, 1.05)));
  CHECK(check_spread_condition(stage_with(50.0, 50.0, 1.0, 1.0)));
  CHECK(check_spread_condition(stage_with(-11.0, -9.0, 0.95, 1.05)));
  CHECK_FALSE(check_spread_condition(stage_with(-11.0, -10.9, 0.95, 1.05)));
  CHECK_FALSE(check_spread_condition(stage_with(60.0, 50.0, 1.0, 1.0)));
}

TEST_CASE("battery validation") {
  BatterySpec b;
  CHECK_NOTHROW(b.validate());
  b.charge_eff = 1.1;
  CHECK_THROWS_AS(b.validate(), Error);
  b = BatterySpec{};
  b.leakage = 1.5;
  CHECK_THROWS_AS(b.validate(), Error);
  b = BatterySpec{};
  b.speed_fraction = 0.0;
  CHECK_THROWS_AS(b.validate(), Error);
  UtilitySpec u;
  u.risk_aversion = 0.0;
  CHECK_THROWS_AS(u.validate(), Error);
}

TEST_CASE("complementary control of a simultaneous trade") {
  CHECK(complementary_control(1.0, 1.0, 0.95, 1.05) == doctest::Approx(-0.1 / 1.05).epsilon(1e-14));
  CHECK(complementary_control(0.3, 0.0, 0.95, 1.05) == doctest::Approx(0.3).epsilon(1e-14));
  CHECK(complementary_control(0.0, 0.2, 0.95, 1.05) == doctest::Approx(-0.2).epsilon(1e-14));
  // Energy balance: c+ u+ - c- u- equals the relaxed energy change.
  const double u = complementary_control(0.7, 0.2, 0.95, 1.05);
  const double balance = 0.95 * std::max(u, 0.0) - 1.05 * std::max(-u, 0.0);
  CHECK(balance == doctest::Approx(0.95 * 0.7 - 1.05 * 0.2).epsilon(1e-14));
}

TEST_CASE("already complementary trajectories are unchanged") {
  BatterySpec b;
  std::vector<BidAsk> prices{{49, 51}, {39, 41}, {59, 61}};
  RelaxedTrajectory r;
  r.wealth = {0.0, 0.0, 0.0, 0.0};
  r.energy = {0.0, 0.0, 0.0, 0.0};
  r.charge = {0.3, 0.2, 0.0};
  r.discharge = {0.0, 0.0, 0.1};
  fill_energy(r, b);
  fill_wealth(r, prices);
  const auto c = recover_complementary(r, prices, b, 0.0);
  CHECK(c.net_control[0] == doctest::Approx(0.3));
  CHECK(c.net_control[1] == doctest::Approx(0.2));
  CHECK(c.net_control[2] == doctest::Approx(-0.1));
  for (std::size_t t = 0; t < 4; ++t) {
    CHECK(c.wealth[t] == doctest::Approx(r.wealth[t]).epsilon(1e-12));
    CHECK(c.energy[t] == doctest::Approx(r.energy[t]).epsilon(1e-12));
  }
}

TEST_CASE("recovery dominates random relaxed trajectories") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> price(-20.0, 120.0);
  BatterySpec b;
  for (int draw = 0; draw < 1000; ++draw) {
    std::vector<BidAsk> prices;
    for (int t = 0; t < 5; ++t) {
      const double mid = price(rng);
      prices.push_back({mid - 1.0, mid + 1.0});
    }
    auto r = random_relaxed(rng, b, 5, 10.0);
    fill_wealth(r, prices);
    const auto c = recover_complementary(r, prices, b, 10.0);
    for (std::size_t t = 0; t < 5; ++t) {
      const double u = c.net_control[t];
      CHECK(u >= -b.max_discharge() - 1e-12);
      CHECK(u <= b.max_charge() + 1e-12);
      CHECK(c.energy[t + 1] == doctest::Approx(r.energy[t + 1]).epsilon(1e-12));
      CHECK(c.energy[t + 1] >= -1e-12);
      CHECK(c.energy[t + 1] <= b.capacity + 1e-12);
      const double next = c.wealth[t] - prices[t].ask * std::max(u, 0.0) + prices[t].bid * std::max(-u, 0.0);
      CHECK(c.wealth[t + 1] == doctest::Approx(next).epsilon(1e-12));
      CHECK(c.wealth[t + 1] >= r.wealth[t + 1] - 1e-9);
    }
  }
}

TEST_CASE("recovery rejects infeasible input and a broken spread") {
  BatterySpec b;
  std::vector<BidAsk> prices{{49, 51}, {49, 51}};
  RelaxedTrajectory r;
  r.wealth = {0.0, 0.0, 0.0};
  r.energy = {0.0, 0.0, 0.0};
  r.charge = {0.0, 0.0};
  r.discharge = {0.1, 0.0};  // sells from an empty battery
  fill_energy(r, b);
  fill_wealth(r, prices);
  try {
    recover_complementary(r, prices, b, 0.0);
    FAIL("expected InfeasibleInput");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::InfeasibleInput);
  }

  r.discharge = {0.0, 0.0};
  r.charge = {0.2, 0.0};
  fill_energy(r, b);
  std::vector<BidAsk> bad{{60, 50}, {49, 51}};
  fill_wealth(r, bad);
  try {
    recover_complementary(r, bad, b, 0.0);
    FAIL("expected ConditionViolated");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ConditionViolated);
  }
}

TEST_CASE("terminal cost values") {
  UtilitySpec u;
  u.risk_aversion = 0.03;
  CHECK(terminal_cost(u, 0.0) == 0.0);
  CHECK(terminal_cost(u, 100.0) == doctest::Approx((std::exp(-3.0) - 1.0) / 0.03).epsilon(1e-14));
  CHECK(terminal_cost(u, 100.0) == doctest::Approx(-31.67376).epsilon(1e-6));
  CHECK(terminal_excess_cost(u, 100.0) == doctest::Approx(std::exp(-3.0) / 0.03).epsilon(1e-14));
  CHECK(utility_of(u, 100.0) == doctest::Approx(-terminal_cost(u, 100.0)));
  CHECK_THROWS_AS(terminal_cost(u, default_wealth_floor(0.03) * 1.01), Error);
  CHECK_THROWS_AS(terminal_cost(u, -50.0, -10.0), Error);
}

TEST_CASE("terminal derivative matches central differences") {
  UtilitySpec u;
  for (double rho : {0.003, 0.03, 0.3}) {
    u.risk_aversion = rho;
    for (double w : {-40.0, -1.0, 0.0, 3.5, 60.0}) {
      const double h = 1e-4 / rho;
      const double fd = (terminal_excess_cost(u, w + h) - terminal_excess_cost(u, w - h)) / (2.0 * h);
      const double d = terminal_cost_derivative(u, w);
      CHECK(std::abs(fd - d) <= 1e-6 * std::abs(d));
    }
  }
}

TEST_CASE("terminal cost is convex") {
  UtilitySpec u;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> w(-100.0, 200.0);
  for (int k = 0; k < 500; ++k) {
    const double x = w(rng), y = w(rng);
    const double mid = terminal_cost(u, 0.5 * (x + y));
    CHECK(mid <= 0.5 * (terminal_cost(u, x) + terminal_cost(u, y)) + 1e-12);
  }
}
