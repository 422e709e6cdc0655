#include "oracles.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

#include "storval/config.hpp"

namespace storval::testing {

Problem toy_problem() {
  Problem p;
  p.price.day_ahead = {30.0, 50.0, 70.0};
  p.price.ar_coefficient = 0.48;
  p.price.innovation_std = 5.0;
  p.price.spread = 1.0;
  p.battery.capacity = 1.0;
  p.battery.speed_fraction = 0.4;
  p.utility.risk_aversion = 0.03;
  return p;
}

MarkovChain toy_chain(const Problem& problem) { return build_chain(problem.price, 2); }

Problem default_problem() { return to_problem(RunConfig{}); }

namespace {

// Immediate cost of moving stored energy by d (after leakage) at the given prices.
double move_cost(double d, const StageData& s) {
  if (d >= 0.0) return s.ask * d / s.charge_eff;
  return s.bid * d / s.discharge_eff;
}

}  // namespace

double deterministic_profit(const std::vector<BidAsk>& prices, const BatterySpec& battery, double energy_step) {
  if (battery.leakage != 0.0) throw std::invalid_argument("deterministic_profit needs zero leakage");
  const auto n = static_cast<long>(std::llround(battery.capacity / energy_step));
  const auto up = static_cast<long>(std::floor(battery.charge_eff * battery.max_charge() / energy_step + 1e-9));
  const auto down =
      static_cast<long>(std::floor(battery.discharge_eff * battery.max_discharge() / energy_step + 1e-9));
  std::vector<double> next(static_cast<std::size_t>(n + 1), 0.0), cur(next.size());
  for (auto t = static_cast<long>(prices.size()) - 1; t >= 0; --t) {
    const StageData s = make_stage_data(battery, static_cast<int>(t + 1), 0, prices[static_cast<std::size_t>(t)]);
    for (long k = 0; k <= n; ++k) {
      double best = -std::numeric_limits<double>::infinity();
      for (long k2 = std::max(0L, k - down); k2 <= std::min(n, k + up); ++k2) {
        const double d = static_cast<double>(k2 - k) * energy_step;
        best = std::max(best, next[static_cast<std::size_t>(k2)] - move_cost(d, s));
      }
      cur[static_cast<std::size_t>(k)] = best;
    }
    std::swap(cur, next);
  }
  return next[0];
}

TreeOracle::TreeOracle(const Problem& problem, const MarkovChain& chain, double step)
    : problem_(problem),
      chain_(chain),
      data_(chain_stage_data(problem, chain)),
      step_(step),
      rho_(problem.utility.risk_aversion),
      grid_size_(static_cast<std::size_t>(std::llround(problem.battery.capacity / step)) + 1) {
  memo_.resize(static_cast<std::size_t>(chain.horizon));
  for (int t = 0; t < chain.horizon; ++t) {
    memo_[static_cast<std::size_t>(t)].assign(
        chain.node_count(t), std::vector<double>(grid_size_, std::numeric_limits<double>::quiet_NaN()));
  }
}

TreeOracle::Choice TreeOracle::solve_successor(int stage, std::size_t node, double energy) const {
  const StageData& s = data_.at(static_cast<std::size_t>(stage)).at(node);
  const double start = s.leak_factor * energy;
  const double lo = std::max(0.0, start - s.discharge_eff * s.u_max_discharge);
  const double hi = std::min(s.capacity, start + s.charge_eff * s.u_max_charge);

  Choice best{std::numeric_limits<double>::infinity(), 0.0};
  auto consider = [&](double target, std::size_t grid_index, bool on_grid) {
    const double d = target - start;
    double k;
    if (stage == chain_.horizon) {
      k = 1.0 / rho_;
    } else if (on_grid) {
      k = grid_factor(stage, node, grid_index);
    } else {
      k = factor(stage, node, target);
    }
    const double f = std::exp(rho_ * move_cost(d, s)) * k;
    if (f < best.factor) best = {f, d};
  };
  consider(lo, 0, false);
  consider(hi, 0, false);
  if (start > lo && start < hi) consider(start, 0, false);
  const auto first = static_cast<std::size_t>(std::ceil(lo / step_ - 1e-9));
  for (std::size_t k = first; k < grid_size_; ++k) {
    const double target = static_cast<double>(k) * step_;
    if (target > hi + 1e-12) break;
    consider(target, k, true);
  }
  return best;
}

double TreeOracle::grid_factor(int stage, std::size_t node, std::size_t index) const {
  double& slot = memo_[static_cast<std::size_t>(stage)][node][index];
  if (std::isnan(slot)) {
    const double energy = static_cast<double>(index) * step_;
    double sum = 0.0;
    const auto row = chain_.transition_row(stage, node);
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (row[i] == 0.0) continue;
      sum += row[i] * solve_successor(stage + 1, i, energy).factor;
    }
    slot = sum;
  }
  return slot;
}

double TreeOracle::factor(int stage, std::size_t node, double energy) const {
  const double scaled = energy / step_;
  const double rounded = std::round(scaled);
  if (std::abs(scaled - rounded) < 1e-9 && rounded >= 0.0 && rounded < static_cast<double>(grid_size_)) {
    return grid_factor(stage, node, static_cast<std::size_t>(rounded));
  }
  double sum = 0.0;
  const auto row = chain_.transition_row(stage, node);
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (row[i] == 0.0) continue;
    sum += row[i] * solve_successor(stage + 1, i, energy).factor;
  }
  return sum;
}

double TreeOracle::value() const {
  const State x0 = problem_.initial_state();
  return (1.0 - rho_ * excess_cost(0, 0, x0)) / rho_;
}

double TreeOracle::best_energy_change(int stage, std::size_t node, double energy) const {
  return solve_successor(stage, node, energy).energy_change;
}

}  // namespace storval::testing
