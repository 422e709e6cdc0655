#include "storval/stage_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "storval/errors.hpp"
#include "storval/small_lp.hpp"

namespace storval {

namespace {

// Fixed row layout of the successor LP in z = (charge, discharge, theta).
enum RowIndex : int {
  kChargeLow = 0,
  kDischargeLow = 1,
  kFloor = 2,
  kChargeHigh = 3,
  kDischargeHigh = 4,
  kEnergyLow = 5,
  kEnergyHigh = 6,
  kFirstCut = 7,
};

constexpr std::array<int, 3> kStartBasis{kChargeLow, kDischargeLow, kFloor};

void check_incoming(const State& incoming, const StageData& stage) {
  const double tol = 1e-9 * std::max(1.0, stage.capacity);
  if (!(incoming.energy >= -tol && incoming.energy <= stage.capacity + tol)) {
    fail(ErrorKind::Infeasible, "incoming energy " + std::to_string(incoming.energy) + " outside [0, " +
                                    std::to_string(stage.capacity) + "]");
  }
  if (!std::isfinite(incoming.wealth)) fail(ErrorKind::Infeasible, "incoming wealth is not finite");
}

// Rows of the successor LP with theta measured in units of `scale`.
std::vector<lp::Row> base_rows(const State& incoming, const StageData& stage, std::size_t n_cuts) {
  const double e = stage.leak_factor * incoming.energy;
  std::vector<lp::Row> rows;
  rows.reserve(kFirstCut + n_cuts + 2);
  rows.push_back({{1.0, 0.0, 0.0}, 0.0});
  rows.push_back({{0.0, 1.0, 0.0}, 0.0});
  rows.push_back({{0.0, 0.0, 1.0}, 0.0});
  rows.push_back({{-1.0, 0.0, 0.0}, -stage.u_max_charge});
  rows.push_back({{0.0, -1.0, 0.0}, -stage.u_max_discharge});
  rows.push_back({{stage.charge_eff, -stage.discharge_eff, 0.0}, -e});
  rows.push_back({{-stage.charge_eff, stage.discharge_eff, 0.0}, e - stage.capacity});
  return rows;
}

// Cut value at the state reached with zero controls.
double idle_value(const Cut& cut, const State& incoming, const StageData& stage) {
  return cut.intercept + cut.grad_wealth * incoming.wealth + cut.grad_energy * stage.leak_factor * incoming.energy;
}

// scale * theta >= intercept + g_m * (m - ask u1 + bid u2) + g_e * (e + c+ u1 - c- u2)
lp::Row cut_row(const Cut& cut, const State& incoming, const StageData& stage, double scale) {
  return {{(cut.grad_wealth * stage.ask - cut.grad_energy * stage.charge_eff) / scale,
           (-cut.grad_wealth * stage.bid + cut.grad_energy * stage.discharge_eff) / scale, 1.0},
          idle_value(cut, incoming, stage) / scale};
}

std::vector<lp::Row> successor_rows(const State& incoming, const StageData& stage, std::span<const Cut> cuts,
                                    double scale) {
  auto rows = base_rows(incoming, stage, cuts.size());
  for (const auto& cut : cuts) rows.push_back(cut_row(cut, incoming, stage, scale));
  return rows;
}

// Minimum of the cut over the control box (energy limits ignored): a lower
// bound on the cut's minimum over the feasible controls.
double box_min_value(const Cut& cut, const State& incoming, const StageData& stage) {
  const double per_charge = -cut.grad_wealth * stage.ask + cut.grad_energy * stage.charge_eff;
  const double per_discharge = cut.grad_wealth * stage.bid - cut.grad_energy * stage.discharge_eff;
  return idle_value(cut, incoming, stage) + std::min(0.0, per_charge) * stage.u_max_charge +
         std::min(0.0, per_discharge) * stage.u_max_discharge;
}

// Positive scale for theta, falling back to 1 when `v` is unusable.
double usable_scale(double v) { return v > 0.0 && std::isfinite(v) ? v : 1.0; }

// Among controls reaching objective <= value + slack, pick the smallest
// charge, then the smallest discharge. Falls back to `fallback` if a
// tie-break LP is declared infeasible by round-off.
Controls lexicographic_controls(std::vector<lp::Row> rows, double value, const Controls& fallback) {
  constexpr double kSlack = 1e-9;
  try {
    rows.push_back({{0.0, 0.0, -1.0}, -(value + kSlack * std::max(1.0, std::abs(value)))});
    const auto first = lp::minimize({1.0, 0.0, 0.0}, rows, kStartBasis);
    const double charge = std::max(first.point[0], 0.0);
    rows.push_back({{-1.0, 0.0, 0.0}, -(charge + kSlack * std::max(1.0, charge))});
    const auto second = lp::minimize({0.0, 1.0, 0.0}, rows, kStartBasis);
    return {charge, std::max(second.point[1], 0.0)};
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::Infeasible) throw;
    return fallback;
  }
}

Controls clamp_controls(const lp::Vec3& z, const StageData& stage) {
  return {std::clamp(z[0], 0.0, stage.u_max_charge), std::clamp(z[1], 0.0, stage.u_max_discharge)};
}

}  // namespace

constexpr double kRoundoffGap = 1e-13;

double cost_floor(const UtilitySpec& utility) noexcept { return -1.0 / utility.risk_aversion; }

State transition(const State& incoming, const StageData& stage, const Controls& controls) noexcept {
  State next;
  next.wealth = incoming.wealth - stage.ask * controls.charge + stage.bid * controls.discharge;
  next.energy = stage.leak_factor * incoming.energy + stage.charge_eff * controls.charge -
                stage.discharge_eff * controls.discharge;
  next.energy = std::clamp(next.energy, 0.0, stage.capacity);
  return next;
}

SuccessorSolution solve_successor(const State& incoming, const StageData& stage,
                                  std::span<const Cut> cuts, TieBreak tie_break) {
  check_incoming(incoming, stage);
  // theta is solved in units of a lower bound on the optimum (max over cuts
  // of their box minimum), so theta >= 1 and LP tolerances stay relative
  // however small the cost level is. Without a positive bound the idle cost
  // is the unit, with re-solves while the optimum is far below it.
  double idle = 0.0, lower = 0.0;
  for (const auto& cut : cuts) {
    idle = std::max(idle, idle_value(cut, incoming, stage));
    lower = std::max(lower, box_min_value(cut, incoming, stage));
  }
  double scale = lower > 0.0 && std::isfinite(lower) ? lower : usable_scale(idle);
  auto rows = successor_rows(incoming, stage, cuts, scale);
  auto sol = lp::minimize({0.0, 0.0, 1.0}, rows, kStartBasis);
  for (int attempt = 0; attempt < 4 && sol.point[2] > 0.0 && sol.point[2] < 1e-3; ++attempt) {
    scale = usable_scale(scale * sol.point[2]);
    rows = successor_rows(incoming, stage, cuts, scale);
    sol = lp::minimize({0.0, 0.0, 1.0}, rows, kStartBasis);
  }

  SuccessorSolution out;
  out.value = scale * sol.point[2];
  out.pivots = sol.pivots;
  double d_wealth = 0.0, d_energy = 0.0;
  for (std::size_t k = 0; k < cuts.size(); ++k) {
    const double y = sol.duals[kFirstCut + k];
    if (y == 0.0) continue;
    d_wealth += y * cuts[k].grad_wealth;
    d_energy += y * cuts[k].grad_energy;
  }
  d_energy += scale * (-sol.duals[kEnergyLow] + sol.duals[kEnergyHigh]);
  out.subgradient = {d_wealth, stage.leak_factor * d_energy};

  out.controls = clamp_controls(sol.point, stage);
  if (tie_break == TieBreak::Lexicographic) {
    out.controls = lexicographic_controls(std::move(rows), sol.point[2], out.controls);
  }
  out.next_state = transition(incoming, stage, out.controls);
  return out;
}

KelleyResult terminal_kelley_solve(const State& incoming, const StageData& stage,
                                   const UtilitySpec& utility, const KelleyOptions& options,
                                   TieBreak tie_break) {
  check_incoming(incoming, stage);
  if (!(options.tol > 0.0)) fail(ErrorKind::InvalidArgument, "Kelley tolerance must be > 0");

  // Tangent of the terminal cost at wealth w, as a cut on the next state.
  auto tangent = [&](double w) {
    Cut c;
    c.grad_wealth = terminal_cost_derivative(utility, w);
    c.intercept = terminal_excess_cost(utility, w) - c.grad_wealth * w;
    return c;
  };

  KelleyResult result;
  double best_objective = terminal_excess_cost(utility, incoming.wealth);
  double best_wealth = incoming.wealth;
  double scale = 1.0;
  lp::Solution sol;
  std::vector<Cut> tangents;
  std::vector<double> trial_wealths;
  std::vector<lp::Row> rows;
  while (true) {
    if (result.iterations >= options.max_iterations) {
      fail(ErrorKind::MaxIterations, "terminal Kelley loop did not reach tolerance in " +
                                         std::to_string(options.max_iterations) + " iterations");
    }
    ++result.iterations;
    // theta in units of the best objective found so far
    scale = usable_scale(best_objective);
    rows = successor_rows(incoming, stage, tangents, scale);
    sol = lp::minimize({0.0, 0.0, 1.0}, rows, kStartBasis);
    const Controls trial = clamp_controls(sol.point, stage);
    const double wealth = incoming.wealth - stage.ask * trial.charge + stage.bid * trial.discharge;
    const double objective = terminal_excess_cost(utility, wealth);
    if (objective < best_objective) {
      best_objective = objective;
      best_wealth = wealth;
    }
    const double gap = best_objective - scale * sol.point[2];
    result.gaps.push_back(gap);
    // gap / (rho * best) is the gap in euros of terminal wealth
    if (gap <= best_objective * std::max(options.tol * utility.risk_aversion, kRoundoffGap)) break;
    // a repeated trial adds no information: the remaining gap is LP round-off
    if (std::find(trial_wealths.begin(), trial_wealths.end(), wealth) != trial_wealths.end()) break;
    trial_wealths.push_back(wealth);
    tangents.push_back(tangent(wealth));
  }

  SuccessorSolution& out = result.solution;
  out.value = scale * sol.point[2];
  out.pivots = sol.pivots;

  // LP duals give d(value)/d(e) scaled by the active tangent slope; rescale
  // to the exact derivative at the best wealth.
  double active_slope = 0.0;
  for (std::size_t k = 0; k < tangents.size(); ++k) {
    active_slope += sol.duals[kFirstCut + k] * tangents[k].grad_wealth;
  }
  const double exact_slope = terminal_cost_derivative(utility, best_wealth);
  double d_energy = scale * (-sol.duals[kEnergyLow] + sol.duals[kEnergyHigh]);
  if (active_slope < 0.0) d_energy *= exact_slope / active_slope;
  out.subgradient = {active_slope < 0.0 ? exact_slope : active_slope, stage.leak_factor * d_energy};

  out.controls = clamp_controls(sol.point, stage);
  if (tie_break == TieBreak::Lexicographic) {
    out.controls = lexicographic_controls(std::move(rows), sol.point[2], out.controls);
  }
  out.next_state = transition(incoming, stage, out.controls);
  return result;
}

StageSolution solve_stage(const State& incoming, std::span<const SuccessorProblem> successors,
                          std::span<const double> transition_row, const UtilitySpec& utility,
                          const KelleyOptions& kelley, TieBreak tie_break) {
  if (successors.size() != transition_row.size()) {
    fail(ErrorKind::LengthMismatch, "transition row and successor list differ in length");
  }
  double mass = 0.0;
  for (double p : transition_row) mass += p;
  if (std::abs(mass - 1.0) > 1e-9) fail(ErrorKind::InvalidArgument, "transition row does not sum to 1");

  StageSolution out;
  out.controls.resize(successors.size());
  out.next_state_per_successor.resize(successors.size(), incoming);
  for (std::size_t i = 0; i < successors.size(); ++i) {
    const double p = transition_row[i];
    if (p <= 0.0) continue;
    const auto& succ = successors[i];
    const SuccessorSolution s =
        succ.terminal ? terminal_kelley_solve(incoming, succ.stage, utility, kelley, tie_break).solution
                      : solve_successor(incoming, succ.stage, succ.cuts, tie_break);
    out.controls[i] = s.controls;
    out.next_state_per_successor[i] = s.next_state;
    out.value += p * s.value;
    out.state_subgradient.wealth += p * s.subgradient.wealth;
    out.state_subgradient.energy += p * s.subgradient.energy;
  }
  return out;
}

}  // namespace storval
