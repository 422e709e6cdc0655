#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "storval/storage_problem.hpp"

namespace storval {

/// Battery state between stages.
struct State {
  double wealth = 0.0;  // EUR
  double energy = 0.0;  // MWh
};

/// Relaxed controls of one stage: energy bought (charge) and sold (discharge).
struct Controls {
  double charge = 0.0;
  double discharge = 0.0;

  bool operator==(const Controls&) const = default;
};

struct Subgradient {
  double wealth = 0.0;
  double energy = 0.0;
};

// Costs in this module are measured from the infimum -1/rho of the
// negated utility: a stored value V stands for the cost-to-go V - 1/rho.
// Near saturation the cost-to-go differs from -1/rho only in digits that
// would otherwise be lost.

/// Affine lower bound on the cost above the floor:
/// J(x) + 1/rho >= intercept + grad_wealth * x^m + grad_energy * x^e.
struct Cut {
  double intercept = 0.0;
  double grad_wealth = 0.0;
  double grad_energy = 0.0;
  int origin_iteration = 0;

  double evaluate(const State& s) const noexcept {
    return intercept + grad_wealth * s.wealth + grad_energy * s.energy;
  }

  bool operator==(const Cut&) const = default;
};

/// Lower bound every cost-to-go shares: -v(z) > -1/rho for all z. Values and
/// cuts in this module are measured from it.
double cost_floor(const UtilitySpec& utility) noexcept;

enum class TieBreak {
  None,           // any optimal vertex
  Lexicographic,  // smallest charge, then smallest discharge, among optima
};

/// Next state after applying `controls` from `incoming` under `stage`.
State transition(const State& incoming, const StageData& stage, const Controls& controls) noexcept;

/// Optimum of one deterministic successor problem: controls chosen after the
/// successor's prices are known.
struct SuccessorSolution {
  Controls controls;
  double value = 0.0;
  Subgradient subgradient;  // with respect to the incoming state
  State next_state;
  int pivots = 0;
};

/// min over controls of  max(0, max_k cut_k(next_state))  subject to the
/// speed boxes and 0 <= next energy <= capacity. Throws Infeasible if the
/// incoming energy lies outside [0, capacity].
SuccessorSolution solve_successor(const State& incoming, const StageData& stage,
                                  std::span<const Cut> cuts, TieBreak tie_break = TieBreak::None);

struct KelleyResult {
  SuccessorSolution solution;
  int iterations = 0;
  std::vector<double> gaps;  // best evaluated objective minus LP bound, per iteration
};

struct KelleyOptions {
  double tol = 1e-9;
  int max_iterations = 100;
};

/// Final-stage problem  min_controls terminal_excess_cost(next wealth)  solved
/// by adding exact tangents of the exponential at each trial wealth, until
/// the gap, converted to euros of terminal wealth (gap / (rho * best)), is
/// below tol, or below round-off (1e-13 relative), or a trial wealth repeats. The value is the
/// last LP lower bound; the subgradient uses the exact terminal derivative at
/// the best trial wealth. Throws MaxIterations.
KelleyResult terminal_kelley_solve(const State& incoming, const StageData& stage,
                                   const UtilitySpec& utility, const KelleyOptions& options = {},
                                   TieBreak tie_break = TieBreak::None);

/// One successor of a stage problem: its stage data and either its cut set
/// or the exact terminal cost.
struct SuccessorProblem {
  StageData stage;
  std::span<const Cut> cuts;
  bool terminal = false;
};

struct StageSolution {
  std::vector<Controls> controls;  // per successor
  double value = 0.0;              // probability-weighted
  Subgradient state_subgradient;
  std::vector<State> next_state_per_successor;
};

/// Stage value at (incoming state, current node): sum_i p_i * successor_i.
/// Successors with zero probability are skipped.
StageSolution solve_stage(const State& incoming, std::span<const SuccessorProblem> successors,
                          std::span<const double> transition_row, const UtilitySpec& utility,
                          const KelleyOptions& kelley = {}, TieBreak tie_break = TieBreak::None);

}  // namespace storval
