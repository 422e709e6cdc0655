#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "storval/discretization.hpp"
#include "storval/price_model.hpp"
#include "storval/stage_solver.hpp"
#include "storval/storage_problem.hpp"

namespace storval {

/// Everything that defines one storage-trading problem.
struct Problem {
  PriceModel price;
  BatterySpec battery;
  UtilitySpec utility;

  int horizon() const noexcept { return price.horizon(); }
  State initial_state() const noexcept { return {utility.initial_wealth, 0.0}; }
  void validate() const;
};

/// Wide wealth box |x^m| <= bound asserted (never imposed) along visited
/// states: |x0| + 10 T (max|day_ahead| + 5 sigma + spread) max(U-bar, U-under).
double wealth_box(const Problem& problem);

/// Stage data for every chain node at stages 1..T; index [stage][node],
/// stage 0 left empty. Throws ConditionViolated if some node breaks the
/// spread condition.
std::vector<std::vector<StageData>> chain_stage_data(const Problem& problem, const MarkovChain& chain);

/// Affine lower cuts on the cost-to-go above its floor -1/rho, per
/// (stage 0..T-1, node). The floor itself (0 in these units) is implicit.
/// Pools of stages after which no trade is possible start with the exact
/// terminal tangent at the initial wealth.
class CutPool {
 public:
  CutPool() = default;
  explicit CutPool(const MarkovChain& chain);

  int horizon() const noexcept { return static_cast<int>(cuts_.size()); }
  std::size_t node_count(int stage) const { return cuts_.at(static_cast<std::size_t>(stage)).size(); }

  std::span<const Cut> at(int stage, std::size_t node) const;
  /// Appends `cut` unless the pool already holds one with the same
  /// coefficients (relative 1e-12). Returns whether it was stored.
  bool add(int stage, std::size_t node, const Cut& cut);

  /// max(0, max_k cut_k(state))
  double evaluate(int stage, std::size_t node, const State& state) const;

  std::size_t total_cuts() const noexcept;
  std::uint64_t generation() const noexcept { return generation_; }

  bool operator==(const CutPool&) const = default;

 private:
  std::vector<std::vector<std::vector<Cut>>> cuts_;
  std::uint64_t generation_ = 0;
};

struct IterationRecord {
  int iteration = 0;              // 1-based
  double bound = 0.0;             // expected-utility upper bound (maximization orientation)
  double root_cost = 0.0;         // 1/rho - bound, kept at full relative precision
  double sampled_objective = 0.0; // utility of the forward path's terminal wealth
  double seconds = 0.0;           // cumulative wall time
  std::size_t cut_count = 0;

  bool operator==(const IterationRecord&) const = default;
};

struct TrainingLog {
  std::vector<IterationRecord> records;

  /// Largest relative bound change over the last `window` iterations.
  double tail_relative_change(std::size_t window) const;
  /// First iteration k after which every later relative change is below tol;
  /// 0 if none.
  int stabilized_at(double tol) const;
};

/// Throws NotTrained on an empty log.
double bound(const TrainingLog& log);
/// 1/rho - bound(log) without cancellation. Throws NotTrained.
double root_cost(const TrainingLog& log);

/// Trained cost-to-go approximation plus the data needed to act on it.
class Policy {
 public:
  Policy(Problem problem, MarkovChain chain, CutPool cuts);

  const Problem& problem() const noexcept { return problem_; }
  const MarkovChain& chain() const noexcept { return chain_; }
  const CutPool& cuts() const noexcept { return cuts_; }
  const std::vector<std::vector<StageData>>& stage_data() const noexcept { return stage_data_; }

  /// Controls at `stage` (1..T) after observing chain node `node`, given the
  /// state carried in from stage - 1. Lexicographic tie-break.
  Controls decide(int stage, std::size_t node, const State& state) const;

  /// Same, with the cuts of `node` but the given realized prices.
  SuccessorSolution decide_at_prices(int stage, std::size_t node, BidAsk prices, const State& state) const;

  /// Root cost-to-go approximation at the initial state.
  double root_value() const;
  /// root_value() + 1/rho, without cancellation.
  double root_cost() const;

 private:
  Problem problem_;
  MarkovChain chain_;
  CutPool cuts_;
  std::vector<std::vector<StageData>> stage_data_;
};

/// Expected-utility upper bound: -root_value(). Throws NotTrained if the
/// root has no cuts.
double bound(const Policy& policy);

struct TrainingOptions {
  int iterations = 1000;
  std::uint64_t seed = 0;
  KelleyOptions kelley;
  std::function<void(const IterationRecord&)> on_iteration;
};

struct TrainingResult {
  Policy policy;
  TrainingLog log;
};

/// Markov-chain SDDP: `iterations` forward/backward passes, one new cut per
/// visited (stage, node) per pass. The forward path of iteration k depends
/// only on (seed, k).
TrainingResult train(const Problem& problem, const MarkovChain& chain, const TrainingOptions& options);

/// Continue training an existing pool (warm restart); iteration numbering
/// continues from `first_iteration`.
TrainingResult train(const Problem& problem, const MarkovChain& chain, CutPool pool,
                     const TrainingOptions& options, int first_iteration = 1);

}  // namespace storval
