#include "storval/sddp.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>
#include <string>

#include "storval/errors.hpp"
#include "storval/rng.hpp"

namespace storval {

void Problem::validate() const {
  price.validate();
  battery.validate();
  utility.validate();
}

double wealth_box(const Problem& problem) {
  const auto& p = problem.price;
  double max_da = 0.0;
  for (double v : p.day_ahead) max_da = std::max(max_da, std::abs(v));
  const double sigma = std::abs(p.ar_coefficient) < 1.0 ? p.stationary_std() : p.innovation_std;
  const double speed = std::max(problem.battery.max_charge(), problem.battery.max_discharge());
  return std::abs(problem.utility.initial_wealth) +
         10.0 * problem.horizon() * (max_da + 5.0 * sigma + p.spread) * speed;
}

std::vector<std::vector<StageData>> chain_stage_data(const Problem& problem, const MarkovChain& chain) {
  if (chain.horizon != problem.horizon()) {
    fail(ErrorKind::LengthMismatch, "chain horizon " + std::to_string(chain.horizon) +
                                        " differs from day-ahead length " + std::to_string(problem.horizon()));
  }
  std::vector<std::vector<StageData>> data(static_cast<std::size_t>(chain.horizon) + 1);
  for (int t = 1; t <= chain.horizon; ++t) {
    auto& stage = data[static_cast<std::size_t>(t)];
    for (std::size_t i = 0; i < chain.node_count(t); ++i) {
      const auto prices = bid_ask(problem.price, t, chain.node_value(t, i));
      stage.push_back(make_stage_data(problem.battery, t, i, prices));
      if (!check_spread_condition(stage.back())) {
        fail(ErrorKind::ConditionViolated,
             "bid/c- > ask/c+ at stage " + std::to_string(t) + ", node " + std::to_string(i) +
                 " (bid " + std::to_string(prices.bid) + ", ask " + std::to_string(prices.ask) +
                 "); the relaxed problem could trade both ways at once");
      }
    }
  }
  return data;
}

CutPool::CutPool(const MarkovChain& chain) {
  cuts_.resize(static_cast<std::size_t>(chain.horizon));
  for (int t = 0; t < chain.horizon; ++t) cuts_[static_cast<std::size_t>(t)].resize(chain.node_count(t));
}

std::span<const Cut> CutPool::at(int stage, std::size_t node) const {
  return cuts_.at(static_cast<std::size_t>(stage)).at(node);
}

bool CutPool::add(int stage, std::size_t node, const Cut& cut) {
  auto& pool = cuts_.at(static_cast<std::size_t>(stage)).at(node);
  auto same = [](double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(std::abs(a), std::abs(b)); };
  for (const auto& c : pool) {
    if (same(c.intercept, cut.intercept) && same(c.grad_wealth, cut.grad_wealth) &&
        same(c.grad_energy, cut.grad_energy)) {
      return false;
    }
  }
  pool.push_back(cut);
  ++generation_;
  return true;
}

double CutPool::evaluate(int stage, std::size_t node, const State& state) const {
  double v = 0.0;
  for (const auto& c : at(stage, node)) v = std::max(v, c.evaluate(state));
  return v;
}

std::size_t CutPool::total_cuts() const noexcept {
  std::size_t n = 0;
  for (const auto& stage : cuts_) {
    for (const auto& node : stage) n += node.size();
  }
  return n;
}

double TrainingLog::tail_relative_change(std::size_t window) const {
  double worst = 0.0;
  const std::size_t n = records.size();
  for (std::size_t k = n > window ? n - window : 1; k < n; ++k) {
    const double prev = records[k - 1].bound;
    const double change = std::abs(records[k].bound - prev) / std::max(std::abs(prev), 1e-300);
    worst = std::max(worst, change);
  }
  return worst;
}

int TrainingLog::stabilized_at(double tol) const {
  const std::size_t n = records.size();
  if (n == 0) return 0;
  std::size_t k = n;  // candidate: all changes from index k onward are small
  while (k > 1) {
    const double prev = records[k - 2].bound;
    const double change = std::abs(records[k - 1].bound - prev) / std::max(std::abs(prev), 1e-300);
    if (!(change < tol)) break;
    --k;
  }
  return k == n ? 0 : records[k - 1].iteration;
}

double bound(const TrainingLog& log) {
  if (log.records.empty()) fail(ErrorKind::NotTrained, "training log is empty");
  return log.records.back().bound;
}

double root_cost(const TrainingLog& log) {
  if (log.records.empty()) fail(ErrorKind::NotTrained, "training log is empty");
  return log.records.back().root_cost;
}

Policy::Policy(Problem problem, MarkovChain chain, CutPool cuts)
    : problem_(std::move(problem)), chain_(std::move(chain)), cuts_(std::move(cuts)) {
  problem_.validate();
  stage_data_ = chain_stage_data(problem_, chain_);
  if (cuts_.horizon() != chain_.horizon) fail(ErrorKind::LengthMismatch, "cut pool horizon differs from chain");
}

SuccessorSolution Policy::decide_at_prices(int stage, std::size_t node, BidAsk prices,
                                           const State& state) const {
  if (stage < 1 || stage > chain_.horizon) {
    fail(ErrorKind::StageOutOfRange, "decision stage " + std::to_string(stage) + " outside 1.." +
                                         std::to_string(chain_.horizon));
  }
  const StageData data = make_stage_data(problem_.battery, stage, node, prices);
  if (stage == chain_.horizon) {
    return terminal_kelley_solve(state, data, problem_.utility, {}, TieBreak::Lexicographic).solution;
  }
  return solve_successor(state, data, cuts_.at(stage, node), TieBreak::Lexicographic);
}

Controls Policy::decide(int stage, std::size_t node, const State& state) const {
  if (stage < 1 || stage > chain_.horizon) {
    fail(ErrorKind::StageOutOfRange, "decision stage " + std::to_string(stage) + " outside 1.." +
                                         std::to_string(chain_.horizon));
  }
  const auto& data = stage_data_[static_cast<std::size_t>(stage)].at(node);
  return decide_at_prices(stage, node, {data.bid, data.ask}, state).controls;
}

double Policy::root_cost() const { return cuts_.evaluate(0, 0, problem_.initial_state()); }

double Policy::root_value() const { return root_cost() + cost_floor(problem_.utility); }

double bound(const Policy& policy) {
  if (policy.cuts().at(0, 0).empty()) fail(ErrorKind::NotTrained, "policy has no root cuts");
  return 1.0 / policy.problem().utility.risk_aversion - policy.root_cost();
}

namespace {

std::size_t sample_index(std::span<const double> probabilities, Engine& engine) {
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  const double u = uniform(engine);
  double cumulative = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < probabilities.size(); ++i) {
    if (probabilities[i] <= 0.0) continue;
    last_positive = i;
    cumulative += probabilities[i];
    if (u < cumulative) return i;
  }
  return last_positive;
}

// When no trade after stage t can move wealth (zero speeds or zero
// capacity), the cost-to-go there is the terminal cost itself; empty pools
// of such stages start with its exact tangent at the initial wealth.
void seed_idle_cuts(CutPool& pool, const std::vector<std::vector<StageData>>& stage_data,
                    const UtilitySpec& utility, const State& x0) {
  const int T = pool.horizon();
  bool idle = true;
  for (int t = T - 1; t >= 0 && idle; --t) {
    for (const auto& d : stage_data[static_cast<std::size_t>(t + 1)]) {
      if (d.u_max_charge > 0.0 && d.capacity > 0.0) idle = false;
      if (d.u_max_discharge > 0.0 && d.capacity > 0.0) idle = false;
    }
    if (!idle) break;
    Cut cut;
    cut.grad_wealth = terminal_cost_derivative(utility, x0.wealth);
    cut.intercept = terminal_excess_cost(utility, x0.wealth) - cut.grad_wealth * x0.wealth;
    cut.origin_iteration = 0;
    for (std::size_t j = 0; j < pool.node_count(t); ++j) {
      if (pool.at(t, j).empty()) pool.add(t, j, cut);
    }
  }
}

struct Visit {
  std::size_t node;
  State state;
};

}  // namespace

TrainingResult train(const Problem& problem, const MarkovChain& chain, const TrainingOptions& options) {
  return train(problem, chain, CutPool(chain), options, 1);
}

TrainingResult train(const Problem& problem, const MarkovChain& chain, CutPool pool,
                     const TrainingOptions& options, int first_iteration) {
  problem.validate();
  if (options.iterations < 1) fail(ErrorKind::InvalidArgument, "iterations must be >= 1");
  const auto stage_data = chain_stage_data(problem, chain);
  if (pool.horizon() != chain.horizon) fail(ErrorKind::LengthMismatch, "cut pool horizon differs from chain");

  const int T = chain.horizon;
  const double box = wealth_box(problem);
  const UtilitySpec& utility = problem.utility;
  const State x0 = problem.initial_state();
  seed_idle_cuts(pool, stage_data, utility, x0);

  TrainingLog log;
  log.records.reserve(static_cast<std::size_t>(options.iterations));
  std::vector<Visit> path(static_cast<std::size_t>(T) + 1);
  std::vector<SuccessorProblem> successors;

  const auto start = std::chrono::steady_clock::now();
  for (int it = 0; it < options.iterations; ++it) {
    const int iteration = first_iteration + it;
    Engine engine = stream_engine(options.seed, static_cast<std::uint64_t>(iteration));

    // forward pass
    path[0] = {0, x0};
    for (int s = 1; s <= T; ++s) {
      const auto& prev = path[static_cast<std::size_t>(s - 1)];
      const std::size_t node = sample_index(chain.transition_row(s - 1, prev.node), engine);
      const StageData& data = stage_data[static_cast<std::size_t>(s)][node];
      const SuccessorSolution step =
          s == T ? terminal_kelley_solve(prev.state, data, utility, options.kelley, TieBreak::Lexicographic).solution
                 : solve_successor(prev.state, data, pool.at(s, node), TieBreak::Lexicographic);
      if (std::abs(step.next_state.wealth) > box) {
        fail(ErrorKind::DomainError, "wealth " + std::to_string(step.next_state.wealth) +
                                         " left the box +-" + std::to_string(box) + " at stage " +
                                         std::to_string(s));
      }
      path[static_cast<std::size_t>(s)] = {node, step.next_state};
    }

    // backward pass
    for (int t = T - 1; t >= 0; --t) {
      const auto& visit = path[static_cast<std::size_t>(t)];
      const auto& next_data = stage_data[static_cast<std::size_t>(t + 1)];
      successors.clear();
      for (std::size_t i = 0; i < next_data.size(); ++i) {
        SuccessorProblem sp;
        sp.stage = next_data[i];
        sp.terminal = (t + 1 == T);
        if (!sp.terminal) sp.cuts = pool.at(t + 1, i);
        successors.push_back(sp);
      }
      const StageSolution sol = solve_stage(visit.state, successors, chain.transition_row(t, visit.node),
                                            utility, options.kelley, TieBreak::None);
      Cut cut;
      cut.grad_wealth = sol.state_subgradient.wealth;
      cut.grad_energy = sol.state_subgradient.energy;
      cut.intercept = sol.value - cut.grad_wealth * visit.state.wealth - cut.grad_energy * visit.state.energy;
      cut.origin_iteration = iteration;
      pool.add(t, visit.node, cut);
    }

    IterationRecord rec;
    rec.iteration = iteration;
    rec.root_cost = pool.evaluate(0, 0, x0);
    rec.bound = 1.0 / utility.risk_aversion - rec.root_cost;
    rec.sampled_objective = utility_of(utility, path[static_cast<std::size_t>(T)].state.wealth);
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    rec.cut_count = pool.total_cuts();
    log.records.push_back(rec);
    if (options.on_iteration) options.on_iteration(rec);
  }

  return TrainingResult{Policy(problem, chain, std::move(pool)), std::move(log)};
}

}  // namespace storval
