#include "storval/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <random>
#include <string>

#include "storval/errors.hpp"
#include "storval/parallel.hpp"
#include "storval/rng.hpp"

namespace storval {

namespace {

constexpr double kTol = 1e-9;

void check_step(const PathStep& step, const BatterySpec& battery, int stage) {
  const double cap_tol = kTol * std::max(1.0, battery.capacity);
  const bool ok = step.state.energy >= -cap_tol && step.state.energy <= battery.capacity + cap_tol &&
                  step.charge >= 0.0 && step.charge <= battery.max_charge() + cap_tol &&
                  step.discharge >= 0.0 && step.discharge <= battery.max_discharge() + cap_tol;
  if (!ok) {
    fail(ErrorKind::DomainError, "battery bound violated at stage " + std::to_string(stage) + " (energy " +
                                     std::to_string(step.state.energy) + ", charge " +
                                     std::to_string(step.charge) + ", discharge " +
                                     std::to_string(step.discharge) + ")");
  }
}

}  // namespace

std::vector<PathStep> simulate_path(const Policy& policy, std::uint64_t seed) {
  const Problem& problem = policy.problem();
  const MarkovChain& chain = policy.chain();
  const BatterySpec& battery = problem.battery;
  const int T = problem.horizon();
  const auto deviations = simulate_deviation_path(problem.price, T, seed);

  std::vector<PathStep> path;
  path.reserve(static_cast<std::size_t>(T));
  State state = problem.initial_state();
  double cash_flow = 0.0;
  for (int t = 1; t <= T; ++t) {
    PathStep step;
    step.deviation = deviations[static_cast<std::size_t>(t - 1)];
    step.node = nearest_node(chain, t, step.deviation);
    step.prices = bid_ask(problem.price, t, step.deviation);
    const auto decision = policy.decide_at_prices(t, step.node, step.prices, state);
    const double net = complementary_control(decision.controls.charge, decision.controls.discharge,
                                             battery.charge_eff, battery.discharge_eff);
    step.charge = std::max(net, 0.0);
    step.discharge = std::max(-net, 0.0);
    const StageData data = make_stage_data(battery, t, step.node, step.prices);
    step.state = transition(state, data, {step.charge, step.discharge});
    cash_flow += step.prices.ask * step.charge - step.prices.bid * step.discharge;
    check_step(step, battery, t);
    state = step.state;
    path.push_back(step);
  }
  const double expected = problem.utility.initial_wealth - cash_flow;
  if (std::abs(state.wealth - expected) > kTol * std::max(1.0, std::abs(expected))) {
    fail(ErrorKind::DomainError, "wealth identity violated: " + std::to_string(state.wealth) + " vs " +
                                     std::to_string(expected));
  }
  return path;
}

double mean(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double standard_error(const std::vector<double>& v) {
  const std::size_t n = v.size();
  if (n < 2) return 0.0;
  const double m = mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n));
}

std::vector<double> evaluate_in_sample(const Policy& policy, int n_scenarios, std::uint64_t seed, int threads) {
  if (n_scenarios < 1) fail(ErrorKind::InvalidArgument, "n_scenarios must be >= 1");
  const MarkovChain& chain = policy.chain();
  const UtilitySpec& utility = policy.problem().utility;
  const int T = chain.horizon;
  std::vector<double> utilities(static_cast<std::size_t>(n_scenarios));
  parallel_for(utilities.size(), threads, [&](std::size_t k) {
    Engine engine = stream_engine(seed, k);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    State state = policy.problem().initial_state();
    std::size_t node = 0;
    for (int t = 1; t <= T; ++t) {
      const auto row = chain.transition_row(t - 1, node);
      const double u = uniform(engine);
      double cumulative = 0.0;
      std::size_t next = 0;
      for (std::size_t i = 0; i < row.size(); ++i) {
        if (row[i] <= 0.0) continue;
        next = i;
        cumulative += row[i];
        if (u < cumulative) break;
      }
      node = next;
      const auto& data = policy.stage_data()[static_cast<std::size_t>(t)][node];
      const auto decision = policy.decide_at_prices(t, node, {data.bid, data.ask}, state);
      state = decision.next_state;
    }
    utilities[k] = utility_of(utility, state.wealth);
  });
  return utilities;
}

SimulationReport evaluate_out_of_sample(const Policy& policy, const SimulationOptions& options) {
  if (options.n_scenarios < 1) fail(ErrorKind::InvalidArgument, "n_scenarios must be >= 1");
  const auto n = static_cast<std::size_t>(options.n_scenarios);
  const UtilitySpec& utility = policy.problem().utility;

  SimulationReport report;
  report.n_scenarios = options.n_scenarios;
  report.terminal_wealths.resize(n);
  report.utilities.resize(n);
  parallel_for(n, options.threads, [&](std::size_t k) {
    const auto path = simulate_path(policy, options.seed ^ static_cast<std::uint64_t>(k));
    const double w = path.empty() ? policy.problem().utility.initial_wealth : path.back().state.wealth;
    report.terminal_wealths[k] = w;
    report.utilities[k] = utility_of(utility, w);
  });
  report.mean_objective = mean(report.terminal_wealths);
  report.mean_utility = mean(report.utilities);
  report.std_error = standard_error(report.utilities);
  if (options.in_sample) {
    const auto in_sample = evaluate_in_sample(policy, options.n_scenarios, options.seed, options.threads);
    report.in_sample_mean = mean(in_sample);
    report.in_sample_std_error = standard_error(in_sample);
  }
  return report;
}

SimulationReport evaluate_out_of_sample(const Policy& policy, int n_scenarios, std::uint64_t seed) {
  SimulationOptions options;
  options.n_scenarios = n_scenarios;
  options.seed = seed;
  return evaluate_out_of_sample(policy, options);
}

DensityEstimate kernel_density(const std::vector<double>& samples, int grid_points) {
  const std::size_t n = samples.size();
  if (n < 2) fail(ErrorKind::DegenerateSample, "kernel density needs at least 2 samples");
  if (grid_points < 16) fail(ErrorKind::DegenerateSample, "kernel density needs at least 16 grid points");
  const double m = mean(samples);
  double ss = 0.0;
  for (double x : samples) ss += (x - m) * (x - m);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  if (!(sd > 0.0)) fail(ErrorKind::DegenerateSample, "samples have zero spread");

  DensityEstimate est;
  est.bandwidth = 1.06 * sd * std::pow(static_cast<double>(n), -0.2);
  const auto [lo_it, hi_it] = std::minmax_element(samples.begin(), samples.end());
  const double lo = *lo_it - 3.0 * est.bandwidth;
  const double hi = *hi_it + 3.0 * est.bandwidth;
  const auto g = static_cast<std::size_t>(grid_points);
  est.grid.resize(g);
  est.density.assign(g, 0.0);
  const double step = (hi - lo) / static_cast<double>(g - 1);
  for (std::size_t i = 0; i < g; ++i) est.grid[i] = lo + step * static_cast<double>(i);

  std::vector<double> sorted = samples;
  std::sort(sorted.begin(), sorted.end());
  const double cutoff = 8.0 * est.bandwidth;  // kernel below 1.3e-14 of its peak
  const double norm = 1.0 / (static_cast<double>(n) * est.bandwidth * std::sqrt(2.0 * std::numbers::pi));
  for (std::size_t i = 0; i < g; ++i) {
    const double x = est.grid[i];
    auto it = std::lower_bound(sorted.begin(), sorted.end(), x - cutoff);
    double s = 0.0;
    for (; it != sorted.end() && *it <= x + cutoff; ++it) {
      const double z = (x - *it) / est.bandwidth;
      s += std::exp(-0.5 * z * z);
    }
    est.density[i] = s * norm;
  }
  return est;
}

double empirical_quantile(std::vector<double> samples, double q) {
  if (samples.empty()) fail(ErrorKind::DegenerateSample, "quantile of an empty sample");
  if (!(q >= 0.0 && q <= 1.0)) fail(ErrorKind::InvalidArgument, "quantile level must be in [0, 1]");
  std::sort(samples.begin(), samples.end());
  const double h = q * static_cast<double>(samples.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, samples.size() - 1);
  return samples[lo] + (h - static_cast<double>(lo)) * (samples[hi] - samples[lo]);
}

std::vector<TailRow> tail_comparison(const std::map<double, SimulationReport>& reports, double q) {
  if (reports.size() < 2) fail(ErrorKind::InvalidArgument, "tail comparison needs at least two risk aversions");
  if (!(q > 0.0 && q < 0.5)) fail(ErrorKind::InvalidArgument, "tail quantile must be in (0, 0.5)");
  std::vector<TailRow> rows;
  for (const auto& [rho, report] : reports) {
    rows.push_back({rho, empirical_quantile(report.terminal_wealths, q), mean(report.terminal_wealths)});
  }
  return rows;
}

void write_report_csv(std::ostream& out, const SimulationReport& report, double risk_aversion) {
  const auto precision = out.precision();
  out << "scenario,terminal_wealth,utility\n" << std::setprecision(12);
  for (std::size_t k = 0; k < report.terminal_wealths.size(); ++k) {
    const double u = k < report.utilities.size() ? report.utilities[k]
                                                 : utility_of({risk_aversion, 0.0}, report.terminal_wealths[k]);
    out << k << ',' << report.terminal_wealths[k] << ',' << u << '\n';
  }
  out.precision(precision);
}

void write_density_csv(std::ostream& out, const DensityEstimate& density) {
  const auto precision = out.precision();
  out << "x,density\n" << std::setprecision(12);
  for (std::size_t i = 0; i < density.grid.size(); ++i) out << density.grid[i] << ',' << density.density[i] << '\n';
  out.precision(precision);
}

}  // namespace storval
