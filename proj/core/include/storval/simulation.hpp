#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <vector>

#include "storval/sddp.hpp"

namespace storval {

struct SimulationReport {
  int n_scenarios = 0;
  double mean_objective = 0.0;       // mean terminal wealth (EUR)
  double std_error = 0.0;            // standard error of mean_utility
  std::vector<double> terminal_wealths;
  std::vector<double> utilities;
  double mean_utility = 0.0;
  double in_sample_mean = 0.0;       // mean utility on paths drawn from the chain
  double in_sample_std_error = 0.0;
};

struct SimulationOptions {
  int n_scenarios = 10000;
  std::uint64_t seed = 0;
  int threads = 1;
  bool in_sample = true;
};

/// Per-stage record of one simulated path.
struct PathStep {
  double deviation = 0.0;
  std::size_t node = 0;
  BidAsk prices;
  double charge = 0.0;      // after complementary recovery
  double discharge = 0.0;
  State state;              // after the step
};

/// One out-of-sample path: deviations from the AR(1) model with seed
/// `seed`, cuts of the nearest chain node, realized bid/ask in the stage
/// problem and in the accounting. The relaxed decision is replaced by its
/// net control, so at most one of charge/discharge is positive. Throws
/// DomainError if a battery bound or the wealth identity is violated.
std::vector<PathStep> simulate_path(const Policy& policy, std::uint64_t seed);

/// Scenario k uses seed ^ k. Aggregation is in scenario order, independent
/// of the thread count.
SimulationReport evaluate_out_of_sample(const Policy& policy, const SimulationOptions& options);
SimulationReport evaluate_out_of_sample(const Policy& policy, int n_scenarios, std::uint64_t seed);

/// Terminal-utility samples on node paths drawn from the chain itself.
std::vector<double> evaluate_in_sample(const Policy& policy, int n_scenarios, std::uint64_t seed, int threads = 1);

struct DensityEstimate {
  std::vector<double> grid;
  std::vector<double> density;
  double bandwidth = 0.0;
};

/// Gaussian KDE with Silverman bandwidth 1.06 s n^(-1/5) on grid_points
/// equally spaced points over [min - 3 bw, max + 3 bw]. Throws
/// DegenerateSample for fewer than 2 samples, zero spread, or grid_points < 16.
DensityEstimate kernel_density(const std::vector<double>& samples, int grid_points = 512);

/// Linear-interpolation (type 7) empirical quantile.
double empirical_quantile(std::vector<double> samples, double q);

struct TailRow {
  double rho = 0.0;
  double quantile = 0.0;     // lower quantile of terminal wealth
  double mean_wealth = 0.0;
};

/// Lower quantile of terminal wealth per risk aversion, sorted by rho.
/// Requires at least two reports and 0 < q < 0.5 (InvalidArgument).
std::vector<TailRow> tail_comparison(const std::map<double, SimulationReport>& reports, double q);

/// `scenario,terminal_wealth,utility`
void write_report_csv(std::ostream& out, const SimulationReport& report, double risk_aversion);
/// `x,density`
void write_density_csv(std::ostream& out, const DensityEstimate& density);

double mean(const std::vector<double>& v);
/// Standard error of the mean (sample std / sqrt(n)); 0 for n < 2.
double standard_error(const std::vector<double>& v);

}  // namespace storval
