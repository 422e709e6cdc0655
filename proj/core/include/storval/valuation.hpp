#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "storval/discretization.hpp"
#include "storval/sddp.hpp"

namespace storval {

enum class PricingMethod { ClosedForm, Bisection };

std::string to_string(PricingMethod method);

struct ValuationResult {
  double price = 0.0;        // EUR
  double phi_with = 0.0;     // optimal expected utility with storage access
  double phi_without = 0.0;  // utility of the initial wealth alone
  PricingMethod method = PricingMethod::ClosedForm;
  int iterations = 0;        // bisection steps, or SDDP passes for the closed form
};

/// -ln(1 - rho phi) / rho. Throws DomainError if 1 - rho phi <= 0.
double indifference_price_exponential(double phi_zero_wealth, double rho);

/// Same price from the root cost 1/rho - phi: -ln(rho * cost) / rho.
/// Throws DomainError if cost <= 0, which happens when strongly risk-averse
/// runs stop before any root cut rises above the floor.
double indifference_price_from_cost(double root_cost, double rho);

struct Bracket {
  double lo = 0.0;
  double hi = 0.0;
};

/// Solves value_fn(x0 - pi) = baseline for pi in [lo, hi] by bisection, with
/// value_fn non-increasing in pi. Requires value_fn(x0 - lo) >= baseline >=
/// value_fn(x0 - hi) (else BracketInvalid). Stops once the bracket is no
/// wider than tol and returns its midpoint. Throws MaxEvaluations when more
/// than max_evaluations calls of value_fn would be needed.
ValuationResult indifference_price_bisection(const std::function<double(double)>& value_fn, double baseline,
                                             Bracket bracket, double tol, double initial_wealth = 0.0,
                                             int max_evaluations = 200);

/// Trains at zero initial wealth and applies the closed form to the root
/// cost, which keeps full precision when phi is close to 1/rho.
ValuationResult price_exponential(const Problem& problem, const MarkovChain& chain,
                                  const TrainingOptions& options);

/// Retrains at shifted initial wealth for every bisection step. Expensive.
ValuationResult price_bisection(const Problem& problem, const MarkovChain& chain,
                                const TrainingOptions& options, Bracket bracket, double tol);

enum class SweepAxis { Capacity, SpeedFraction, Sigma };

std::string to_string(SweepAxis axis);
/// "capacity", "speed_fraction" (or "alpha"), "sigma". Throws ConfigError.
SweepAxis parse_sweep_axis(const std::string& name);

struct SweepSpec {
  SweepAxis axis = SweepAxis::Capacity;
  std::vector<double> grid;              // strictly increasing
  std::vector<double> rhos{0.03};
  int quadrature_points = 8;
  std::optional<double> sampling_std;    // scaled with sigma on the sigma axis
  int iterations = 1000;
  std::uint64_t seed = 0;                // grid point k trains with seed + k
  int threads = 1;
};

struct SweepRow {
  double axis_value = 0.0;
  double rho = 0.0;
  double price_eur = 0.0;
  double bound = 0.0;
  double train_seconds = 0.0;
};

/// One training per (grid value, rho) at zero initial wealth. Rows are
/// ordered by rho, then grid value.
std::vector<SweepRow> price_sweep(const Problem& base, const SweepSpec& spec);

/// Header `axis_value,rho,price_eur,bound,train_seconds`. With
/// timing = false the seconds column is written as 0.
void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows, bool timing = true);

struct SaturationRow {
  double rho = 0.0;
  double axis_value = 0.0;        // interior grid point
  double second_difference = 0.0; // divided second difference of price
};

/// Divided second differences of price along the grid, per rho.
std::vector<SaturationRow> saturation_diagnostics(const std::vector<SweepRow>& rows);

}  // namespace storval
