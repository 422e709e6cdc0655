#include "storval/valuation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <map>
#include <ostream>

#include "storval/errors.hpp"
#include "storval/parallel.hpp"

namespace storval {

std::string to_string(PricingMethod method) {
  return method == PricingMethod::ClosedForm ? "closed_form" : "bisection";
}

double indifference_price_exponential(double phi_zero_wealth, double rho) {
  if (!(rho > 0.0)) fail(ErrorKind::InvalidArgument, "risk aversion must be > 0");
  const double arg = 1.0 - rho * phi_zero_wealth;
  if (!(arg > 0.0)) {
    fail(ErrorKind::DomainError, "1 - rho * phi = " + std::to_string(arg) + " <= 0; the value bound is corrupt");
  }
  return -std::log1p(-rho * phi_zero_wealth) / rho;
}

double indifference_price_from_cost(double root_cost, double rho) {
  if (!(rho > 0.0)) fail(ErrorKind::InvalidArgument, "risk aversion must be > 0");
  if (!(root_cost > 0.0)) {
    fail(ErrorKind::DomainError, "root cost " + std::to_string(root_cost) +
                                     " <= 0: the cuts have not left the -1/rho floor at the root, so the "
                                     "price bound is unbounded; train longer");
  }
  const double price = -std::log(rho * root_cost) / rho;
  return price == 0.0 ? 0.0 : price;
}

ValuationResult indifference_price_bisection(const std::function<double(double)>& value_fn, double baseline,
                                             Bracket bracket, double tol, double initial_wealth,
                                             int max_evaluations) {
  if (!(tol > 0.0)) fail(ErrorKind::InvalidArgument, "bisection tolerance must be > 0");
  if (!(bracket.lo < bracket.hi)) fail(ErrorKind::BracketInvalid, "bracket needs lo < hi");
  const int steps = static_cast<int>(std::ceil(std::log2((bracket.hi - bracket.lo) / tol)));
  if (std::max(steps, 0) + 2 > max_evaluations) {
    fail(ErrorKind::MaxEvaluations, "bisection needs " + std::to_string(steps + 2) + " evaluations, limit is " +
                                        std::to_string(max_evaluations));
  }
  const double at_lo = value_fn(initial_wealth - bracket.lo);
  const double at_hi = value_fn(initial_wealth - bracket.hi);
  if (!(at_lo >= baseline && baseline >= at_hi)) {
    fail(ErrorKind::BracketInvalid, "value at lo " + std::to_string(at_lo) + " and hi " + std::to_string(at_hi) +
                                        " do not bracket baseline " + std::to_string(baseline));
  }

  ValuationResult result;
  result.method = PricingMethod::Bisection;
  result.phi_without = baseline;
  double lo = bracket.lo, hi = bracket.hi;
  double value_lo = at_lo;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    const double v = value_fn(initial_wealth - mid);
    ++result.iterations;
    if (v >= baseline) {
      lo = mid;
      value_lo = v;
    } else {
      hi = mid;
    }
  }
  result.price = 0.5 * (lo + hi);
  result.phi_with = value_lo;
  return result;
}

ValuationResult price_exponential(const Problem& problem, const MarkovChain& chain,
                                  const TrainingOptions& options) {
  Problem zero = problem;
  zero.utility.initial_wealth = 0.0;
  const auto trained = train(zero, chain, options);
  ValuationResult result;
  result.phi_with = bound(trained.log);
  result.phi_without = 0.0;
  result.price = indifference_price_from_cost(root_cost(trained.log), problem.utility.risk_aversion);
  result.method = PricingMethod::ClosedForm;
  result.iterations = options.iterations;
  return result;
}

ValuationResult price_bisection(const Problem& problem, const MarkovChain& chain,
                                const TrainingOptions& options, Bracket bracket, double tol) {
  auto value_fn = [&](double wealth) {
    Problem shifted = problem;
    shifted.utility.initial_wealth = wealth;
    return bound(train(shifted, chain, options).log);
  };
  const double x0 = problem.utility.initial_wealth;
  return indifference_price_bisection(value_fn, utility_of(problem.utility, x0), bracket, tol, x0);
}

std::string to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::Capacity: return "capacity";
    case SweepAxis::SpeedFraction: return "speed_fraction";
    case SweepAxis::Sigma: return "sigma";
  }
  return "unknown";
}

SweepAxis parse_sweep_axis(const std::string& name) {
  if (name == "capacity") return SweepAxis::Capacity;
  if (name == "speed_fraction" || name == "alpha") return SweepAxis::SpeedFraction;
  if (name == "sigma") return SweepAxis::Sigma;
  fail(ErrorKind::ConfigError, "unknown sweep axis '" + name + "' (capacity, speed_fraction, sigma)");
}

std::vector<SweepRow> price_sweep(const Problem& base, const SweepSpec& spec) {
  if (spec.grid.empty()) fail(ErrorKind::InvalidArgument, "sweep grid is empty");
  for (std::size_t k = 1; k < spec.grid.size(); ++k) {
    if (!(spec.grid[k] > spec.grid[k - 1])) fail(ErrorKind::InvalidArgument, "sweep grid must be strictly increasing");
  }
  if (spec.rhos.empty()) fail(ErrorKind::InvalidArgument, "sweep needs at least one risk aversion");

  const std::size_t n_grid = spec.grid.size();
  std::vector<SweepRow> rows(n_grid * spec.rhos.size());
  parallel_for(rows.size(), spec.threads, [&](std::size_t idx) {
    const std::size_t r = idx / n_grid;
    const std::size_t k = idx % n_grid;
    const double value = spec.grid[k];

    Problem problem = base;
    problem.utility.risk_aversion = spec.rhos[r];
    problem.utility.initial_wealth = 0.0;
    std::optional<double> sampling = spec.sampling_std;
    switch (spec.axis) {
      case SweepAxis::Capacity: problem.battery.capacity = value; break;
      case SweepAxis::SpeedFraction: problem.battery.speed_fraction = value; break;
      case SweepAxis::Sigma:
        if (sampling && base.price.innovation_std > 0.0) *sampling *= value / base.price.innovation_std;
        problem.price.innovation_std = value;
        break;
    }
    const MarkovChain chain = build_chain(problem.price, spec.quadrature_points, sampling);

    TrainingOptions options;
    options.iterations = spec.iterations;
    options.seed = spec.seed + k;
    const auto start = std::chrono::steady_clock::now();
    const auto priced = price_exponential(problem, chain, options);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    SweepRow& row = rows[idx];
    row.axis_value = value;
    row.rho = spec.rhos[r];
    row.bound = priced.phi_with;
    row.price_eur = priced.price;
    row.train_seconds = seconds;
  });
  return rows;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows, bool timing) {
  out << "axis_value,rho,price_eur,bound,train_seconds\n";
  const auto flags = out.flags();
  const auto precision = out.precision();
  out << std::setprecision(12);
  for (const auto& r : rows) {
    out << r.axis_value << ',' << r.rho << ',' << r.price_eur << ',' << r.bound << ','
        << (timing ? r.train_seconds : 0.0) << '\n';
  }
  out.flags(flags);
  out.precision(precision);
}

std::vector<SaturationRow> saturation_diagnostics(const std::vector<SweepRow>& rows) {
  std::map<double, std::vector<const SweepRow*>> by_rho;
  for (const auto& r : rows) by_rho[r.rho].push_back(&r);
  std::vector<SaturationRow> out;
  for (auto& [rho, pts] : by_rho) {
    std::sort(pts.begin(), pts.end(), [](auto* a, auto* b) { return a->axis_value < b->axis_value; });
    for (std::size_t k = 1; k + 1 < pts.size(); ++k) {
      const double x0 = pts[k - 1]->axis_value, x1 = pts[k]->axis_value, x2 = pts[k + 1]->axis_value;
      const double s01 = (pts[k]->price_eur - pts[k - 1]->price_eur) / (x1 - x0);
      const double s12 = (pts[k + 1]->price_eur - pts[k]->price_eur) / (x2 - x1);
      out.push_back({rho, x1, 2.0 * (s12 - s01) / (x2 - x0)});
    }
  }
  return out;
}

}  // namespace storval
