#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <sstream>

#include "doctest.h"
#include "oracles.hpp"
#include "storval/errors.hpp"
#include "storval/simulation.hpp"

using namespace storval;

namespace {

TrainingResult trained(const Problem& p, const MarkovChain& chain, int iterations) {
  TrainingOptions o;
  o.iterations = iterations;
  o.seed = 2;
  return train(p, chain, o);
}

double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }

double trapezoid(const DensityEstimate& d) {
  double s = 0.0;
  for (std::size_t i = 1; i < d.grid.size(); ++i) s += 0.5 * (d.density[i] + d.density[i - 1]) * (d.grid[i] - d.grid[i - 1]);
  return s;
}

}  // namespace

TEST_CASE("without noise the simulation reproduces the deterministic bound") {
  auto p = testing::default_problem();
  p.price.innovation_std = 0.0;
  const auto chain = build_chain(p.price, 1);
  const auto r = trained(p, chain, 20);
  const auto report = evaluate_out_of_sample(r.policy, 5, 1);
  CHECK(std::abs(report.mean_utility - bound(r.log)) < 1e-6);
  CHECK(report.std_error < 1e-9);
}

TEST_CASE("out-of-sample utility stays below the bound on the toy instance") {
  const auto p = testing::toy_problem();
  const auto chain = testing::toy_chain(p);
  const auto r = trained(p, chain, 200);
  const double ub = bound(r.log);
  // Scenario k uses base ^ k, so bases are spaced beyond the scenario count.
  std::vector<double> pooled;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto report = evaluate_out_of_sample(r.policy, 500, (seed + 1) << 32);
    CHECK(report.mean_utility <= ub + 3.0 * report.std_error);
    pooled.insert(pooled.end(), report.utilities.begin(), report.utilities.end());
  }
  CHECK(mean(pooled) <= ub + 2.0 * standard_error(pooled));
}

TEST_CASE("in-sample mean is unbiased for the bound on the toy instance") {
  const auto p = testing::toy_problem();
  const auto chain = testing::toy_chain(p);
  const auto r = trained(p, chain, 200);
  SimulationOptions o;
  o.n_scenarios = 4000;
  o.seed = 9;
  const auto report = evaluate_out_of_sample(r.policy, o);
  // The converged policy attains the bound on the chain itself.
  CHECK(std::abs(report.in_sample_mean - bound(r.log)) <= 3.0 * report.in_sample_std_error + 1e-6);
  CHECK(report.in_sample_mean >= report.mean_utility -
                                     2.0 * std::hypot(report.std_error, report.in_sample_std_error));
}

TEST_CASE("paths respect the battery and the wealth identity") {
  const auto p = testing::default_problem();
  const auto chain = build_chain(p.price, 4);
  const auto r = trained(p, chain, 60);
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto path = simulate_path(r.policy, seed);
    REQUIRE(path.size() == 24);
    double wealth = p.utility.initial_wealth;
    double energy = 0.0;
    for (const auto& step : path) {
      CHECK((step.charge == 0.0 || step.discharge == 0.0));
      CHECK(step.charge <= p.battery.max_charge() + 1e-12);
      CHECK(step.discharge <= p.battery.max_discharge() + 1e-12);
      wealth += -step.prices.ask * step.charge + step.prices.bid * step.discharge;
      energy += p.battery.charge_eff * step.charge - p.battery.discharge_eff * step.discharge;
      CHECK(step.state.energy >= -1e-12);
      CHECK(step.state.energy <= p.battery.capacity + 1e-12);
      CHECK(step.state.energy == doctest::Approx(energy).epsilon(1e-9));
      CHECK(step.prices.bid == doctest::Approx(bid_ask(p.price, &step - path.data() + 1, step.deviation).bid));
    }
    CHECK(std::abs(path.back().state.wealth - wealth) < 1e-9);
  }
}

TEST_CASE("simulation is reproducible and thread-independent") {
  const auto p = testing::toy_problem();
  const auto chain = testing::toy_chain(p);
  const auto r = trained(p, chain, 50);
  SimulationOptions o;
  o.n_scenarios = 300;
  o.seed = 4;
  const auto a = evaluate_out_of_sample(r.policy, o);
  const auto b = evaluate_out_of_sample(r.policy, o);
  o.threads = 3;
  const auto c = evaluate_out_of_sample(r.policy, o);
  CHECK(a.terminal_wealths == b.terminal_wealths);
  CHECK(a.terminal_wealths == c.terminal_wealths);
  CHECK(a.mean_utility == c.mean_utility);
  CHECK(a.in_sample_mean == c.in_sample_mean);
  CHECK(a.n_scenarios == 300);
  CHECK(a.utilities.size() == 300);
}

TEST_CASE("density of a normal sample") {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> z;
  std::vector<double> x(100000);
  for (auto& v : x) v = z(rng);
  const auto d = kernel_density(x, 512);
  CHECK(d.grid.size() == 512);
  double worst = 0.0;
  for (std::size_t i = 0; i < d.grid.size(); ++i) worst = std::max(worst, std::abs(d.density[i] - normal_pdf(d.grid[i])));
  CHECK(worst < 0.02);
  CHECK(std::abs(trapezoid(d) - 1.0) < 1e-3);
}

TEST_CASE("density of a bimodal sample") {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> z;
  std::vector<double> x;
  for (int k = 0; k < 20000; ++k) x.push_back(z(rng) + (k % 2 == 0 ? -5.0 : 5.0));
  const auto d = kernel_density(x, 1024);
  std::vector<double> peaks;
  for (std::size_t i = 1; i + 1 < d.grid.size(); ++i) {
    if (d.density[i] > d.density[i - 1] && d.density[i] >= d.density[i + 1] && d.density[i] > 0.05) {
      peaks.push_back(d.grid[i]);
    }
  }
  REQUIRE(peaks.size() == 2);
  CHECK(std::abs(peaks[0] + 5.0) < 0.5);
  CHECK(std::abs(peaks[1] - 5.0) < 0.5);
}

TEST_CASE("density of a near point mass") {
  std::vector<double> x;
  for (int k = 0; k < 200; ++k) x.push_back(3.0 + 1e-6 * ((k * 37) % 11 - 5));
  const auto d = kernel_density(x, 256);
  CHECK(std::abs(trapezoid(d) - 1.0) < 1e-3);
  std::size_t arg = 0;
  for (std::size_t i = 0; i < d.grid.size(); ++i)
    if (d.density[i] > d.density[arg]) arg = i;
  CHECK(std::abs(d.grid[arg] - 3.0) < 1e-5);

  CHECK_THROWS_AS(kernel_density({1.0}), Error);
  CHECK_THROWS_AS(kernel_density({1.0, 1.0, 1.0}), Error);
  CHECK_THROWS_AS(kernel_density({1.0, 2.0}, 8), Error);
}

TEST_CASE("empirical quantiles") {
  CHECK(empirical_quantile({4.0, 1.0, 3.0, 2.0}, 0.25) == doctest::Approx(1.75));
  CHECK(empirical_quantile({4.0, 1.0, 3.0, 2.0}, 0.0) == 1.0);
  CHECK(empirical_quantile({4.0, 1.0, 3.0, 2.0}, 1.0) == 4.0);
  CHECK(empirical_quantile({5.0}, 0.3) == 5.0);
}

TEST_CASE("tail comparison") {
  SimulationReport r;
  r.terminal_wealths = {1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0};
  std::map<double, SimulationReport> reports{{0.3, r}, {0.003, r}, {0.03, r}};
  const auto table = tail_comparison(reports, 0.05);
  REQUIRE(table.size() == 3);
  CHECK(table[0].rho == 0.003);
  CHECK(table[2].rho == 0.3);
  CHECK(table[0].quantile == table[1].quantile);
  CHECK(table[1].quantile == table[2].quantile);
  CHECK(table[0].mean_wealth == doctest::Approx(5.5));

  CHECK_THROWS_AS(tail_comparison({{0.03, r}}, 0.05), Error);
  CHECK_THROWS_AS(tail_comparison(reports, 0.5), Error);
  CHECK_THROWS_AS(tail_comparison(reports, 0.0), Error);
}

TEST_CASE("summary statistics and CSV output") {
  CHECK(mean({1.0, 2.0, 6.0}) == 3.0);
  CHECK(standard_error({1.0, 2.0, 6.0}) == doctest::Approx(std::sqrt(7.0 / 3.0)));
  CHECK(standard_error({4.0}) == 0.0);

  SimulationReport r;
  r.terminal_wealths = {10.0, -5.0};
  r.utilities = {1.0, -2.0};
  std::ostringstream out;
  write_report_csv(out, r, 0.03);
  CHECK(out.str() == "scenario,terminal_wealth,utility\n0,10,1\n1,-5,-2\n");

  DensityEstimate d{{0.0, 1.0}, {0.5, 0.25}, 0.1};
  std::ostringstream dens;
  write_density_csv(dens, d);
  CHECK(dens.str() == "x,density\n0,0.5\n1,0.25\n");
}
