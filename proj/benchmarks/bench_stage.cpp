#include <benchmark/benchmark.h>

#include <cmath>
#include <random>
#include <vector>

#include "storval/stage_solver.hpp"

namespace {

using namespace storval;

// Tangents of exp(-rho (w + 60 e)) / rho at random points.
std::vector<Cut> tangent_cuts(std::size_t count, double rho) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> w(-50.0, 150.0), e(0.0, 1.0);
  std::vector<Cut> cuts(count);
  for (auto& c : cuts) {
    const double w0 = w(rng), e0 = e(rng);
    const double v = std::exp(-rho * (w0 + 60.0 * e0)) / rho;
    c.grad_wealth = -rho * v;
    c.grad_energy = -60.0 * rho * v;
    c.intercept = v - c.grad_wealth * w0 - c.grad_energy * e0;
  }
  return cuts;
}

void BM_SuccessorLp(benchmark::State& state) {
  const auto cuts = tangent_cuts(static_cast<std::size_t>(state.range(0)), 0.03);
  BatterySpec battery;
  const StageData stage = make_stage_data(battery, 1, 0, {49.0, 51.0});
  const State incoming{20.0, 0.5};
  for (auto _ : state) benchmark::DoNotOptimize(solve_successor(incoming, stage, cuts));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_SuccessorLp)->RangeMultiplier(4)->Range(4, 1024)->Complexity();

void BM_TerminalKelley(benchmark::State& state) {
  BatterySpec battery;
  const StageData stage = make_stage_data(battery, 24, 0, {49.0, 51.0});
  UtilitySpec utility;
  utility.risk_aversion = 1.0 / static_cast<double>(state.range(0));
  const State incoming{20.0, 0.5};
  for (auto _ : state) benchmark::DoNotOptimize(terminal_kelley_solve(incoming, stage, utility));
}
BENCHMARK(BM_TerminalKelley)->Arg(3)->Arg(33)->Arg(333);

}  // namespace
