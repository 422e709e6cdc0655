#include <benchmark/benchmark.h>

#include "storval/config.hpp"
#include "storval/simulation.hpp"

namespace {

using namespace storval;

void BM_Training(benchmark::State& state) {
  RunConfig config;
  config.sddp.quadrature_points = static_cast<int>(state.range(0));
  const Problem problem = to_problem(config);
  const MarkovChain chain = build_chain(config);
  TrainingOptions options;
  options.iterations = static_cast<int>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(train(problem, chain, options));
}
BENCHMARK(BM_Training)
    ->ArgNames({"N", "iterations"})
    ->ArgsProduct({{2, 4, 8, 16}, {100}})
    ->Unit(benchmark::kMillisecond);

void BM_OutOfSample(benchmark::State& state) {
  RunConfig config;
  const Problem problem = to_problem(config);
  TrainingOptions options;
  options.iterations = 100;
  const auto trained = train(problem, build_chain(config), options);
  for (auto _ : state) {
    benchmark::DoNotOptimize(evaluate_out_of_sample(trained.policy, {static_cast<int>(state.range(0)), 1, 1, false}));
  }
}
BENCHMARK(BM_OutOfSample)->Arg(1000)->Unit(benchmark::kMillisecond);

}  // namespace
