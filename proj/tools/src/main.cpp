#include <iostream>

#include "CLI11.hpp"
#include "commands.hpp"

using namespace storval::cli;

int main(int argc, char** argv) {
  CLI::App app{"Storage trading policies and indifference prices via Markov-chain SDDP"};
  app.require_subcommand(1);

  CommonOptions common;
  bool no_timing = false;
  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--output-dir", common.output_dir, "Directory for output files (overrides config)");
    cmd->add_option("--threads", common.threads, "Worker threads for sweeps and simulations")->check(CLI::PositiveNumber);
    cmd->add_flag("--no-timing", no_timing, "Write 0 in time columns so reruns are byte-identical");
  };

  FitArgs fit;
  auto* fit_cmd = app.add_subcommand("fit", "Fit the AR(1) deviation model to a price CSV");
  fit_cmd->add_option("csv", fit.csv, "CSV with header timestamp,day_ahead,id1")->required();
  fit_cmd->add_option("--json", fit.json_out, "Also write the fit as JSON");

  DiscretizeArgs disc;
  auto* disc_cmd = app.add_subcommand("discretize", "Build the Markov chain and export it as JSON");
  disc_cmd->add_option("config", disc.config, "Run configuration (JSON)")->required();
  add_common(disc_cmd);

  TrainArgs train;
  auto* train_cmd = app.add_subcommand("train", "Train cut pools; writes cuts.json and training_log.csv");
  train_cmd->add_option("config", train.config, "Run configuration (JSON)")->required();
  train_cmd->add_option("--resume", train.resume, "Checkpoint to continue training from");
  train_cmd->add_option("--iterations", train.iterations, "Override sddp.iterations")->check(CLI::PositiveNumber);
  add_common(train_cmd);

  SimulateArgs sim;
  auto* sim_cmd = app.add_subcommand("simulate", "Out-of-sample evaluation of a trained checkpoint");
  sim_cmd->add_option("config", sim.config, "Run configuration (JSON)")->required();
  sim_cmd->add_option("checkpoint", sim.checkpoint, "cuts.json from train")->required();
  sim_cmd->add_option("--scenarios", sim.scenarios, "Override simulate.scenarios")->check(CLI::PositiveNumber);
  sim_cmd->add_option("--density-points", sim.density_points, "Grid points of the wealth density")
      ->check(CLI::Range(16, 1 << 20));
  add_common(sim_cmd);

  PriceArgs price;
  auto* price_cmd = app.add_subcommand("price", "Indifference price of renting the storage");
  price_cmd->add_option("config", price.config, "Run configuration (JSON)")->required();
  price_cmd->add_flag("--bisection", price.bisection, "Cross-check by bisection (retrains per step)");
  price_cmd->add_option("--tol", price.tol, "Bisection tolerance in EUR")->check(CLI::PositiveNumber);
  add_common(price_cmd);

  SweepArgs sweep;
  auto* sweep_cmd = app.add_subcommand("sweep", "Indifference prices along one parameter axis");
  sweep_cmd->add_option("config", sweep.config, "Run configuration (JSON)")->required();
  sweep_cmd->add_option("--axis", sweep.axis, "capacity, speed_fraction or sigma")->required();
  sweep_cmd->add_option("--grid", sweep.grid, "Strictly increasing grid values")->required()->delimiter(',');
  add_common(sweep_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }
  common.timing = !no_timing;

  return run_guarded(
      [&] {
        if (*fit_cmd) cmd_fit(fit, std::cout);
        else if (*disc_cmd) cmd_discretize(disc, common, std::cout);
        else if (*train_cmd) cmd_train(train, common, std::cout);
        else if (*sim_cmd) cmd_simulate(sim, common, std::cout);
        else if (*price_cmd) cmd_price(price, common, std::cout);
        else if (*sweep_cmd) cmd_sweep(sweep, common, std::cout);
      },
      std::cerr);
}
