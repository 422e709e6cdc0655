#include "commands.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>

#include "json.hpp"
#include "storval/checkpoint.hpp"
#include "storval/config.hpp"
#include "storval/errors.hpp"
#include "storval/simulation.hpp"
#include "storval/valuation.hpp"

namespace storval::cli {

namespace {

RunConfig resolve(const std::filesystem::path& path, const CommonOptions& common) {
  RunConfig config = load_config(path);
  apply_env_overrides(config);
  if (common.output_dir) config.output_dir = *common.output_dir;
  if (common.threads) {
    if (*common.threads < 1) fail(ErrorKind::ConfigError, "--threads must be >= 1");
    config.threads = *common.threads;
  }
  return config;
}

std::filesystem::path output_file(const RunConfig& config, const std::string& name) {
  const std::filesystem::path dir(config.output_dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) fail(ErrorKind::ConfigError, "cannot create output directory " + dir.string() + ": " + ec.message());
  return dir / name;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::ConfigError, "cannot write " + path.string());
  out << std::setprecision(12);
  return out;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

void cmd_fit(const FitArgs& args, std::ostream& out) {
  const auto ingest = read_price_csv(args.csv);
  if (ingest.dropped_rows > 0) out << "warning: dropped " << ingest.dropped_rows << " malformed rows\n";
  const auto fit = fit_ar(deviations_from_series(ingest.series));
  out << std::setprecision(6) << "observations  " << fit.n_obs << '\n'
      << "slope         " << fit.slope << '\n'
      << "intercept     " << fit.intercept << '\n'
      << "r_squared     " << fit.r_squared << '\n'
      << "residual_std  " << fit.residual_std << '\n';
  if (args.json_out) {
    nlohmann::json doc{{"slope", fit.slope},         {"intercept", fit.intercept},
                       {"r_squared", fit.r_squared}, {"residual_std", fit.residual_std},
                       {"n_obs", fit.n_obs},         {"dropped_rows", ingest.dropped_rows}};
    std::ofstream file(*args.json_out);
    if (!file) fail(ErrorKind::ConfigError, "cannot write " + args.json_out->string());
    file << doc.dump(2) << '\n';
  }
}

void cmd_discretize(const DiscretizeArgs& args, const CommonOptions& common, std::ostream& out) {
  const RunConfig config = resolve(args.config, common);
  const MarkovChain chain = build_chain(config);
  const auto path = output_file(config, "chain.json");
  open_output(path) << chain_to_json(chain) << '\n';
  double min_mass = 1e300, max_mass = 0.0;
  for (const auto& stage : chain.raw_row_mass) {
    for (double m : stage) {
      min_mass = std::min(min_mass, m);
      max_mass = std::max(max_mass, m);
    }
  }
  out << "nodes per stage  " << chain.node_count(1) << '\n'
      << "horizon          " << chain.horizon << '\n'
      << "raw row mass     [" << min_mass << ", " << max_mass << "]\n"
      << "wrote            " << path.string() << '\n';
}

void cmd_train(const TrainArgs& args, const CommonOptions& common, std::ostream& out) {
  const RunConfig config = resolve(args.config, common);
  const Problem problem = to_problem(config);
  const MarkovChain chain = build_chain(config);

  TrainingOptions options;
  options.iterations = args.iterations.value_or(config.sddp.iterations);
  options.seed = config.sddp.seed;
  CutPool pool(chain);
  int first_iteration = 1;
  if (args.resume) {
    pool = load_checkpoint(*args.resume, chain);
    for (int t = 0; t < pool.horizon(); ++t) {
      for (std::size_t j = 0; j < pool.node_count(t); ++j) {
        for (const auto& c : pool.at(t, j)) first_iteration = std::max(first_iteration, c.origin_iteration + 1);
      }
    }
  }
  const auto result = train(problem, chain, std::move(pool), options, first_iteration);

  const auto checkpoint = output_file(config, "cuts.json");
  save_checkpoint(checkpoint, result.policy.cuts());
  const auto log_path = output_file(config, "training_log.csv");
  {
    auto file = open_output(log_path);
    file << "iteration,bound,seconds\n";
    for (const auto& r : result.log.records) {
      file << r.iteration << ',' << r.bound << ',' << (common.timing ? r.seconds : 0.0) << '\n';
    }
  }
  const auto& last = result.log.records.back();
  out << std::setprecision(8) << "iterations       " << result.log.records.size() << '\n'
      << "bound            " << last.bound << '\n'
      << "stabilized at    " << result.log.stabilized_at(1e-6) << " (0 = not within 1e-6)\n"
      << "tail change      " << result.log.tail_relative_change(50) << " (last 50 iterations)\n"
      << "cuts             " << last.cut_count << '\n';
  if (common.timing) out << "seconds          " << last.seconds << '\n';
  out << "wrote            " << checkpoint.string() << ", " << log_path.string() << '\n';
}

void cmd_simulate(const SimulateArgs& args, const CommonOptions& common, std::ostream& out) {
  const RunConfig config = resolve(args.config, common);
  const Problem problem = to_problem(config);
  MarkovChain chain = build_chain(config);
  CutPool pool = load_checkpoint(args.checkpoint, chain);
  const Policy policy(problem, std::move(chain), std::move(pool));

  SimulationOptions options;
  options.n_scenarios = args.scenarios.value_or(config.simulate.scenarios);
  options.seed = config.simulate.seed;
  options.threads = config.threads;
  const auto report = evaluate_out_of_sample(policy, options);

  const auto report_path = output_file(config, "simulation.csv");
  {
    auto file = open_output(report_path);
    write_report_csv(file, report, problem.utility.risk_aversion);
  }
  const auto density_path = output_file(config, "density.csv");
  {
    auto file = open_output(density_path);
    write_density_csv(file, kernel_density(report.terminal_wealths, args.density_points));
  }
  const double b = bound(policy);
  out << std::setprecision(8) << "scenarios             " << report.n_scenarios << '\n'
      << "mean terminal wealth  " << report.mean_objective << '\n'
      << "mean utility          " << report.mean_utility << " +- " << report.std_error << '\n'
      << "in-sample utility     " << report.in_sample_mean << " +- " << report.in_sample_std_error << '\n'
      << "trained bound         " << b << '\n'
      << "bound - mean utility  " << b - report.mean_utility << " ("
      << (report.mean_utility <= b + 2.0 * report.std_error ? "within" : "OUTSIDE") << " 2 SE)\n"
      << "5% wealth quantile    " << empirical_quantile(report.terminal_wealths, 0.05) << '\n'
      << "wrote                 " << report_path.string() << ", " << density_path.string() << '\n';
}

void cmd_price(const PriceArgs& args, const CommonOptions& common, std::ostream& out) {
  const RunConfig config = resolve(args.config, common);
  const Problem problem = to_problem(config);
  const MarkovChain chain = build_chain(config);
  TrainingOptions options;
  options.iterations = config.sddp.iterations;
  options.seed = config.sddp.seed;

  const auto start = std::chrono::steady_clock::now();
  const ValuationResult closed = price_exponential(problem, chain, options);
  const double closed_seconds = seconds_since(start);

  const auto path = output_file(config, "price.csv");
  auto file = open_output(path);
  file << "method,rho,phi,price_eur,seconds\n";
  file << to_string(closed.method) << ',' << problem.utility.risk_aversion << ',' << closed.phi_with << ','
       << closed.price << ',' << (common.timing ? closed_seconds : 0.0) << '\n';
  out << std::setprecision(8) << "phi(0, capacity)   " << closed.phi_with << '\n'
      << "indifference price " << std::fixed << std::setprecision(4) << closed.price << " EUR (closed form)\n"
      << std::defaultfloat;

  if (args.bisection) {
    const auto t0 = std::chrono::steady_clock::now();
    const double hi = std::max(1.0, 2.0 * closed.price + 1.0);
    const ValuationResult bis = price_bisection(problem, chain, options, {0.0, hi}, args.tol);
    const double bis_seconds = seconds_since(t0);
    file << to_string(bis.method) << ',' << problem.utility.risk_aversion << ',' << bis.phi_with << ','
         << bis.price << ',' << (common.timing ? bis_seconds : 0.0) << '\n';
    out << "bisection price    " << std::fixed << std::setprecision(4) << bis.price << " EUR (" << bis.iterations
        << " steps, |diff| " << std::scientific << std::setprecision(2) << std::abs(bis.price - closed.price)
        << ")\n"
        << std::defaultfloat;
  }
  out << "wrote              " << path.string() << '\n';
}

void cmd_sweep(const SweepArgs& args, const CommonOptions& common, std::ostream& out) {
  const RunConfig config = resolve(args.config, common);
  const Problem problem = to_problem(config);
  SweepSpec spec;
  spec.axis = parse_sweep_axis(args.axis);
  spec.grid = args.grid;
  spec.rhos = config.sweep.rhos;
  spec.quadrature_points = config.sddp.quadrature_points;
  spec.sampling_std = config.price.sampling_std;
  spec.iterations = config.sddp.iterations;
  spec.seed = config.sddp.seed;
  spec.threads = config.threads;
  if (spec.grid.empty()) fail(ErrorKind::ConfigError, "--grid is empty");
  for (std::size_t k = 1; k < spec.grid.size(); ++k) {
    if (!(spec.grid[k] > spec.grid[k - 1])) fail(ErrorKind::ConfigError, "--grid must be strictly increasing");
  }
  const auto rows = price_sweep(problem, spec);

  const auto path = output_file(config, "sweep_" + to_string(spec.axis) + ".csv");
  {
    auto file = open_output(path);
    write_sweep_csv(file, rows, common.timing);
  }
  out << std::setw(12) << to_string(spec.axis) << std::setw(10) << "rho" << std::setw(14) << "price_eur" << '\n';
  for (const auto& r : rows) {
    out << std::setw(12) << r.axis_value << std::setw(10) << r.rho << std::setw(14) << std::fixed
        << std::setprecision(4) << r.price_eur << std::defaultfloat << std::setprecision(6) << '\n';
  }
  const auto saturation = saturation_diagnostics(rows);
  if (!saturation.empty()) {
    out << "second differences of price (negative = saturating):\n";
    for (const auto& s : saturation) {
      out << "  rho " << s.rho << " at " << s.axis_value << ": " << s.second_difference << '\n';
    }
  }
  out << "wrote " << path.string() << '\n';
}

int exit_code_for_current_exception(std::ostream& err) {
  try {
    throw;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    switch (e.category()) {
      case ErrorCategory::Config: return kConfigError;
      case ErrorCategory::Data: return kDataError;
      case ErrorCategory::Numerical: return kNumericalError;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
  } catch (...) {
    err << "error: unknown failure\n";
  }
  return kNumericalError;
}

}  // namespace storval::cli
