#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace storval::cli {

enum ExitCode : int { kOk = 0, kConfigError = 2, kDataError = 3, kNumericalError = 4 };

struct CommonOptions {
  std::optional<std::string> output_dir;  // overrides config and environment
  std::optional<int> threads;
  bool timing = true;                     // false writes 0 in time columns
};

struct FitArgs {
  std::filesystem::path csv;
  std::optional<std::filesystem::path> json_out;
};

struct TrainArgs {
  std::filesystem::path config;
  std::optional<std::filesystem::path> resume;  // checkpoint to continue from
  std::optional<int> iterations;
};

struct SimulateArgs {
  std::filesystem::path config;
  std::filesystem::path checkpoint;
  std::optional<int> scenarios;
  int density_points = 512;
};

struct PriceArgs {
  std::filesystem::path config;
  bool bisection = false;
  double tol = 1e-3;
};

struct SweepArgs {
  std::filesystem::path config;
  std::string axis;
  std::vector<double> grid;
};

struct DiscretizeArgs {
  std::filesystem::path config;
};

// Each command prints a human-readable summary to `out` and writes its
// artifacts under the resolved output directory. Errors propagate as
// storval::Error; run_guarded maps them to exit codes.
void cmd_fit(const FitArgs& args, std::ostream& out);
void cmd_discretize(const DiscretizeArgs& args, const CommonOptions& common, std::ostream& out);
void cmd_train(const TrainArgs& args, const CommonOptions& common, std::ostream& out);
void cmd_simulate(const SimulateArgs& args, const CommonOptions& common, std::ostream& out);
void cmd_price(const PriceArgs& args, const CommonOptions& common, std::ostream& out);
void cmd_sweep(const SweepArgs& args, const CommonOptions& common, std::ostream& out);

/// Runs fn, printing any error to `err` and returning the matching exit code.
template <typename Fn>
int run_guarded(Fn&& fn, std::ostream& err);

int exit_code_for_current_exception(std::ostream& err);

template <typename Fn>
int run_guarded(Fn&& fn, std::ostream& err) {
  try {
    fn();
    return kOk;
  } catch (...) {
    return exit_code_for_current_exception(err);
  }
}

}  // namespace storval::cli
