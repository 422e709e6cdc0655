#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "storval/discretization.hpp"
#include "storval/sddp.hpp"

namespace storval {

/// Declarative run configuration. JSON layout:
///
///   { "horizon": 24,
///     "battery": {"capacity_mwh", "alpha", "c_plus", "c_minus", "leakage"},
///     "market":  {"spread_eur", "day_ahead": [...], "day_ahead_csv": "path"},
///     "price":   {"a", "sigma_eps", "xi0", "sampling_std"},
///     "utility": {"rho", "initial_wealth"},
///     "sddp":    {"quadrature_points", "iterations", "seed"},
///     "simulate": {"scenarios", "seed"},
///     "sweep":   {"rhos": [...]},
///     "output_dir": ".", "threads": 1 }
///
/// Every key is optional; unknown keys are rejected.
struct RunConfig {
  int horizon = 24;

  struct Battery {
    double capacity_mwh = 1.0;
    double alpha = 0.4;
    double c_plus = 0.95;
    double c_minus = 1.05;
    double leakage = 0.0;
  } battery;

  struct Market {
    double spread_eur = 1.0;
    std::vector<double> day_ahead;  // empty: synthetic curve (or day_ahead_csv)
    std::optional<std::string> day_ahead_csv;
  } market;

  struct Price {
    double a = 0.48;
    double sigma_eps = 5.0;
    double xi0 = 0.0;
    std::optional<double> sampling_std;
  } price;

  struct Utility {
    double rho = 0.03;
    double initial_wealth = 0.0;
  } utility;

  struct Sddp {
    int quadrature_points = 8;
    int iterations = 1000;
    std::uint64_t seed = 20240101;
  } sddp;

  struct Simulate {
    int scenarios = 10000;
    std::uint64_t seed = 777;
  } simulate;

  struct Sweep {
    std::vector<double> rhos{0.003, 0.03, 0.3};
  } sweep;

  std::string output_dir = ".";
  int threads = 1;
};

/// 50 + 20 cos(2 pi (h - 7) / 12) for hours h = 0..horizon-1: peaks of 70
/// at h = 7, 19 and troughs of 30 at h = 1, 13.
std::vector<double> synthetic_day_ahead(int horizon);

/// Throws ConfigError on malformed JSON, wrong types, unknown keys, or
/// out-of-range values.
RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::filesystem::path& path);
std::string config_to_json(const RunConfig& config, int indent = 2);

/// Applies STORVAL_OUTPUT_DIR and STORVAL_THREADS when set.
void apply_env_overrides(RunConfig& config);

/// Day-ahead curve in effect: explicit values, else the first `horizon`
/// rows of the CSV, else the synthetic curve.
std::vector<double> resolve_day_ahead(const RunConfig& config);

Problem to_problem(const RunConfig& config);
MarkovChain build_chain(const RunConfig& config);

}  // namespace storval
