#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace storval {

/// Intraday mid-price model s_t = day_ahead[t] + xi_t, where the deviation
/// follows xi_t = a * xi_{t-1} + eps_t with eps_t ~ N(0, innovation_std^2).
/// Bid and ask sit `spread` below and above the mid-price.
///
/// Stages are 1-based: stage t uses day_ahead[t - 1].
struct PriceModel {
  std::vector<double> day_ahead;  // EUR/MWh, one entry per stage
  double ar_coefficient = 0.0;
  double innovation_std = 0.0;    // EUR/MWh
  double spread = 0.0;            // EUR/MWh
  double initial_deviation = 0.0; // xi_0

  int horizon() const noexcept { return static_cast<int>(day_ahead.size()); }

  /// Throws InvalidArgument on negative std/spread or an empty curve.
  void validate() const;

  /// Stationary standard deviation innovation_std / sqrt(1 - a^2); requires |a| < 1.
  double stationary_std() const;
};

struct BidAsk {
  double bid;
  double ask;
};

/// bid = s̄_t + xi - spread, ask = s̄_t + xi + spread. Throws StageOutOfRange.
BidAsk bid_ask(const PriceModel& model, int stage, double deviation);

/// Deviation path xi_1..xi_horizon from xi_0 = model.initial_deviation.
/// A pure function of (model, horizon, seed).
std::vector<double> simulate_deviation_path(const PriceModel& model, int horizon,
                                            std::uint64_t rng_seed);

struct RegressionFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  double residual_std = 0.0;  // population std of xi_{t+1} - slope * xi_t
  std::size_t n_obs = 0;      // number of (xi_t, xi_{t+1}) pairs
};

/// OLS of xi_{t+1} on xi_t (with intercept). The residuals used for
/// residual_std omit the intercept; their mean is removed before taking the
/// standard deviation.
RegressionFit fit_ar(const std::vector<double>& deviations);

struct PriceSeries {
  std::vector<std::string> timestamps;
  std::vector<double> day_ahead;
  std::vector<double> id1;

  std::size_t size() const noexcept { return id1.size(); }
};

/// id1 - day_ahead, elementwise. Throws LengthMismatch.
std::vector<double> deviations_from_series(const PriceSeries& series);

struct CsvIngest {
  PriceSeries series;
  std::size_t dropped_rows = 0;
};

/// Reads `timestamp,day_ahead,id1` CSV. Rows with missing or unparsable
/// fields are dropped and counted. Throws DataError when the file cannot be
/// opened or the header does not match.
CsvIngest read_price_csv(const std::filesystem::path& path);

}  // namespace storval
