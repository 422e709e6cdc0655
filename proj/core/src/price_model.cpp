#include "storval/price_model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numeric>
#include <random>
#include <string_view>

#include "storval/errors.hpp"
#include "storval/rng.hpp"

namespace storval {

void PriceModel::validate() const {
  if (day_ahead.empty()) fail(ErrorKind::InvalidArgument, "day-ahead curve is empty");
  if (!(innovation_std >= 0.0)) fail(ErrorKind::InvalidArgument, "innovation std must be >= 0");
  if (!(spread >= 0.0)) fail(ErrorKind::InvalidArgument, "spread must be >= 0");
  for (double v : day_ahead) {
    if (!std::isfinite(v)) fail(ErrorKind::InvalidArgument, "day-ahead curve has non-finite entries");
  }
}

double PriceModel::stationary_std() const {
  if (!(std::abs(ar_coefficient) < 1.0)) {
    fail(ErrorKind::InvalidArgument, "stationary std needs |a| < 1");
  }
  return innovation_std / std::sqrt(1.0 - ar_coefficient * ar_coefficient);
}

BidAsk bid_ask(const PriceModel& model, int stage, double deviation) {
  if (stage < 1 || stage > model.horizon()) {
    fail(ErrorKind::StageOutOfRange, "stage " + std::to_string(stage) + " outside 1.." +
                                         std::to_string(model.horizon()));
  }
  const double mid = model.day_ahead[static_cast<std::size_t>(stage - 1)] + deviation;
  return {mid - model.spread, mid + model.spread};
}

std::vector<double> simulate_deviation_path(const PriceModel& model, int horizon,
                                            std::uint64_t rng_seed) {
  if (horizon < 1) fail(ErrorKind::InvalidArgument, "horizon must be >= 1");
  Engine engine = seeded_engine(rng_seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> path(static_cast<std::size_t>(horizon));
  double xi = model.initial_deviation;
  for (auto& value : path) {
    xi = model.ar_coefficient * xi + model.innovation_std * normal(engine);
    value = xi;
  }
  return path;
}

RegressionFit fit_ar(const std::vector<double>& deviations) {
  const std::size_t n = deviations.size();
  if (n < 3) fail(ErrorKind::DegenerateInput, "need at least 3 deviations");

  const std::size_t pairs = n - 1;
  double mean_x = 0.0, mean_y = 0.0;
  for (std::size_t t = 0; t < pairs; ++t) {
    mean_x += deviations[t];
    mean_y += deviations[t + 1];
  }
  mean_x /= static_cast<double>(pairs);
  mean_y /= static_cast<double>(pairs);

  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t t = 0; t < pairs; ++t) {
    const double dx = deviations[t] - mean_x;
    const double dy = deviations[t + 1] - mean_y;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (!(sxx > 0.0)) fail(ErrorKind::DegenerateInput, "regressor has zero variance");

  RegressionFit fit;
  fit.n_obs = pairs;
  fit.slope = sxy / sxx;
  fit.intercept = mean_y - fit.slope * mean_x;

  double ssr = 0.0;
  for (std::size_t t = 0; t < pairs; ++t) {
    const double e = deviations[t + 1] - fit.intercept - fit.slope * deviations[t];
    ssr += e * e;
  }
  fit.r_squared = syy > 0.0 ? std::clamp(1.0 - ssr / syy, 0.0, 1.0) : 1.0;

  // r_t = xi_{t+1} - a xi_t; population std about the mean
  double mean_r = 0.0;
  for (std::size_t t = 0; t < pairs; ++t) mean_r += deviations[t + 1] - fit.slope * deviations[t];
  mean_r /= static_cast<double>(pairs);
  double var_r = 0.0;
  for (std::size_t t = 0; t < pairs; ++t) {
    const double r = deviations[t + 1] - fit.slope * deviations[t] - mean_r;
    var_r += r * r;
  }
  fit.residual_std = std::sqrt(var_r / static_cast<double>(pairs));
  return fit;
}

std::vector<double> deviations_from_series(const PriceSeries& series) {
  if (series.day_ahead.size() != series.id1.size() ||
      (!series.timestamps.empty() && series.timestamps.size() != series.id1.size())) {
    fail(ErrorKind::LengthMismatch, "price series columns differ in length");
  }
  std::vector<double> out(series.id1.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = series.id1[i] - series.day_ahead[i];
  return out;
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

bool parse_double(std::string_view text, double& out) {
  text = trim(text);
  if (text.empty()) return false;
  if (text.front() == '+') text.remove_prefix(1);
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, out);
  return ec == std::errc() && ptr == end && std::isfinite(out);
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return fields;
}

}  // namespace

CsvIngest read_price_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::DataError, "cannot open " + path.string());

  std::string line;
  if (!std::getline(in, line)) fail(ErrorKind::DataError, "empty file " + path.string());
  std::string_view header = line;
  if (header.size() >= 3 && header.substr(0, 3) == "\xEF\xBB\xBF") header.remove_prefix(3);
  const auto names = split_commas(trim(header));
  if (names.size() != 3 || trim(names[0]) != "timestamp" || trim(names[1]) != "day_ahead" ||
      trim(names[2]) != "id1") {
    fail(ErrorKind::DataError, "expected header 'timestamp,day_ahead,id1' in " + path.string());
  }

  CsvIngest result;
  while (std::getline(in, line)) {
    const std::string_view row = trim(line);
    if (row.empty()) continue;
    const auto fields = split_commas(row);
    double da = 0.0, id1 = 0.0;
    if (fields.size() != 3 || trim(fields[0]).empty() || !parse_double(fields[1], da) ||
        !parse_double(fields[2], id1)) {
      ++result.dropped_rows;
      continue;
    }
    result.series.timestamps.emplace_back(trim(fields[0]));
    result.series.day_ahead.push_back(da);
    result.series.id1.push_back(id1);
  }
  if (result.dropped_rows > 0) {
    std::clog << "warning: dropped " << result.dropped_rows << " malformed row(s) from "
              << path.string() << '\n';
  }
  return result;
}

}  // namespace storval
