#include "storval/config.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "json.hpp"
#include "storval/errors.hpp"

namespace storval {

using nlohmann::json;

namespace {

void reject_unknown(const json& obj, const std::string& where, const std::set<std::string>& allowed) {
  if (!obj.is_object()) fail(ErrorKind::ConfigError, where + " must be an object");
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.count(key)) fail(ErrorKind::ConfigError, "unknown key '" + key + "' in " + where);
  }
}

template <typename T>
void read(const json& obj, const char* key, T& target, const std::string& where) {
  if (!obj.contains(key)) return;
  try {
    target = obj.at(key).get<T>();
  } catch (const json::exception&) {
    fail(ErrorKind::ConfigError, where + "." + key + " has the wrong type");
  }
}

template <typename T>
void read(const json& obj, const char* key, std::optional<T>& target, const std::string& where) {
  if (!obj.contains(key) || obj.at(key).is_null()) return;
  T value{};
  read(obj, key, value, where);
  target = value;
}

void require(bool ok, const std::string& message) {
  if (!ok) fail(ErrorKind::ConfigError, message);
}

}  // namespace

std::vector<double> synthetic_day_ahead(int horizon) {
  std::vector<double> curve(static_cast<std::size_t>(std::max(horizon, 0)));
  for (int h = 0; h < horizon; ++h) {
    curve[static_cast<std::size_t>(h)] = 50.0 + 20.0 * std::cos(2.0 * std::numbers::pi * (h - 7) / 12.0);
  }
  return curve;
}

RunConfig parse_config(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    fail(ErrorKind::ConfigError, std::string("config is not valid JSON: ") + e.what());
  }
  reject_unknown(doc, "config",
                 {"horizon", "battery", "market", "price", "utility", "sddp", "simulate", "sweep", "output_dir",
                  "threads"});
  RunConfig c;
  read(doc, "horizon", c.horizon, "config");
  read(doc, "output_dir", c.output_dir, "config");
  read(doc, "threads", c.threads, "config");
  if (doc.contains("battery")) {
    const auto& b = doc["battery"];
    reject_unknown(b, "battery", {"capacity_mwh", "alpha", "c_plus", "c_minus", "leakage"});
    read(b, "capacity_mwh", c.battery.capacity_mwh, "battery");
    read(b, "alpha", c.battery.alpha, "battery");
    read(b, "c_plus", c.battery.c_plus, "battery");
    read(b, "c_minus", c.battery.c_minus, "battery");
    read(b, "leakage", c.battery.leakage, "battery");
  }
  if (doc.contains("market")) {
    const auto& m = doc["market"];
    reject_unknown(m, "market", {"spread_eur", "day_ahead", "day_ahead_csv"});
    read(m, "spread_eur", c.market.spread_eur, "market");
    read(m, "day_ahead", c.market.day_ahead, "market");
    read(m, "day_ahead_csv", c.market.day_ahead_csv, "market");
  }
  if (doc.contains("price")) {
    const auto& p = doc["price"];
    reject_unknown(p, "price", {"a", "sigma_eps", "xi0", "sampling_std"});
    read(p, "a", c.price.a, "price");
    read(p, "sigma_eps", c.price.sigma_eps, "price");
    read(p, "xi0", c.price.xi0, "price");
    read(p, "sampling_std", c.price.sampling_std, "price");
  }
  if (doc.contains("utility")) {
    const auto& u = doc["utility"];
    reject_unknown(u, "utility", {"rho", "initial_wealth"});
    read(u, "rho", c.utility.rho, "utility");
    read(u, "initial_wealth", c.utility.initial_wealth, "utility");
  }
  if (doc.contains("sddp")) {
    const auto& s = doc["sddp"];
    reject_unknown(s, "sddp", {"quadrature_points", "iterations", "seed"});
    read(s, "quadrature_points", c.sddp.quadrature_points, "sddp");
    read(s, "iterations", c.sddp.iterations, "sddp");
    read(s, "seed", c.sddp.seed, "sddp");
  }
  if (doc.contains("simulate")) {
    const auto& s = doc["simulate"];
    reject_unknown(s, "simulate", {"scenarios", "seed"});
    read(s, "scenarios", c.simulate.scenarios, "simulate");
    read(s, "seed", c.simulate.seed, "simulate");
  }
  if (doc.contains("sweep")) {
    const auto& s = doc["sweep"];
    reject_unknown(s, "sweep", {"rhos"});
    read(s, "rhos", c.sweep.rhos, "sweep");
  }

  require(c.horizon >= 1, "horizon must be >= 1");
  require(c.market.day_ahead.empty() || static_cast<int>(c.market.day_ahead.size()) == c.horizon,
          "market.day_ahead must have exactly horizon entries");
  require(c.market.spread_eur >= 0.0, "market.spread_eur must be >= 0");
  require(c.price.sigma_eps >= 0.0, "price.sigma_eps must be >= 0");
  require(std::abs(c.price.a) < 1.0, "price.a must satisfy |a| < 1");
  require(!c.price.sampling_std || *c.price.sampling_std > 0.0, "price.sampling_std must be > 0");
  require(c.utility.rho > 0.0, "utility.rho must be > 0");
  require(c.sddp.quadrature_points >= 1, "sddp.quadrature_points must be >= 1");
  require(c.sddp.iterations >= 1, "sddp.iterations must be >= 1");
  require(c.simulate.scenarios >= 1, "simulate.scenarios must be >= 1");
  require(c.threads >= 1, "threads must be >= 1");
  for (double r : c.sweep.rhos) require(r > 0.0, "sweep.rhos must be > 0");
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::ConfigError, "cannot open config " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string config_to_json(const RunConfig& c, int indent) {
  json doc;
  doc["horizon"] = c.horizon;
  doc["battery"] = {{"capacity_mwh", c.battery.capacity_mwh}, {"alpha", c.battery.alpha},
                    {"c_plus", c.battery.c_plus},             {"c_minus", c.battery.c_minus},
                    {"leakage", c.battery.leakage}};
  doc["market"] = {{"spread_eur", c.market.spread_eur}, {"day_ahead", c.market.day_ahead}};
  if (c.market.day_ahead_csv) doc["market"]["day_ahead_csv"] = *c.market.day_ahead_csv;
  doc["price"] = {{"a", c.price.a}, {"sigma_eps", c.price.sigma_eps}, {"xi0", c.price.xi0}};
  if (c.price.sampling_std) doc["price"]["sampling_std"] = *c.price.sampling_std;
  doc["utility"] = {{"rho", c.utility.rho}, {"initial_wealth", c.utility.initial_wealth}};
  doc["sddp"] = {{"quadrature_points", c.sddp.quadrature_points},
                 {"iterations", c.sddp.iterations},
                 {"seed", c.sddp.seed}};
  doc["simulate"] = {{"scenarios", c.simulate.scenarios}, {"seed", c.simulate.seed}};
  doc["sweep"] = {{"rhos", c.sweep.rhos}};
  doc["output_dir"] = c.output_dir;
  doc["threads"] = c.threads;
  return doc.dump(indent);
}

void apply_env_overrides(RunConfig& config) {
  if (const char* dir = std::getenv("STORVAL_OUTPUT_DIR"); dir && *dir) config.output_dir = dir;
  if (const char* threads = std::getenv("STORVAL_THREADS"); threads && *threads) {
    char* end = nullptr;
    const long n = std::strtol(threads, &end, 10);
    if (*end != '\0' || n < 1) fail(ErrorKind::ConfigError, "STORVAL_THREADS must be a positive integer");
    config.threads = static_cast<int>(n);
  }
}

std::vector<double> resolve_day_ahead(const RunConfig& config) {
  if (!config.market.day_ahead.empty()) return config.market.day_ahead;
  if (config.market.day_ahead_csv) {
    const auto ingest = read_price_csv(*config.market.day_ahead_csv);
    if (static_cast<int>(ingest.series.size()) < config.horizon) {
      fail(ErrorKind::DataError, "day-ahead CSV has fewer rows than the horizon");
    }
    return {ingest.series.day_ahead.begin(), ingest.series.day_ahead.begin() + config.horizon};
  }
  return synthetic_day_ahead(config.horizon);
}

Problem to_problem(const RunConfig& config) {
  Problem p;
  p.price.day_ahead = resolve_day_ahead(config);
  p.price.ar_coefficient = config.price.a;
  p.price.innovation_std = config.price.sigma_eps;
  p.price.spread = config.market.spread_eur;
  p.price.initial_deviation = config.price.xi0;
  p.battery.capacity = config.battery.capacity_mwh;
  p.battery.speed_fraction = config.battery.alpha;
  p.battery.charge_eff = config.battery.c_plus;
  p.battery.discharge_eff = config.battery.c_minus;
  p.battery.leakage = config.battery.leakage;
  p.utility.risk_aversion = config.utility.rho;
  p.utility.initial_wealth = config.utility.initial_wealth;
  try {
    p.validate();
  } catch (const Error& e) {
    if (e.category() == ErrorCategory::Numerical) throw;
    fail(ErrorKind::ConfigError, e.what());
  }
  return p;
}

MarkovChain build_chain(const RunConfig& config) {
  const Problem p = to_problem(config);
  return build_chain(p.price, config.sddp.quadrature_points, config.price.sampling_std);
}

}  // namespace storval
