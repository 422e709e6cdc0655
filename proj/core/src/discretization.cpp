#include "storval/discretization.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numbers>

#include "json.hpp"
#include "storval/errors.hpp"

namespace storval {

namespace {

// Orthonormal probabilists' Hermite recurrence:
//   p_0 = 1, p_{k+1} = (x p_k - sqrt(k) p_{k-1}) / sqrt(k+1).
// Returns p_n(x) and p_n'(x); `christoffel` receives sum_{k<n} p_k(x)^2.
struct HermiteEval {
  double value;
  double derivative;
  double christoffel;
};

HermiteEval hermite_orthonormal(int n, double x) {
  double p_prev = 0.0, p = 1.0;
  double d_prev = 0.0, d = 0.0;
  double sum_sq = 0.0;
  for (int k = 0; k < n; ++k) {
    sum_sq += p * p;
    const double sk = std::sqrt(static_cast<double>(k));
    const double sk1 = std::sqrt(static_cast<double>(k + 1));
    const double p_next = (x * p - sk * p_prev) / sk1;
    const double d_next = (p + x * d - sk * d_prev) / sk1;
    p_prev = p;
    p = p_next;
    d_prev = d;
    d = d_next;
  }
  return {p, d, sum_sq};
}

double log_normal_pdf(double x, double mean, double sd) {
  const double z = (x - mean) / sd;
  return -0.5 * z * z - std::log(sd) - 0.5 * std::log(2.0 * std::numbers::pi);
}

}  // namespace

QuadratureRule gauss_hermite(int n, double sigma) {
  if (n < 1) fail(ErrorKind::InvalidOrder, "quadrature order must be >= 1");
  if (!(sigma > 0.0)) fail(ErrorKind::InvalidArgument, "quadrature sigma must be > 0");

  const auto un = static_cast<std::size_t>(n);
  std::vector<double> x(un, 0.0);
  if (n > 1) {
    // Golub-Welsch start: eigenvalues of the Jacobi matrix.
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd sub(n - 1);
    for (int k = 1; k < n; ++k) sub(k - 1) = std::sqrt(static_cast<double>(k));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
    solver.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
    for (int i = 0; i < n; ++i) x[static_cast<std::size_t>(i)] = solver.eigenvalues()(i);
    std::sort(x.begin(), x.end());
    // Newton polish on p_n.
    for (auto& xi : x) {
      for (int it = 0; it < 8; ++it) {
        const auto h = hermite_orthonormal(n, xi);
        if (h.derivative == 0.0) break;
        const double step = h.value / h.derivative;
        xi -= step;
        if (std::abs(step) <= 1e-16 * std::max(1.0, std::abs(xi))) break;
      }
    }
    // enforce exact symmetry
    for (std::size_t i = 0; i < un / 2; ++i) {
      const double m = 0.5 * (x[un - 1 - i] - x[i]);
      x[i] = -m;
      x[un - 1 - i] = m;
    }
    if (n % 2 == 1) x[un / 2] = 0.0;
  }

  QuadratureRule rule;
  rule.nodes.resize(un);
  rule.weights.resize(un);
  double total = 0.0;
  for (std::size_t i = 0; i < un; ++i) {
    rule.weights[i] = 1.0 / hermite_orthonormal(n, x[i]).christoffel;
    total += rule.weights[i];
  }
  for (std::size_t i = 0; i < un; ++i) {
    rule.weights[i] /= total;
    rule.nodes[i] = sigma * x[i];
  }
  for (std::size_t i = 0; i < un / 2; ++i) {
    const double w = 0.5 * (rule.weights[i] + rule.weights[un - 1 - i]);
    rule.weights[i] = rule.weights[un - 1 - i] = w;
  }
  return rule;
}

MarkovChain build_chain(const PriceModel& model, int n, double sampling_std, int horizon) {
  if (n < 1) fail(ErrorKind::InvalidOrder, "node count must be >= 1");
  if (!(sampling_std > 0.0)) fail(ErrorKind::InvalidArgument, "sampling std must be > 0");
  if (horizon < 1) fail(ErrorKind::InvalidArgument, "horizon must be >= 1");

  const QuadratureRule rule = gauss_hermite(n, sampling_std);
  const auto un = static_cast<std::size_t>(n);
  const double a = model.ar_coefficient;
  const double sd = model.innovation_std;

  MarkovChain chain;
  chain.horizon = horizon;
  chain.nodes.reserve(static_cast<std::size_t>(horizon) + 1);
  chain.nodes.push_back({model.initial_deviation});
  for (int t = 1; t <= horizon; ++t) chain.nodes.push_back(rule.nodes);

  // Rows depend only on the source node value, so compute one matrix for the
  // root row and one for the shared node set.
  auto make_rows = [&](const std::vector<double>& sources) {
    TransitionMatrix p(sources.size(), un);
    std::vector<double> mass(sources.size(), 0.0);
    for (std::size_t j = 0; j < sources.size(); ++j) {
      const double mean = a * sources[j];
      auto row = p.row(j);
      if (sd > 0.0) {
        for (std::size_t i = 0; i < un; ++i) {
          const double log_ratio = log_normal_pdf(rule.nodes[i], mean, sd) -
                                   log_normal_pdf(rule.nodes[i], 0.0, sampling_std);
          row[i] = std::exp(log_ratio) * rule.weights[i];
        }
      } else {
        std::size_t best = 0;
        for (std::size_t i = 1; i < un; ++i) {
          if (std::abs(rule.nodes[i] - mean) < std::abs(rule.nodes[best] - mean)) best = i;
        }
        row[best] = 1.0;
      }
      double sum = 0.0;
      for (double v : row) sum += v;
      if (!(sum >= 1e-12)) {
        fail(ErrorKind::NumericalUnderflow,
             "raw transition mass " + std::to_string(sum) + " from node value " +
                 std::to_string(sources[j]) + "; sampling density mismatched");
      }
      for (double& v : row) v /= sum;
      mass[j] = sum;
    }
    return std::pair{std::move(p), std::move(mass)};
  };

  auto [root_rows, root_mass] = make_rows(chain.nodes[0]);
  auto [inner_rows, inner_mass] = make_rows(rule.nodes);
  chain.transitions.push_back(std::move(root_rows));
  chain.raw_row_mass.push_back(std::move(root_mass));
  for (int t = 1; t < horizon; ++t) {
    chain.transitions.push_back(inner_rows);
    chain.raw_row_mass.push_back(inner_mass);
  }
  return chain;
}

std::size_t nearest_node(const MarkovChain& chain, int stage, double deviation) {
  if (stage < 1 || stage > chain.horizon) {
    fail(ErrorKind::StageOutOfRange, "stage " + std::to_string(stage) + " outside 1.." +
                                         std::to_string(chain.horizon));
  }
  const auto& nodes = chain.nodes[static_cast<std::size_t>(stage)];
  const auto it = std::lower_bound(nodes.begin(), nodes.end(), deviation);
  if (it == nodes.begin()) return 0;
  if (it == nodes.end()) return nodes.size() - 1;
  const auto hi = static_cast<std::size_t>(it - nodes.begin());
  const auto lo = hi - 1;
  return (deviation - nodes[lo] <= nodes[hi] - deviation) ? lo : hi;
}

double default_sampling_std(const PriceModel& model) {
  const double s = model.stationary_std();
  return s > 0.0 ? s : 1.0;
}

MarkovChain build_chain(const PriceModel& model, int n, std::optional<double> sampling_std) {
  return build_chain(model, n, sampling_std.value_or(default_sampling_std(model)), model.horizon());
}

std::string chain_to_json(const MarkovChain& chain, int indent) {
  nlohmann::json doc;
  doc["horizon"] = chain.horizon;
  doc["nodes"] = chain.nodes;
  auto transitions = nlohmann::json::array();
  for (const auto& p : chain.transitions) {
    auto rows = nlohmann::json::array();
    for (std::size_t r = 0; r < p.rows(); ++r) {
      const auto row = p.row(r);
      rows.push_back(std::vector<double>(row.begin(), row.end()));
    }
    transitions.push_back(std::move(rows));
  }
  doc["transitions"] = std::move(transitions);
  return doc.dump(indent);
}

}  // namespace storval
