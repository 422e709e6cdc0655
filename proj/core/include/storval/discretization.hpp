#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "storval/price_model.hpp"

namespace storval {

/// Nodes and weights with sum_i w_i g(x_i) ~ E[g(Z)], Z ~ N(0, sigma^2).
/// Nodes are strictly increasing and the weights sum to one.
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t size() const noexcept { return nodes.size(); }
};

/// Gauss-Hermite rule for N(0, sigma^2); exact for polynomials of degree
/// <= 2n - 1. Throws InvalidOrder if n < 1, InvalidArgument if sigma <= 0.
QuadratureRule gauss_hermite(int n, double sigma);

/// Dense row-major matrix of transition probabilities.
class TransitionMatrix {
 public:
  TransitionMatrix() = default;
  TransitionMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }

  bool operator==(const TransitionMatrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Finite-state approximation of the deviation process.
///
/// Stage 0 holds the single root node xi_0; stages 1..horizon hold the
/// quadrature nodes. transitions[t] maps stage-t nodes to stage-(t+1) nodes
/// for t = 0..horizon-1, and raw_row_mass[t][j] is the row sum before
/// normalization.
struct MarkovChain {
  int horizon = 0;
  std::vector<std::vector<double>> nodes;
  std::vector<TransitionMatrix> transitions;
  std::vector<std::vector<double>> raw_row_mass;

  std::size_t node_count(int stage) const { return nodes.at(static_cast<std::size_t>(stage)).size(); }
  double node_value(int stage, std::size_t node) const {
    return nodes.at(static_cast<std::size_t>(stage)).at(node);
  }
  std::span<const double> transition_row(int stage, std::size_t node) const {
    return transitions.at(static_cast<std::size_t>(stage)).row(node);
  }
};

/// Builds the chain from importance-reweighted quadrature:
///   raw p^{ji} = N(xi^i; a xi^j, sigma_eps^2) / N(xi^i; 0, sampling_std^2) * w^i,
/// then normalizes each row. With innovation_std == 0 the conditional law is
/// a point mass and each row puts probability one on the node nearest to
/// a * xi^j. Throws NumericalUnderflow when a raw row sums below 1e-12.
MarkovChain build_chain(const PriceModel& model, int n, double sampling_std, int horizon);

/// Stationary std of the deviation process, or 1 when it is zero.
double default_sampling_std(const PriceModel& model);

/// build_chain over the model's horizon with default_sampling_std unless given.
MarkovChain build_chain(const PriceModel& model, int n, std::optional<double> sampling_std = std::nullopt);

/// Index of the stage node closest to `deviation`; ties go to the smaller
/// index. Throws StageOutOfRange unless 1 <= stage <= horizon.
std::size_t nearest_node(const MarkovChain& chain, int stage, double deviation);

/// {horizon, nodes: [[...]], transitions: [[[...]]]}
std::string chain_to_json(const MarkovChain& chain, int indent = 2);

}  // namespace storval
