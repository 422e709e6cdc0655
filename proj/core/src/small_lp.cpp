#include "storval/small_lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include "storval/errors.hpp"

namespace storval::lp {

namespace {

using Mat3 = std::array<Vec3, 3>;

double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

// Inverse of the matrix whose rows are m[0..2]; nullopt if exactly singular.
std::optional<Mat3> inverse(const Mat3& m) {
  const double a = m[0][0], b = m[0][1], c = m[0][2];
  const double d = m[1][0], e = m[1][1], f = m[1][2];
  const double g = m[2][0], h = m[2][1], i = m[2][2];
  const double A = e * i - f * h, B = -(d * i - f * g), C = d * h - e * g;
  const double det = a * A + b * B + c * C;
  const double inv = 1.0 / det;
  if (det == 0.0 || !std::isfinite(inv)) return std::nullopt;
  Mat3 r;
  r[0] = {A * inv, -(b * i - c * h) * inv, (b * f - c * e) * inv};
  r[1] = {B * inv, (a * i - c * g) * inv, -(a * f - c * d) * inv};
  r[2] = {C * inv, -(a * h - b * g) * inv, (a * e - b * d) * inv};
  return r;
}

Vec3 mul(const Mat3& m, const Vec3& v) { return {dot(m[0], v), dot(m[1], v), dot(m[2], v)}; }

// (m^T) v
Vec3 mul_transposed(const Mat3& m, const Vec3& v) {
  Vec3 out{};
  for (std::size_t k = 0; k < 3; ++k) {
    for (std::size_t j = 0; j < 3; ++j) out[j] += m[k][j] * v[k];
  }
  return out;
}

}  // namespace

namespace {

// Dual simplex from `start`; nullopt once more than pivot_limit pivots are
// needed or a pivot lands on a singular basis.
std::optional<Solution> run(const Vec3& c, std::span<const Row> rows, const std::array<int, 3>& start,
                            const Options& options, int pivot_limit) {
  const auto n_rows = rows.size();
  std::array<int, 3> basis = start;
  for (int b : basis) {
    if (b < 0 || static_cast<std::size_t>(b) >= n_rows) fail(ErrorKind::InvalidArgument, "start basis out of range");
  }

  std::vector<char> in_basis(n_rows, 0);
  for (int b : basis) in_basis[static_cast<std::size_t>(b)] = 1;

  auto basis_matrix = [&] {
    Mat3 m;
    for (std::size_t k = 0; k < 3; ++k) m[k] = rows[static_cast<std::size_t>(basis[k])].coefficients;
    return m;
  };

  const auto first = inverse(basis_matrix());
  if (!first) fail(ErrorKind::InvalidArgument, "start basis is singular");
  Mat3 inv = *first;
  // M z = h_B  ->  z = inv h_B ;  M^T y = c  ->  y = inv^T c
  Vec3 y = mul_transposed(inv, c);
  for (double v : y) {
    if (v < -1e-9) fail(ErrorKind::InvalidArgument, "start basis is not dual feasible");
  }
  for (double& v : y) v = std::max(v, 0.0);

  bool bland = false;
  int pivots = 0;
  Vec3 z{};
  while (true) {
    Vec3 h_b;
    for (std::size_t k = 0; k < 3; ++k) h_b[k] = rows[static_cast<std::size_t>(basis[k])].rhs;
    z = mul(inv, h_b);

    // pricing
    int entering = -1;
    double best = 0.0;
    for (std::size_t r = 0; r < n_rows; ++r) {
      if (in_basis[r]) continue;
      const auto& row = rows[r];
      const double violation = row.rhs - dot(row.coefficients, z);
      if (!(violation > options.feasibility_tol * std::max(1.0, std::abs(row.rhs)))) continue;
      if (bland) {
        entering = static_cast<int>(r);
        break;
      }
      const double score = violation / std::max(norm(row.coefficients), 1e-300);
      if (score > best) {
        best = score;
        entering = static_cast<int>(r);
      }
    }
    if (entering < 0) break;

    if (++pivots > pivot_limit) return std::nullopt;

    const Vec3 d = mul_transposed(inv, rows[static_cast<std::size_t>(entering)].coefficients);
    // Ratio test. Harris pass: bound the step with slightly relaxed duals,
    // then take the largest pivot element among rows within that bound.
    // In Bland mode the smallest row index among exact minima leaves.
    const double d_max = std::max({d[0], d[1], d[2]});
    const double pivot_floor = std::max(options.pivot_tol, options.relative_pivot_tol * d_max);
    int leave = -1;
    double step = 0.0;
    if (bland) {
      for (std::size_t k = 0; k < 3; ++k) {
        if (!(d[k] > pivot_floor)) continue;
        const double t = y[k] / d[k];
        if (leave < 0 || t < step || (t == step && basis[k] < basis[static_cast<std::size_t>(leave)])) {
          leave = static_cast<int>(k);
          step = t;
        }
      }
    } else {
      double relaxed = std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < 3; ++k) {
        if (d[k] > pivot_floor) relaxed = std::min(relaxed, (y[k] + options.harris_tol) / d[k]);
      }
      for (std::size_t k = 0; k < 3; ++k) {
        if (!(d[k] > pivot_floor) || y[k] / d[k] > relaxed) continue;
        if (leave < 0 || d[k] > d[static_cast<std::size_t>(leave)] ||
            (d[k] == d[static_cast<std::size_t>(leave)] && basis[k] < basis[static_cast<std::size_t>(leave)])) {
          leave = static_cast<int>(k);
        }
      }
      if (leave >= 0) step = std::max(0.0, y[static_cast<std::size_t>(leave)] / d[static_cast<std::size_t>(leave)]);
    }
    if (leave < 0) {
      // Only tiny pivots left: these are genuine when the objective lives on a
      // much larger scale than the controls, so take the largest one.
      for (std::size_t k = 0; k < 3; ++k) {
        if (d[k] > 0.0 && (leave < 0 || d[k] > d[static_cast<std::size_t>(leave)])) leave = static_cast<int>(k);
      }
      if (leave < 0) fail(ErrorKind::Infeasible, "stage LP has no feasible point");
      step = y[static_cast<std::size_t>(leave)] / d[static_cast<std::size_t>(leave)];
    }

    bland = step <= 1e-14;
    const auto lk = static_cast<std::size_t>(leave);
    in_basis[static_cast<std::size_t>(basis[lk])] = 0;
    basis[lk] = entering;
    in_basis[static_cast<std::size_t>(entering)] = 1;
    auto next = inverse(basis_matrix());
    if (!next) return std::nullopt;
    inv = *next;
    y = mul_transposed(inv, c);
    for (double& v : y) v = std::max(v, 0.0);
  }

  Solution sol;
  sol.point = z;
  sol.objective = dot(c, z);
  sol.duals.assign(n_rows, 0.0);
  for (std::size_t k = 0; k < 3; ++k) sol.duals[static_cast<std::size_t>(basis[k])] = y[k];
  sol.basis = basis;
  sol.pivots = pivots;
  return sol;
}

}  // namespace

Solution minimize(const Vec3& c, std::span<const Row> rows, const std::array<int, 3>& start,
                  const Options& options) {
  // Work on unit-norm rows so that pivot tolerances mean the same thing for
  // bound rows and for cuts with very steep slopes.
  std::vector<Row> scaled(rows.begin(), rows.end());
  std::vector<double> norms(rows.size(), 1.0);
  for (std::size_t r = 0; r < scaled.size(); ++r) {
    const double n = norm(scaled[r].coefficients);
    if (!(n > 0.0) || !std::isfinite(n)) continue;
    norms[r] = n;
    for (double& v : scaled[r].coefficients) v /= n;
    scaled[r].rhs /= n;
  }
  auto unscale = [&](Solution sol) {
    for (std::size_t r = 0; r < sol.duals.size(); ++r) sol.duals[r] /= norms[r];
    return sol;
  };

  const int soft_limit = std::min(options.max_pivots, 10 * static_cast<int>(rows.size()) + 100);
  if (auto sol = run(c, scaled, start, options, soft_limit)) return unscale(*sol);

  // Degenerate cycling or a singular pivot under round-off: restart with a
  // slightly perturbed objective so that no basic dual is exactly zero.
  const double scale = options.perturbation * std::max({std::abs(c[0]), std::abs(c[1]), std::abs(c[2]), 1.0});
  const Vec3 perturbed{c[0] + scale, c[1] + 0.618034 * scale, c[2] + 0.381966 * scale};
  if (auto sol = run(perturbed, scaled, start, options, options.max_pivots - soft_limit)) {
    sol->pivots += soft_limit;
    sol->objective = dot(c, sol->point);
    return unscale(*sol);
  }
  fail(ErrorKind::MaxIterations, "stage LP did not converge within " + std::to_string(options.max_pivots) + " pivots");
}

}  // namespace storval::lp
