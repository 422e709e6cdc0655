#pragma once

#include <array>
#include <span>
#include <vector>

namespace storval::lp {

using Vec3 = std::array<double, 3>;

/// Half-space coefficients . z >= rhs.
struct Row {
  Vec3 coefficients;
  double rhs;
};

struct Solution {
  Vec3 point{};                // optimal z
  double objective = 0.0;      // c . z
  std::vector<double> duals;   // one per row, >= 0; sum_r duals[r] * row_r = c
  std::array<int, 3> basis{};  // active rows at the optimum
  int pivots = 0;
};

struct Options {
  double feasibility_tol = 1e-10;  // relative to max(1, |rhs|)
  double pivot_tol = 1e-11;
  double relative_pivot_tol = 1e-7; // pivots below this share of the largest are skipped
  double harris_tol = 1e-12;       // dual relaxation in the ratio test
  int max_pivots = 20000;
  double perturbation = 1e-9;      // relative objective shift used after cycling
};

/// Minimizes c . z over {z in R^3 : row_r . z >= rhs_r for all r}.
///
/// Works on the dual  max rhs . y  s.t.  sum_r y_r row_r = c,  y >= 0  with a
/// 3x3 basis of active rows. `start` must be dual feasible: the active rows
/// are linearly independent and c is a nonnegative combination of them.
/// Entering rows are chosen by largest normalized violation; after a
/// degenerate pivot the rule switches to Bland's smallest-index choice until
/// progress resumes. The ratio test uses a Harris pass (largest pivot among
/// near-ties). If round-off still makes the method cycle, it restarts once
/// with the objective perturbed by `perturbation` (relative).
///
/// Throws Infeasible when the rows admit no point and MaxIterations when the
/// pivot budget is exhausted.
Solution minimize(const Vec3& c, std::span<const Row> rows, const std::array<int, 3>& start,
                  const Options& options = {});

}  // namespace storval::lp
