#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "metricforge/kernel.hpp"

namespace metricforge {

// maximize  -1/2 sum_pq a_p a_q s_p s_q K_pq + sum_p linear_p a_p
// s.t.      sum_p a_p s_p = 0,  0 <= a_p <= cap
//
// With linear = 1 this is the standard SVM dual. The metric learners pass a
// general linear term, so the solver never assumes all-ones.
struct BoxEqQp {
  const KernelMatrix* kernel = nullptr;
  std::vector<double> linear;
  std::vector<double> signs;  // entries in {-1, +1}
  double cap = 1.0;
  double tol = 1e-6;
  std::optional<std::vector<double>> warm;
  long max_iter = 1'000'000;
  bool record_objective = false;
};

struct BoxEqSolution {
  std::vector<double> alphas;
  double bias = 0.0;
  double objective = 0.0;
  double kkt_residual = 0.0;
  long iterations = 0;
  // Only one sign present: the equality constraint pins alphas to zero.
  bool degenerate_equality = false;
  // False when no 0 < a_p < cap exists and the bias is the midpoint of the
  // KKT-implied interval.
  bool bias_from_free = false;
  std::vector<double> objective_history;
};

// Generalized SMO: maximal-violating i, second-order j, analytic two-variable
// step. Stops when the maximal KKT violation is <= tol. Throws
// ArgumentError on malformed problems and NumericalError on negative
// curvature or when max_iter is exhausted.
BoxEqSolution solve_box_eq(const BoxEqQp& problem);

// maximize  -1/2 mu^T K mu + linear^T mu   s.t. mu >= 0
struct NonnegQp {
  const KernelMatrix* kernel = nullptr;
  std::vector<double> linear;
  double tol = 1e-6;
  std::optional<std::vector<double>> warm;
  long max_sweeps = 1'000'000;
  bool record_objective = false;
};

struct NonnegSolution {
  std::vector<double> mus;
  double objective = 0.0;
  double kkt_residual = 0.0;
  long sweeps = 0;
  long updates = 0;
  // Set when K_pp == 0 while linear_p > tol: the objective is unbounded along
  // coordinate p. The remaining fields then describe the last iterate.
  std::optional<std::size_t> unbounded_index;
  std::vector<double> objective_history;
};

// Cyclic projected coordinate ascent
//   mu_p <- max(0, mu_p + (linear_p - (K mu)_p) / K_pp)
// with an incrementally maintained gradient.
NonnegSolution solve_nonneg(const NonnegQp& problem);

// Objective helpers shared with callers that need to re-evaluate a point.
double box_eq_objective(const KernelMatrix& kernel, const std::vector<double>& linear,
                        const std::vector<double>& signs, const std::vector<double>& alphas);
double nonneg_objective(const KernelMatrix& kernel, const std::vector<double>& linear,
                        const std::vector<double>& mus);

}  // namespace metricforge
