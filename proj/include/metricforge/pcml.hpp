#pragma once

#include <cstddef>
#include <vector>

#include "metricforge/linalg.hpp"
#include "metricforge/model.hpp"
#include "metricforge/pairs.hpp"
#include "metricforge/trace.hpp"

namespace metricforge {

// Positive-semidefinite constrained metric learning:
//
//   min_{M, b, xi}  1/2 ||M||_F^2 + C sum_p xi_p
//   s.t.            h_p (<M, X_p> + b) >= 1 - xi_p,  xi_p >= 0,  M PSD
//
// solved on the dual by alternating an SVM-type solve over lambda (Y fixed)
// with a PSD projection for Y (lambda fixed). M = sum_p lambda_p h_p X_p + Y.

struct PcmlConfig {
  double C = 0.5;
  double eps = 0.01;
  int max_iter = 100;
  double qp_tol = 1e-6;
  std::size_t dense_cap = kDefaultDenseGramCap;
};

void validate(const PcmlConfig& config);

// How slacks are assigned when evaluating the duality gap.
enum class SlackRule {
  // xi_p = [1 - h_p(<M, X_p> + b)]_+ for every pair. Always primal feasible,
  // so the gap is nonnegative at every iterate.
  kHinge,
  // xi_p = 0 when lambda_p < C, hinge otherwise. Equals kHinge at the optimum.
  kKktBranch,
};

struct PcmlState {
  std::vector<double> lambda;
  std::vector<double> eta;  // 1 - h_p <X_p, Y_prev>, the linear term lambda was solved with
  SymMatrix y;              // projection of y0
  SymMatrix y0;             // -sum_p lambda_p h_p X_p
  std::vector<double> negative_part;  // max(-eig(y0), 0)
  double bias = 0.0;
};

struct BiasAndSlacks {
  double bias = 0.0;
  std::vector<double> xi;
  bool from_free = false;  // false: KKT-interval midpoint fallback
};

// M = sum_p lambda_p h_p X_p + Y  (== Y - Y0)
SymMatrix pcml_metric(const PcmlState& state, const PairSet& pairs);

// b = mean over 0 < lambda_p < C of (1/h_p - <M, X_p>), then slacks per rule.
BiasAndSlacks pcml_bias_and_slacks(const PcmlState& state, const PairSet& pairs, double C,
                                   SlackRule rule = SlackRule::kHinge);

// C sum xi - sum lambda + tr(Lambda_-^2). Throws NumericalError if the result
// is below -1e-6 * scale.
double pcml_duality_gap(const PcmlState& state, const PairSet& pairs, const PcmlConfig& config,
                        SlackRule rule = SlackRule::kHinge);

struct PcmlObjectives {
  double primal = 0.0;  // 1/2 ||M||_F^2 + C sum xi
  double dual = 0.0;    // -1/2 ||sum lambda h X + Y||_F^2 + sum lambda
};
PcmlObjectives pcml_objectives(const PcmlState& state, const PairSet& pairs, double C,
                               SlackRule rule = SlackRule::kHinge);

struct PcmlResult {
  MetricModel model;
  TrainTrace trace;
  PcmlState state;
  bool converged = false;
  int iterations = 0;
};

// Starts from Y = 0 and warm-starts lambda across iterations. Stops when
// gap(t) < eps * gap(1), or right after the first iteration if gap(1) is
// within C * P * qp_tol. On hitting max_iter returns the lowest-gap state with
// converged = false.
PcmlResult train_pcml(const PairSet& pairs, const PcmlConfig& config, const ProgressSink& sink = {});

}  // namespace metricforge
