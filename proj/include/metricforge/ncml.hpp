#pragma once

#include <cstdint>
#include <vector>

#include "metricforge/kernel.hpp"
#include "metricforge/model.hpp"
#include "metricforge/pairs.hpp"
#include "metricforge/pcml.hpp"
#include "metricforge/trace.hpp"

namespace metricforge {

// Nonnegative-coefficient constrained metric learning. M is restricted to
// sum_p alpha_p X_p with alpha >= 0, which is PSD because every X_p is a
// rank-one PSD matrix. Each outer iteration solves two QPs:
//
//   delta = 1 - h o (K eta)         beta  <- box/equality QP with linear term delta
//   gamma = K (h o beta)            mu    <- nonnegative QP with linear term gamma
//   eta   = mu - h o beta
//
// and the recovered coefficients are alpha = mu.

struct NcmlConfig {
  double C = 0.5;
  double eps = 0.01;
  int max_iter = 100;
  double qp_tol = 1e-6;
  double init_eta_scale = 1e-3;
  std::uint64_t seed = 1;
  std::size_t dense_cap = kDefaultDenseGramCap;
};

void validate(const NcmlConfig& config);

struct NcmlState {
  std::vector<double> beta;
  std::vector<double> eta;
  std::vector<double> mu;
  std::vector<double> delta;  // linear term beta was solved with
  std::vector<double> gamma;  // linear term mu was solved with
  double bias = 0.0;
};

struct NcmlLinearTerms {
  std::vector<double> delta;  // 1 - h_p (K eta)_p
  std::vector<double> gamma;  // (K (h o beta))_p
};

NcmlLinearTerms ncml_linear_terms(const NcmlState& state, const KernelMatrix& kernel,
                                  const std::vector<double>& signs);

// b = mean over 0 < beta_p < C of (delta'_p / h_p - gamma_p) where
// delta' = 1 - h o (K eta) is evaluated at the current eta.
BiasAndSlacks ncml_bias_and_slacks(const NcmlState& state, const KernelMatrix& kernel,
                                   const std::vector<double>& signs, double C,
                                   SlackRule rule = SlackRule::kHinge);

// C sum xi - sum beta + sum mu_p gamma_p. Relies on mu being solved for the
// current gamma. Throws NumericalError below -1e-6 * scale.
double ncml_duality_gap(const NcmlState& state, const KernelMatrix& kernel,
                        const std::vector<double>& signs, const NcmlConfig& config,
                        SlackRule rule = SlackRule::kHinge);

struct NcmlObjectives {
  double primal = 0.0;  // 1/2 mu^T K mu + C sum xi
  double dual = 0.0;    // -1/2 (h o beta + eta)^T K (h o beta + eta) + sum beta
};
NcmlObjectives ncml_objectives(const NcmlState& state, const KernelMatrix& kernel,
                               const std::vector<double>& signs, double C,
                               SlackRule rule = SlackRule::kHinge);

// Duality gap of the eta-subproblem against its mu-dual, including the
// constant -1/2 (h o beta)^T K (h o beta) the simplified dual drops:
//   [1/2 eta^T K eta + eta^T gamma] - [-1/2 mu^T K mu + gamma^T mu - 1/2 v^T K v]
// which vanishes at the subproblem optimum.
double ncml_inner_gap(const NcmlState& state, const KernelMatrix& kernel,
                      const std::vector<double>& signs);

struct NcmlResult {
  MetricModel model;
  TrainTrace trace;
  NcmlState state;
  bool converged = false;
  int iterations = 0;
};

// Per-iteration hook for diagnostics; sees the state once eta is updated.
using NcmlObserver = std::function<void(int iteration, const NcmlState&, const KernelMatrix&)>;

NcmlResult train_ncml(const PairSet& pairs, const NcmlConfig& config, const ProgressSink& sink = {},
                      const NcmlObserver& observer = {});

}  // namespace metricforge
