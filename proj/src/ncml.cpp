#include "metricforge/ncml.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <random>

#include "duality.hpp"
#include "metricforge/error.hpp"
#include "metricforge/qp.hpp"

namespace metricforge {

namespace {

double sum(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

double dotv(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t p = 0; p < a.size(); ++p) s += a[p] * b[p];
  return s;
}

std::vector<double> signed_beta(const NcmlState& state, const std::vector<double>& signs) {
  std::vector<double> v(signs.size());
  for (std::size_t p = 0; p < v.size(); ++p) v[p] = signs[p] * state.beta[p];
  return v;
}

void check_lengths(const NcmlState& s, const KernelMatrix& k, const std::vector<double>& signs) {
  const std::size_t n = k.size();
  if (signs.size() != n || s.beta.size() != n || s.eta.size() != n || s.mu.size() != n) {
    throw ArgumentError("ncml: state/kernel length mismatch");
  }
}

}  // namespace

void validate(const NcmlConfig& c) {
  if (!(c.C > 0) || !std::isfinite(c.C)) throw ArgumentError("ncml: C must be > 0");
  if (!(c.eps > 0 && c.eps < 1)) throw ArgumentError("ncml: eps must lie in (0, 1)");
  if (c.max_iter < 1) throw ArgumentError("ncml: max_iter must be >= 1");
  if (!(c.qp_tol > 0)) throw ArgumentError("ncml: qp_tol must be > 0");
  if (!(c.init_eta_scale >= 0)) throw ArgumentError("ncml: init_eta_scale must be >= 0");
}

NcmlLinearTerms ncml_linear_terms(const NcmlState& state, const KernelMatrix& kernel,
                                  const std::vector<double>& signs) {
  check_lengths(state, kernel, signs);
  NcmlLinearTerms out;
  const auto k_eta = kernel.multiply(state.eta);
  out.delta.resize(signs.size());
  for (std::size_t p = 0; p < signs.size(); ++p) out.delta[p] = 1.0 - signs[p] * k_eta[p];
  out.gamma = kernel.multiply(signed_beta(state, signs));
  return out;
}

BiasAndSlacks ncml_bias_and_slacks(const NcmlState& state, const KernelMatrix& kernel,
                                   const std::vector<double>& signs, double C, SlackRule rule) {
  check_lengths(state, kernel, signs);
  if (state.gamma.size() != signs.size()) throw ArgumentError("ncml: gamma not computed");
  const auto next = ncml_linear_terms(state, kernel, signs);
  std::vector<double> offsets(signs.size());
  for (std::size_t p = 0; p < signs.size(); ++p) {
    offsets[p] = next.delta[p] / signs[p] - state.gamma[p];
  }
  return detail::bias_and_slacks(offsets, signs, state.beta, C, rule);
}

double ncml_duality_gap(const NcmlState& state, const KernelMatrix& kernel,
                        const std::vector<double>& signs, const NcmlConfig& config, SlackRule rule) {
  const auto bs = ncml_bias_and_slacks(state, kernel, signs, config.C, rule);
  const double slack = config.C * sum(bs.xi);
  const double b = sum(state.beta);
  const double mg = dotv(state.mu, state.gamma);
  const double gap = slack - b + mg;
  const double scale = std::max({1.0, slack + 0.5 * std::abs(mg), std::abs(b) + 0.5 * std::abs(mg)});
  if (gap < -1e-6 * scale) {
    throw NumericalError("ncml_duality_gap: negative duality gap " + std::to_string(gap));
  }
  return gap;
}

NcmlObjectives ncml_objectives(const NcmlState& state, const KernelMatrix& kernel,
                               const std::vector<double>& signs, double C, SlackRule rule) {
  const auto bs = ncml_bias_and_slacks(state, kernel, signs, C, rule);
  const auto k_mu = kernel.multiply(state.mu);
  std::vector<double> alpha(signs.size());
  for (std::size_t p = 0; p < alpha.size(); ++p) alpha[p] = signs[p] * state.beta[p] + state.eta[p];
  const auto k_alpha = kernel.multiply(alpha);
  return {0.5 * dotv(state.mu, k_mu) + C * sum(bs.xi), -0.5 * dotv(alpha, k_alpha) + sum(state.beta)};
}

double ncml_inner_gap(const NcmlState& state, const KernelMatrix& kernel,
                      const std::vector<double>& signs) {
  check_lengths(state, kernel, signs);
  const auto v = signed_beta(state, signs);
  const auto gamma = kernel.multiply(v);
  const auto k_eta = kernel.multiply(state.eta);
  const auto k_mu = kernel.multiply(state.mu);
  const double primal = 0.5 * dotv(state.eta, k_eta) + dotv(state.eta, gamma);
  const double dual = -0.5 * dotv(state.mu, k_mu) + dotv(gamma, state.mu) - 0.5 * dotv(v, gamma);
  return primal - dual;
}

NcmlResult train_ncml(const PairSet& pairs, const NcmlConfig& config, const ProgressSink& sink,
                      const NcmlObserver& observer) {
  validate(config);
  if (pairs.size() == 0) throw ArgumentError("train_ncml: no constraints");
  if (pairs.count(1) == 0 || pairs.count(-1) == 0) {
    throw ArgumentError("train_ncml: need both similar and dissimilar constraints");
  }
  const auto start = std::chrono::steady_clock::now();
  const std::size_t n = pairs.size();
  const auto kernel = make_pair_kernel(pairs, config.dense_cap);
  const auto signs = pairs.signs();

  NcmlState state;
  state.beta.assign(n, 0.0);
  state.mu.assign(n, 0.0);
  state.eta.resize(n);
  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (double& e : state.eta) e = config.init_eta_scale * unif(rng);

  NcmlState best = state;
  double best_gap = std::numeric_limits<double>::infinity();
  TrainTrace trace;
  bool converged = false;
  int iterations = 0;
  bool warm = false;
  const double gap_floor = config.C * static_cast<double>(n) * config.qp_tol;

  // delta for the first pass; later passes refresh it at the bottom of the loop
  state.delta = ncml_linear_terms(state, *kernel, signs).delta;

  for (int t = 1; t <= config.max_iter; ++t) {
    iterations = t;

    BoxEqQp bq;
    bq.kernel = kernel.get();
    bq.linear = state.delta;
    bq.signs = signs;
    bq.cap = config.C;
    bq.tol = config.qp_tol;
    if (warm) bq.warm = state.beta;
    state.beta = solve_box_eq(bq).alphas;

    const auto v = signed_beta(state, signs);
    state.gamma = kernel->multiply(v);

    NonnegQp nq;
    nq.kernel = kernel.get();
    nq.linear = state.gamma;
    nq.tol = config.qp_tol;
    if (warm) nq.warm = state.mu;
    const auto mu_sol = solve_nonneg(nq);
    if (mu_sol.unbounded_index) {
      throw NumericalError("train_ncml: mu-subproblem unbounded along pair " +
                           std::to_string(*mu_sol.unbounded_index) + " (zero difference vector)");
    }
    state.mu = mu_sol.mus;
    warm = true;

    for (std::size_t p = 0; p < n; ++p) state.eta[p] = state.mu[p] - v[p];

    const auto bs = ncml_bias_and_slacks(state, *kernel, signs, config.C);
    state.bias = bs.bias;
    const double gap = ncml_duality_gap(state, *kernel, signs, config);
    const auto obj = ncml_objectives(state, *kernel, signs, config.C);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    trace.rows.push_back({t, obj.primal, obj.dual, gap, secs});
    if (sink) sink(trace.rows.back());
    if (observer) observer(t, state, *kernel);

    if (gap < best_gap) {
      best_gap = gap;
      best = state;
    }
    const double gap1 = trace.rows.front().gap;
    if ((t == 1 && gap1 <= gap_floor) || (t > 1 && gap < config.eps * gap1)) {
      converged = true;
      break;
    }
    // linear term for the next beta solve
    state.delta = ncml_linear_terms(state, *kernel, signs).delta;
  }

  const NcmlState& final_state = converged ? state : best;
  MetricCoefficients coeffs{final_state.mu, pairs.dim(), pairs.diffs()};
  ModelMeta meta{"ncml", config.C, config.eps, iterations, converged,
                 converged ? trace.rows.back().gap : best_gap};
  MetricModel model(weighted_outer_sum(pairs, final_state.mu), meta, std::move(coeffs));
  return {std::move(model), std::move(trace), final_state, converged, iterations};
}

}  // namespace metricforge
