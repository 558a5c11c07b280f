#include "metricforge/pcml.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "duality.hpp"
#include "metricforge/error.hpp"
#include "metricforge/kernel.hpp"
#include "metricforge/qp.hpp"

namespace metricforge {

namespace detail {

BiasAndSlacks bias_and_slacks(std::span<const double> offsets, std::span<const double> signs,
                              std::span<const double> multipliers, double C, SlackRule rule) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  const std::size_t n = offsets.size();
  BiasAndSlacks out;
  double sum = 0.0, lb = -inf, ub = inf;
  std::size_t n_free = 0;
  for (std::size_t p = 0; p < n; ++p) {
    const double a = multipliers[p];
    const double c = offsets[p];
    if (a > 0.0 && a < C) {
      sum += c;
      ++n_free;
    } else if (a <= 0.0) {
      // margin must hold: h (c - b) <= 0
      if (signs[p] > 0) lb = std::max(lb, c); else ub = std::min(ub, c);
    } else {
      // margin may be violated: h (c - b) >= 0
      if (signs[p] > 0) ub = std::min(ub, c); else lb = std::max(lb, c);
    }
  }
  if (n_free > 0) {
    out.bias = sum / static_cast<double>(n_free);
    out.from_free = true;
  } else if (std::isfinite(lb) && std::isfinite(ub)) {
    out.bias = 0.5 * (lb + ub);
  } else if (std::isfinite(lb)) {
    out.bias = lb;
  } else if (std::isfinite(ub)) {
    out.bias = ub;
  }
  out.xi.resize(n);
  for (std::size_t p = 0; p < n; ++p) {
    const double hinge = std::max(0.0, signs[p] * (offsets[p] - out.bias));
    out.xi[p] = (rule == SlackRule::kKktBranch && multipliers[p] < C) ? 0.0 : hinge;
  }
  return out;
}

}  // namespace detail

void validate(const PcmlConfig& c) {
  if (!(c.C > 0) || !std::isfinite(c.C)) throw ArgumentError("pcml: C must be > 0");
  if (!(c.eps > 0 && c.eps < 1)) throw ArgumentError("pcml: eps must lie in (0, 1)");
  if (c.max_iter < 1) throw ArgumentError("pcml: max_iter must be >= 1");
  if (!(c.qp_tol > 0)) throw ArgumentError("pcml: qp_tol must be > 0");
}

SymMatrix pcml_metric(const PcmlState& state, const PairSet& /*pairs*/) {
  return state.y - state.y0;
}

BiasAndSlacks pcml_bias_and_slacks(const PcmlState& state, const PairSet& pairs, double C,
                                   SlackRule rule) {
  if (state.lambda.size() != pairs.size()) throw ArgumentError("pcml_bias_and_slacks: length mismatch");
  const SymMatrix m = pcml_metric(state, pairs);
  std::vector<double> offsets(pairs.size());
  const auto signs = pairs.signs();
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    offsets[p] = 1.0 / signs[p] - m.quad_form(pairs.diff(p));
  }
  return detail::bias_and_slacks(offsets, signs, state.lambda, C, rule);
}

namespace {

double sum(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

double check_gap(double gap, double scale, const char* who) {
  if (gap < -1e-6 * scale) {
    throw NumericalError(std::string(who) + ": negative duality gap " + std::to_string(gap) +
                         " (scale " + std::to_string(scale) + ")");
  }
  return gap;
}

}  // namespace

double pcml_duality_gap(const PcmlState& state, const PairSet& pairs, const PcmlConfig& config,
                        SlackRule rule) {
  const auto bs = pcml_bias_and_slacks(state, pairs, config.C, rule);
  double neg2 = 0.0;
  for (double x : state.negative_part) neg2 += x * x;
  const double slack = config.C * sum(bs.xi);
  const double lam = sum(state.lambda);
  const double gap = slack - lam + neg2;
  const double scale = std::max({1.0, slack + 0.5 * neg2, std::abs(lam - 0.5 * neg2)});
  return check_gap(gap, scale, "pcml_duality_gap");
}

PcmlObjectives pcml_objectives(const PcmlState& state, const PairSet& pairs, double C,
                               SlackRule rule) {
  const auto bs = pcml_bias_and_slacks(state, pairs, C, rule);
  const SymMatrix m = pcml_metric(state, pairs);
  std::vector<double> lh(pairs.size());
  for (std::size_t p = 0; p < pairs.size(); ++p) lh[p] = state.lambda[p] * pairs[p].h;
  const SymMatrix dual_m = weighted_outer_sum(pairs, lh) + state.y;
  return {0.5 * frob_inner(m, m) + C * sum(bs.xi), -0.5 * frob_inner(dual_m, dual_m) + sum(state.lambda)};
}

PcmlResult train_pcml(const PairSet& pairs, const PcmlConfig& config, const ProgressSink& sink) {
  validate(config);
  if (pairs.size() == 0) throw ArgumentError("train_pcml: no constraints");
  if (pairs.count(1) == 0 || pairs.count(-1) == 0) {
    throw ArgumentError("train_pcml: need both similar and dissimilar constraints");
  }
  const auto start = std::chrono::steady_clock::now();
  const std::size_t n = pairs.size();
  const std::size_t d = pairs.dim();
  const auto kernel = make_pair_kernel(pairs, config.dense_cap);
  const auto signs = pairs.signs();

  PcmlState state{std::vector<double>(n, 0.0), std::vector<double>(n, 1.0), SymMatrix(d), SymMatrix(d),
                  std::vector<double>(d, 0.0), 0.0};
  PcmlState best = state;
  double best_gap = std::numeric_limits<double>::infinity();
  TrainTrace trace;
  bool converged = false;
  int iterations = 0;
  bool warm = false;
  // a first gap this small is already at the lambda-solver's resolution
  const double gap_floor = config.C * static_cast<double>(n) * config.qp_tol;

  for (int t = 1; t <= config.max_iter; ++t) {
    iterations = t;
    for (std::size_t p = 0; p < n; ++p) state.eta[p] = 1.0 - signs[p] * state.y.quad_form(pairs.diff(p));

    BoxEqQp qp;
    qp.kernel = kernel.get();
    qp.linear = state.eta;
    qp.signs = signs;
    qp.cap = config.C;
    qp.tol = config.qp_tol;
    if (warm) qp.warm = state.lambda;
    const auto sol = solve_box_eq(qp);
    state.lambda = sol.alphas;
    warm = true;

    std::vector<double> w(n);
    for (std::size_t p = 0; p < n; ++p) w[p] = -state.lambda[p] * signs[p];
    state.y0 = weighted_outer_sum(pairs, w);
    auto split = psd_split(state.y0);
    state.y = std::move(split.positive);
    state.negative_part = std::move(split.negative_part);

    const auto bs = pcml_bias_and_slacks(state, pairs, config.C);
    state.bias = bs.bias;
    const double gap = pcml_duality_gap(state, pairs, config);
    const auto obj = pcml_objectives(state, pairs, config.C);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    trace.rows.push_back({t, obj.primal, obj.dual, gap, secs});
    if (sink) sink(trace.rows.back());

    if (gap < best_gap) {
      best_gap = gap;
      best = state;
    }
    const double gap1 = trace.rows.front().gap;
    if ((t == 1 && gap1 <= gap_floor) || (t > 1 && gap < config.eps * gap1)) {
      converged = true;
      break;
    }
  }

  const PcmlState& final_state = converged ? state : best;
  ModelMeta meta{"pcml", config.C, config.eps, iterations, converged,
                 converged ? trace.rows.back().gap : best_gap};
  MetricModel model(pcml_metric(final_state, pairs), meta);
  return {std::move(model), std::move(trace), final_state, converged, iterations};
}

}  // namespace metricforge
