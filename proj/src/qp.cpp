#include "metricforge/qp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "metricforge/error.hpp"

namespace metricforge {

namespace {

constexpr double kTau = 1e-12;
constexpr double kInf = std::numeric_limits<double>::infinity();

void check_finite(const std::vector<double>& v, const char* what) {
  for (double x : v) {
    if (!std::isfinite(x)) throw ArgumentError(std::string(what) + " has non-finite entries");
  }
}

// In the minimization form used below, G = Q a - linear with
// Q_pq = s_p s_q K_pq, and the dual objective equals -1/2 a^T (G - linear).
std::vector<double> box_eq_gradient(const KernelMatrix& k, const std::vector<double>& linear,
                                    const std::vector<double>& signs, const std::vector<double>& a) {
  const std::size_t n = a.size();
  std::vector<double> sa(n);
  for (std::size_t p = 0; p < n; ++p) sa[p] = a[p] * signs[p];
  auto ksa = k.multiply(sa);
  std::vector<double> g(n);
  for (std::size_t p = 0; p < n; ++p) g[p] = signs[p] * ksa[p] - linear[p];
  return g;
}

double objective_from_gradient(const std::vector<double>& a, const std::vector<double>& g,
                               const std::vector<double>& linear) {
  double f = 0.0;
  for (std::size_t p = 0; p < a.size(); ++p) f += a[p] * (g[p] - linear[p]);
  return -0.5 * f;
}

struct Violation {
  double m_up = -kInf;   // max over I_up of -s G
  double m_low = kInf;   // min over I_low of -s G
  long i = -1;
  double gap() const { return m_up - m_low; }
};

Violation scan(const std::vector<double>& a, const std::vector<double>& g,
               const std::vector<double>& s, double cap) {
  Violation v;
  for (std::size_t t = 0; t < a.size(); ++t) {
    const double val = -s[t] * g[t];
    const bool up = s[t] > 0 ? a[t] < cap : a[t] > 0;
    const bool low = s[t] > 0 ? a[t] > 0 : a[t] < cap;
    if (up && val >= v.m_up) {
      v.m_up = val;
      v.i = static_cast<long>(t);
    }
    if (low && val < v.m_low) v.m_low = val;
  }
  return v;
}

void box_eq_bias(BoxEqSolution& sol, const std::vector<double>& g, const std::vector<double>& s,
                 double cap) {
  double ub = kInf, lb = -kInf, sum_free = 0.0;
  std::size_t n_free = 0;
  for (std::size_t t = 0; t < g.size(); ++t) {
    const double yg = s[t] * g[t];
    const double a = sol.alphas[t];
    if (a >= cap) {
      if (s[t] < 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else if (a <= 0) {
      if (s[t] > 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else {
      ++n_free;
      sum_free += yg;
    }
  }
  double rho;
  if (n_free > 0) {
    rho = sum_free / static_cast<double>(n_free);
  } else if (std::isfinite(ub) && std::isfinite(lb)) {
    rho = 0.5 * (ub + lb);
  } else if (std::isfinite(ub)) {
    rho = ub;
  } else if (std::isfinite(lb)) {
    rho = lb;
  } else {
    rho = 0.0;
  }
  sol.bias = -rho;
  sol.bias_from_free = n_free > 0;
}

}  // namespace

double box_eq_objective(const KernelMatrix& kernel, const std::vector<double>& linear,
                        const std::vector<double>& signs, const std::vector<double>& alphas) {
  return objective_from_gradient(alphas, box_eq_gradient(kernel, linear, signs, alphas), linear);
}

double nonneg_objective(const KernelMatrix& kernel, const std::vector<double>& linear,
                        const std::vector<double>& mus) {
  auto km = kernel.multiply(mus);
  double obj = 0.0;
  for (std::size_t p = 0; p < mus.size(); ++p) obj += mus[p] * (linear[p] - 0.5 * km[p]);
  return obj;
}

BoxEqSolution solve_box_eq(const BoxEqQp& pr) {
  if (pr.kernel == nullptr) throw ArgumentError("solve_box_eq: no kernel");
  const KernelMatrix& k = *pr.kernel;
  const std::size_t n = k.size();
  if (n == 0) throw ArgumentError("solve_box_eq: empty problem");
  if (pr.linear.size() != n || pr.signs.size() != n) {
    throw ArgumentError("solve_box_eq: linear/signs length must equal kernel size " + std::to_string(n));
  }
  if (!(pr.cap > 0) || !std::isfinite(pr.cap)) throw ArgumentError("solve_box_eq: cap must be > 0");
  if (!(pr.tol > 0)) throw ArgumentError("solve_box_eq: tol must be > 0");
  check_finite(pr.linear, "solve_box_eq: linear term");
  bool has_pos = false, has_neg = false;
  for (double s : pr.signs) {
    if (s == 1.0) has_pos = true;
    else if (s == -1.0) has_neg = true;
    else throw ArgumentError("solve_box_eq: signs must be +1 or -1");
  }
  const double cap = pr.cap;
  const auto& s = pr.signs;

  BoxEqSolution sol;
  sol.alphas.assign(n, 0.0);
  if (!has_pos || !has_neg) {
    sol.degenerate_equality = true;
    const auto g = box_eq_gradient(k, pr.linear, s, sol.alphas);
    box_eq_bias(sol, g, s, cap);
    sol.objective = 0.0;
    return sol;
  }
  if (pr.warm) {
    if (pr.warm->size() != n) throw ArgumentError("solve_box_eq: warm start length mismatch");
    double eq = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
      const double a = (*pr.warm)[p];
      if (!(a >= 0.0 && a <= cap)) {
        throw ArgumentError("solve_box_eq: warm start entry " + std::to_string(p) + " outside [0, C]");
      }
      eq += a * s[p];
    }
    if (std::abs(eq) > 1e-9 * std::max(1.0, cap * static_cast<double>(n))) {
      throw ArgumentError("solve_box_eq: warm start violates the equality constraint");
    }
    sol.alphas = *pr.warm;
  }

  auto& a = sol.alphas;
  std::vector<double> g = box_eq_gradient(k, pr.linear, s, a);
  if (pr.record_objective) sol.objective_history.push_back(objective_from_gradient(a, g, pr.linear));

  bool refreshed = false;
  while (true) {
    const Violation v = scan(a, g, s, cap);
    if (v.i < 0 || v.gap() <= pr.tol) {
      // drift guard: confirm against a freshly computed gradient once
      if (refreshed) {
        sol.kkt_residual = v.i < 0 ? 0.0 : std::max(0.0, v.gap());
        break;
      }
      g = box_eq_gradient(k, pr.linear, s, a);
      refreshed = true;
      continue;
    }
    refreshed = false;
    if (sol.iterations >= pr.max_iter) {
      throw NumericalError("solve_box_eq: no convergence after " + std::to_string(pr.max_iter) +
                           " iterations (KKT violation " + std::to_string(v.gap()) + ", tol " +
                           std::to_string(pr.tol) + ")");
    }

    const auto i = static_cast<std::size_t>(v.i);
    const auto ki = k.column(i);
    const double kii = k.diag(i);
    // second-order choice of j among I_low members that violate with i
    long j_best = -1;
    double best = kInf;
    for (std::size_t t = 0; t < n; ++t) {
      const bool low = s[t] > 0 ? a[t] > 0 : a[t] < cap;
      if (!low) continue;
      const double b = v.m_up + s[t] * g[t];
      if (b <= 0) continue;
      double quad = kii + k.diag(t) - 2.0 * ki[t];
      if (quad <= 0) quad = kTau;
      const double gain = -(b * b) / quad;
      if (gain <= best) {
        best = gain;
        j_best = static_cast<long>(t);
      }
    }
    if (j_best < 0) {
      // cannot happen while gap > tol, guard against NaN gradients
      throw NumericalError("solve_box_eq: working-set selection failed (non-finite gradient?)");
    }
    const auto j = static_cast<std::size_t>(j_best);
    const double kjj = k.diag(j);
    double quad = kii + kjj - 2.0 * ki[j];
    if (quad < -1e-8 * std::max({kii, kjj, 1e-300})) {
      throw NumericalError("solve_box_eq: kernel is not PSD (curvature " + std::to_string(quad) +
                           " on pair " + std::to_string(i) + ", " + std::to_string(j) + ")");
    }
    if (quad <= 0) quad = kTau;

    const double old_i = a[i], old_j = a[j];
    if (s[i] != s[j]) {
      const double delta = (-g[i] - g[j]) / quad;
      const double diff = a[i] - a[j];
      a[i] += delta;
      a[j] += delta;
      if (diff > 0) {
        if (a[j] < 0) { a[j] = 0; a[i] = diff; }
      } else {
        if (a[i] < 0) { a[i] = 0; a[j] = -diff; }
      }
      if (diff > 0) {
        if (a[i] > cap) { a[i] = cap; a[j] = cap - diff; }
      } else {
        if (a[j] > cap) { a[j] = cap; a[i] = cap + diff; }
      }
    } else {
      const double delta = (g[i] - g[j]) / quad;
      const double sum = a[i] + a[j];
      a[i] -= delta;
      a[j] += delta;
      if (sum > cap) {
        if (a[i] > cap) { a[i] = cap; a[j] = sum - cap; }
        if (a[j] > cap) { a[j] = cap; a[i] = sum - cap; }
      } else {
        if (a[j] < 0) { a[j] = 0; a[i] = sum; }
        if (a[i] < 0) { a[i] = 0; a[j] = sum; }
      }
    }

    const double di = (a[i] - old_i) * s[i];
    const double dj = (a[j] - old_j) * s[j];
    const auto ki2 = k.column(i);  // may have been evicted by nothing; re-fetch is cheap on hit
    const auto kj = k.column(j);
    for (std::size_t t = 0; t < n; ++t) g[t] += s[t] * (ki2[t] * di + kj[t] * dj);
    ++sol.iterations;
    if (pr.record_objective) sol.objective_history.push_back(objective_from_gradient(a, g, pr.linear));
  }

  sol.objective = objective_from_gradient(a, g, pr.linear);
  box_eq_bias(sol, g, s, cap);
  return sol;
}

NonnegSolution solve_nonneg(const NonnegQp& pr) {
  if (pr.kernel == nullptr) throw ArgumentError("solve_nonneg: no kernel");
  const KernelMatrix& k = *pr.kernel;
  const std::size_t n = k.size();
  if (n == 0) throw ArgumentError("solve_nonneg: empty problem");
  if (pr.linear.size() != n) throw ArgumentError("solve_nonneg: linear length must equal kernel size");
  if (!(pr.tol > 0)) throw ArgumentError("solve_nonneg: tol must be > 0");
  check_finite(pr.linear, "solve_nonneg: linear term");

  NonnegSolution sol;
  sol.mus.assign(n, 0.0);
  if (pr.warm) {
    if (pr.warm->size() != n) throw ArgumentError("solve_nonneg: warm start length mismatch");
    for (std::size_t p = 0; p < n; ++p) {
      if (!((*pr.warm)[p] >= 0.0)) throw ArgumentError("solve_nonneg: warm start must be >= 0");
    }
    sol.mus = *pr.warm;
  }
  auto& mu = sol.mus;

  auto fresh_gradient = [&] {
    auto km = k.multiply(mu);
    std::vector<double> g(n);
    for (std::size_t p = 0; p < n; ++p) g[p] = pr.linear[p] - km[p];
    return g;
  };
  auto violation = [&](const std::vector<double>& g) {
    double worst = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
      worst = std::max(worst, mu[p] > 0 ? std::abs(g[p]) : std::max(g[p], 0.0));
    }
    return worst;
  };
  auto objective = [&](const std::vector<double>& g) {
    // -1/2 mu^T K mu + linear^T mu with K mu = linear - g
    double obj = 0.0;
    for (std::size_t p = 0; p < n; ++p) obj += 0.5 * mu[p] * (pr.linear[p] + g[p]);
    return obj;
  };

  std::vector<double> g = fresh_gradient();
  if (pr.record_objective) sol.objective_history.push_back(objective(g));
  bool refreshed = false;
  while (true) {
    const double worst = violation(g);
    if (worst <= pr.tol) {
      if (refreshed) {
        sol.kkt_residual = worst;
        break;
      }
      g = fresh_gradient();
      refreshed = true;
      continue;
    }
    refreshed = false;
    if (sol.sweeps >= pr.max_sweeps) {
      throw NumericalError("solve_nonneg: no convergence after " + std::to_string(pr.max_sweeps) +
                           " sweeps (KKT violation " + std::to_string(worst) + ")");
    }
    for (std::size_t p = 0; p < n; ++p) {
      const double viol = mu[p] > 0 ? std::abs(g[p]) : std::max(g[p], 0.0);
      if (viol == 0.0) continue;
      const double kpp = k.diag(p);
      if (kpp <= 0.0) {
        if (g[p] > pr.tol) {
          sol.unbounded_index = p;
          sol.kkt_residual = worst;
          sol.objective = objective(g);
          return sol;
        }
        continue;
      }
      const double next = std::max(0.0, mu[p] + g[p] / kpp);
      const double delta = next - mu[p];
      if (delta == 0.0) continue;
      mu[p] = next;
      const auto col = k.column(p);
      for (std::size_t t = 0; t < n; ++t) g[t] -= col[t] * delta;
      ++sol.updates;
    }
    ++sol.sweeps;
    if (pr.record_objective) sol.objective_history.push_back(objective(g));
  }
  sol.objective = objective(g);
  return sol;
}

}  // namespace metricforge
