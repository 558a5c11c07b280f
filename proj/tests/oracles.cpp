#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace oracle {

Mat to_eigen(const metricforge::SymMatrix& m) {
  const int d = static_cast<int>(m.dim());
  Mat out(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) out(i, j) = m(i, j);
  return out;
}

metricforge::SymMatrix from_eigen(const Mat& m) {
  std::vector<double> v(m.size());
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) v[i * m.cols() + j] = m(i, j);
  return metricforge::SymMatrix::from_dense(m.rows(), v);
}

Vec eigenvalues(const Mat& m) {
  Eigen::SelfAdjointEigenSolver<Mat> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

namespace {

// argmin ||x - z|| over the box intersected with s^T x = 0
Vec project_box_eq(const Vec& z, const Vec& s, double C) {
  auto at = [&](double tau) {
    Vec x = z - tau * s;
    return x.cwiseMax(0.0).cwiseMin(C).eval();
  };
  // s^T x(tau) is non-increasing in tau
  double lo = -1.0, hi = 1.0;
  while (s.dot(at(lo)) < 0) lo *= 2;
  while (s.dot(at(hi)) > 0) hi *= 2;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (s.dot(at(mid)) > 0) lo = mid; else hi = mid;
  }
  return at(0.5 * (lo + hi));
}

template <class Project>
QpResult fista(const Mat& Q, const Vec& lin, Project project, double tol) {
  const int n = static_cast<int>(lin.size());
  const double L = std::max(eigenvalues(Q).maxCoeff(), 1e-12);
  Vec x = project(Vec::Zero(n)), y = x, x_prev = x;
  double t = 1.0;
  QpResult r;
  auto f = [&](const Vec& v) { return 0.5 * v.dot(Q * v) - lin.dot(v); };
  for (long it = 0; it < 5'000'000; ++it) {
    const Vec g = Q * y - lin;
    x_prev = x;
    x = project(y - g / L);
    // gradient-mapping residual at x
    const Vec gx = Q * x - lin;
    const double res = Vec(L * (x - project(x - gx / L))).cwiseAbs().maxCoeff();
    r.iterations = it + 1;
    if (res <= tol) break;
    if (f(x) > f(x_prev)) {
      t = 1.0;
      y = x;
      continue;
    }
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    y = x + ((t - 1.0) / t_next) * (x - x_prev);
    t = t_next;
  }
  r.x = x;
  r.objective = -f(x);
  const Vec gx = Q * x - lin;
  r.residual = Vec(L * (x - project(x - gx / L))).cwiseAbs().maxCoeff();
  return r;
}

}  // namespace

QpResult box_eq(const Mat& K, const Vec& lin, const Vec& s, double C, double tol) {
  const Mat Q = s.asDiagonal() * K * s.asDiagonal();
  return fista(Q, lin, [&](const Vec& z) { return project_box_eq(z, s, C); }, tol);
}

QpResult nonneg(const Mat& K, const Vec& lin, double tol) {
  return fista(K, lin, [](const Vec& z) { return z.cwiseMax(0.0).eval(); }, tol);
}

namespace {

// min_{mu >= 0} 1/2 mu^T K mu - g^T mu for 2x2 K
std::pair<double, Vec> min_nonneg_2(const Mat& K, const Vec& g) {
  auto val = [&](const Vec& m) { return 0.5 * m.dot(K * m) - g.dot(m); };
  std::vector<Vec> cands;
  cands.push_back(Vec::Zero(2));
  for (int i = 0; i < 2; ++i) {
    Vec m = Vec::Zero(2);
    if (K(i, i) > 0) m(i) = std::max(0.0, g(i) / K(i, i));
    cands.push_back(m);
  }
  const double det = K(0, 0) * K(1, 1) - K(0, 1) * K(1, 0);
  if (std::abs(det) > 1e-14 * std::max(1.0, K.squaredNorm())) {
    Vec m = K.inverse() * g;
    if (m.minCoeff() >= 0) cands.push_back(m);
  }
  double best = std::numeric_limits<double>::infinity();
  Vec arg;
  for (const auto& c : cands) {
    if (val(c) < best) {
      best = val(c);
      arg = c;
    }
  }
  return {best, arg};
}

}  // namespace

NcmlTwo ncml_two_constraints(const Mat& K, double C) {
  Vec h(2);
  h << 1.0, -1.0;
  auto value = [&](double b) { return 2.0 * b + min_nonneg_2(K, K * (h * b)).first; };
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double lo = 0.0, hi = C;
  double x1 = hi - phi * (hi - lo), x2 = lo + phi * (hi - lo);
  double f1 = value(x1), f2 = value(x2);
  for (int it = 0; it < 200 && hi - lo > 1e-14 * std::max(1.0, C); ++it) {
    if (f1 < f2) {
      lo = x1; x1 = x2; f1 = f2;
      x2 = lo + phi * (hi - lo); f2 = value(x2);
    } else {
      hi = x2; x2 = x1; f2 = f1;
      x1 = hi - phi * (hi - lo); f1 = value(x1);
    }
  }
  NcmlTwo out;
  out.beta = 0.5 * (lo + hi);
  // the end points can win for a monotone value function
  for (double b : {0.0, C}) {
    if (value(b) > value(out.beta)) out.beta = b;
  }
  out.dual = value(out.beta);
  out.mu = min_nonneg_2(K, K * (h * out.beta)).second;
  return out;
}

Mat random_symmetric(std::mt19937_64& rng, int d, double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  Mat a(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j <= i; ++j) a(i, j) = a(j, i) = u(rng);
  return a;
}

Mat random_psd(std::mt19937_64& rng, int d, int r) {
  std::normal_distribution<double> z(0.0, 1.0);
  Mat b(d, r);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < r; ++j) b(i, j) = z(rng);
  return b * b.transpose();
}

}  // namespace oracle
