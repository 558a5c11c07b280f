#include "metricforge/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "metricforge/error.hpp"

namespace metricforge {

SymMatrix::SymMatrix(std::size_t dim) : dim_(dim), data_(dim * dim, 0.0) {
  if (dim == 0) throw ArgumentError("SymMatrix: dim must be >= 1");
}

SymMatrix SymMatrix::from_dense(std::size_t dim, std::span<const double> rowmajor) {
  if (rowmajor.size() != dim * dim) {
    throw ArgumentError("SymMatrix::from_dense: expected " + std::to_string(dim * dim) +
                        " entries, got " + std::to_string(rowmajor.size()));
  }
  SymMatrix m(dim);
  for (std::size_t i = 0; i < dim; ++i) {
    m.data_[i * dim + i] = rowmajor[i * dim + i];
    for (std::size_t j = i + 1; j < dim; ++j) {
      m.set(i, j, 0.5 * (rowmajor[i * dim + j] + rowmajor[j * dim + i]));
    }
  }
  return m;
}

SymMatrix SymMatrix::identity(std::size_t dim) {
  SymMatrix m(dim);
  for (std::size_t i = 0; i < dim; ++i) m.data_[i * dim + i] = 1.0;
  return m;
}

SymMatrix SymMatrix::diagonal(std::span<const double> diag) {
  SymMatrix m(diag.size());
  for (std::size_t i = 0; i < diag.size(); ++i) m.data_[i * m.dim_ + i] = diag[i];
  return m;
}

void SymMatrix::set(std::size_t i, std::size_t j, double v) {
  data_[i * dim_ + j] = v;
  data_[j * dim_ + i] = v;
}

void SymMatrix::add_outer(std::span<const double> v, double scale) {
  if (v.size() != dim_) throw ArgumentError("SymMatrix::add_outer: dimension mismatch");
  for (std::size_t i = 0; i < dim_; ++i) {
    const double si = scale * v[i];
    if (si == 0.0) continue;
    double* row = data_.data() + i * dim_;
    row[i] += si * v[i];
    for (std::size_t j = i + 1; j < dim_; ++j) {
      row[j] += si * v[j];
      data_[j * dim_ + i] = row[j];
    }
  }
}

void SymMatrix::scale(double s) {
  for (double& x : data_) x *= s;
}

SymMatrix& SymMatrix::operator+=(const SymMatrix& other) {
  if (other.dim_ != dim_) throw ArgumentError("SymMatrix +=: dimension mismatch");
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += other.data_[k];
  return *this;
}

SymMatrix& SymMatrix::operator-=(const SymMatrix& other) {
  if (other.dim_ != dim_) throw ArgumentError("SymMatrix -=: dimension mismatch");
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= other.data_[k];
  return *this;
}

SymMatrix operator+(SymMatrix a, const SymMatrix& b) { return a += b; }
SymMatrix operator-(SymMatrix a, const SymMatrix& b) { return a -= b; }

double SymMatrix::max_abs() const {
  double m = 0.0;
  for (double x : data_) m = std::max(m, std::abs(x));
  return m;
}

double SymMatrix::frob_norm() const { return std::sqrt(frob_inner(*this, *this)); }

double SymMatrix::trace() const {
  double t = 0.0;
  for (std::size_t i = 0; i < dim_; ++i) t += data_[i * dim_ + i];
  return t;
}

double SymMatrix::quad_form(std::span<const double> v) const {
  if (v.size() != dim_) throw ArgumentError("SymMatrix::quad_form: dimension mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < dim_; ++i) {
    const double* row = data_.data() + i * dim_;
    double r = 0.0;
    for (std::size_t j = 0; j < dim_; ++j) r += row[j] * v[j];
    acc += v[i] * r;
  }
  return acc;
}

bool SymMatrix::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double x) { return std::isfinite(x); });
}

double frob_inner(const SymMatrix& a, const SymMatrix& b) {
  if (a.dim() != b.dim()) {
    throw ArgumentError("frob_inner: dimension mismatch (" + std::to_string(a.dim()) + " vs " +
                        std::to_string(b.dim()) + ")");
  }
  const auto x = a.data();
  const auto y = b.data();
  return std::inner_product(x.begin(), x.end(), y.begin(), 0.0);
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ArgumentError("dot: length mismatch");
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

SymMatrix EigenDecomp::compose(std::span<const double> w) const {
  if (w.size() != dim) throw ArgumentError("EigenDecomp::compose: length mismatch");
  SymMatrix out(dim);
  for (std::size_t i = 0; i < dim; ++i) {
    for (std::size_t j = i; j < dim; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < dim; ++k) {
        if (w[k] != 0.0) acc += vec(i, k) * w[k] * vec(j, k);
      }
      out.set(i, j, acc);
    }
  }
  return out;
}

namespace {

double off_diagonal_norm(const std::vector<double>& a, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) s += 2.0 * a[i * n + j] * a[i * n + j];
  }
  return std::sqrt(s);
}

}  // namespace

EigenDecomp sym_eig(const SymMatrix& a, const JacobiOptions& opts) {
  if (!a.all_finite()) throw ArgumentError("sym_eig: matrix has non-finite entries");
  const std::size_t n = a.dim();
  std::vector<double> w(a.data().begin(), a.data().end());
  std::vector<double> v(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) v[i * n + i] = 1.0;

  const double threshold = opts.rel_tol * a.frob_norm();
  int sweep = 0;
  while (off_diagonal_norm(w, n) > threshold) {
    if (++sweep > opts.max_sweeps) {
      throw NumericalError("sym_eig: Jacobi did not converge in " +
                           std::to_string(opts.max_sweeps) + " sweeps");
    }
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = w[p * n + q];
        if (apq == 0.0) continue;
        const double theta = (w[q * n + q] - w[p * n + p]) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        // A <- A J
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = w[k * n + p];
          const double akq = w[k * n + q];
          w[k * n + p] = c * akp - s * akq;
          w[k * n + q] = s * akp + c * akq;
        }
        // A <- J^T A
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = w[p * n + k];
          const double aqk = w[q * n + k];
          w[p * n + k] = c * apk - s * aqk;
          w[q * n + k] = s * apk + c * aqk;
        }
        w[p * n + q] = 0.0;
        w[q * n + p] = 0.0;
        // V <- V J
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v[k * n + p];
          const double vkq = v[k * n + q];
          v[k * n + p] = c * vkp - s * vkq;
          v[k * n + q] = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return w[x * n + x] > w[y * n + y]; });

  EigenDecomp out;
  out.dim = n;
  out.values.resize(n);
  out.vectors.resize(n * n);
  for (std::size_t c = 0; c < n; ++c) {
    const std::size_t src = order[c];
    out.values[c] = w[src * n + src];
    for (std::size_t r = 0; r < n; ++r) out.vectors[r * n + c] = v[r * n + src];
  }
  return out;
}

double PsdSplit::negative_energy() const {
  double s = 0.0;
  for (double x : negative_part) s += x * x;
  return s;
}

PsdSplit psd_split(const SymMatrix& y0) {
  PsdSplit out{SymMatrix(y0.dim()), sym_eig(y0), {}};
  // eigenvalues within this band of zero are sign noise
  const double zero_band = 1e-12 * y0.frob_norm();
  const std::size_t n = y0.dim();
  std::vector<double> pos(n, 0.0);
  out.negative_part.assign(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    const double lam = out.eig.values[k];
    if (std::abs(lam) <= zero_band) continue;
    if (lam > 0) {
      pos[k] = lam;
    } else {
      out.negative_part[k] = -lam;
    }
  }
  out.positive = out.eig.compose(pos);
  return out;
}

SymMatrix psd_project(const SymMatrix& y0) { return psd_split(y0).positive; }

double min_eigenvalue(const SymMatrix& a) { return sym_eig(a).values.back(); }

}  // namespace metricforge
