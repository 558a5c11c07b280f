#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace metricforge {

// Dense symmetric matrix stored as a full row-major square. Every mutator
// writes both (i, j) and (j, i), so entries[i][j] == entries[j][i] holds
// exactly at all times.
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(std::size_t dim);

  // Builds from a row-major square, symmetrizing with (A + A^T) / 2.
  static SymMatrix from_dense(std::size_t dim, std::span<const double> rowmajor);
  static SymMatrix identity(std::size_t dim);
  static SymMatrix diagonal(std::span<const double> diag);

  std::size_t dim() const { return dim_; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * dim_ + j]; }
  void set(std::size_t i, std::size_t j, double v);

  // this += scale * v v^T
  void add_outer(std::span<const double> v, double scale);
  void scale(double s);
  SymMatrix& operator+=(const SymMatrix& other);
  SymMatrix& operator-=(const SymMatrix& other);

  std::span<const double> row(std::size_t i) const {
    return {data_.data() + i * dim_, dim_};
  }
  std::span<const double> data() const { return data_; }

  double max_abs() const;
  double frob_norm() const;
  double trace() const;
  // v^T A v
  double quad_form(std::span<const double> v) const;
  bool all_finite() const;

  friend bool operator==(const SymMatrix&, const SymMatrix&) = default;

 private:
  std::size_t dim_ = 0;
  std::vector<double> data_;
};

SymMatrix operator+(SymMatrix a, const SymMatrix& b);
SymMatrix operator-(SymMatrix a, const SymMatrix& b);

// Columns of `vectors` (row-major d x d) are eigenvectors; values descending.
struct EigenDecomp {
  std::size_t dim = 0;
  std::vector<double> vectors;
  std::vector<double> values;

  double vec(std::size_t row, std::size_t col) const { return vectors[row * dim + col]; }
  // U diag(w) U^T
  SymMatrix compose(std::span<const double> w) const;
};

struct JacobiOptions {
  double rel_tol = 1e-12;  // off-diagonal Frobenius norm relative to ||A||_F
  int max_sweeps = 100;
};

// tr(a^T b)
double frob_inner(const SymMatrix& a, const SymMatrix& b);

// Cyclic Jacobi eigendecomposition. Throws ArgumentError on non-finite input
// and NumericalError if the sweep cap is hit.
EigenDecomp sym_eig(const SymMatrix& a, const JacobiOptions& opts = {});

// Result of splitting y0 = U diag(values) U^T into its positive and negative
// parts. `positive` = U diag(max(values, 0)) U^T is the Frobenius-nearest PSD
// matrix; `negative_part` holds max(-values, 0).
struct PsdSplit {
  SymMatrix positive;
  EigenDecomp eig;
  std::vector<double> negative_part;

  // sum of squared entries of negative_part
  double negative_energy() const;
};

PsdSplit psd_split(const SymMatrix& y0);
SymMatrix psd_project(const SymMatrix& y0);

double min_eigenvalue(const SymMatrix& a);

double dot(std::span<const double> a, std::span<const double> b);

}  // namespace metricforge
