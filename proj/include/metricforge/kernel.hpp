#pragma once

#include <cstddef>
#include <list>
#include <memory>
#include <span>
#include <unordered_map>
#include <vector>

#include "metricforge/linalg.hpp"
#include "metricforge/pairs.hpp"

namespace metricforge {

// Read-only access to a symmetric PSD P x P matrix, as seen by the QP
// solvers. Implementations may cache internally and are not safe to share
// between concurrent solves.
class KernelMatrix {
 public:
  virtual ~KernelMatrix() = default;

  virtual std::size_t size() const = 0;
  virtual double diag(std::size_t p) const = 0;
  virtual double at(std::size_t p, std::size_t q) const = 0;
  // Row/column p. The span survives one further column() call, not two.
  virtual std::span<const double> column(std::size_t p) const = 0;
  // K v
  virtual std::vector<double> multiply(std::span<const double> v) const;
};

class DenseKernel final : public KernelMatrix {
 public:
  explicit DenseKernel(SymMatrix k) : k_(std::move(k)) {}

  std::size_t size() const override { return k_.dim(); }
  double diag(std::size_t p) const override { return k_(p, p); }
  double at(std::size_t p, std::size_t q) const override { return k_(p, q); }
  std::span<const double> column(std::size_t p) const override { return k_.row(p); }

  const SymMatrix& matrix() const { return k_; }

 private:
  SymMatrix k_;
};

// Pair kernel evaluated from the cached difference vectors, O(d) per entry,
// with an LRU cache of whole columns.
class PairDiffKernel final : public KernelMatrix {
 public:
  PairDiffKernel(const PairSet& pairs, std::size_t cache_bytes = std::size_t{256} << 20);

  std::size_t size() const override { return pairs_->size(); }
  double diag(std::size_t p) const override { return diag_[p]; }
  double at(std::size_t p, std::size_t q) const override;
  std::span<const double> column(std::size_t p) const override;
  // (K v)_p = d_p^T (sum_q v_q d_q d_q^T) d_p, O(P d^2)
  std::vector<double> multiply(std::span<const double> v) const override;

 private:
  const PairSet* pairs_;
  std::vector<double> diag_;
  std::size_t capacity_;
  mutable std::list<std::pair<std::size_t, std::vector<double>>> lru_;
  mutable std::unordered_map<std::size_t, decltype(lru_)::iterator> index_;
};

// Dense when P <= dense_cap, on-the-fly otherwise. The returned kernel keeps
// a pointer to `pairs`, which must outlive it.
std::unique_ptr<KernelMatrix> make_pair_kernel(const PairSet& pairs,
                                               std::size_t dense_cap = kDefaultDenseGramCap);

}  // namespace metricforge
