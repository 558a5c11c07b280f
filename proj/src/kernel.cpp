#include "metricforge/kernel.hpp"

#include <algorithm>

#include "metricforge/error.hpp"

namespace metricforge {

std::vector<double> KernelMatrix::multiply(std::span<const double> v) const {
  const std::size_t n = size();
  if (v.size() != n) throw ArgumentError("KernelMatrix::multiply: length mismatch");
  std::vector<double> out(n, 0.0);
  for (std::size_t q = 0; q < n; ++q) {
    if (v[q] == 0.0) continue;
    auto col = column(q);
    for (std::size_t p = 0; p < n; ++p) out[p] += col[p] * v[q];
  }
  return out;
}

PairDiffKernel::PairDiffKernel(const PairSet& pairs, std::size_t cache_bytes) : pairs_(&pairs) {
  diag_.resize(pairs.size());
  for (std::size_t p = 0; p < pairs.size(); ++p) diag_[p] = pair_kernel(pairs.diff(p), pairs.diff(p));
  const std::size_t per_column = std::max<std::size_t>(1, pairs.size() * sizeof(double));
  capacity_ = std::max<std::size_t>(2, cache_bytes / per_column);
}

double PairDiffKernel::at(std::size_t p, std::size_t q) const {
  return pair_kernel(pairs_->diff(p), pairs_->diff(q));
}

std::span<const double> PairDiffKernel::column(std::size_t p) const {
  if (auto it = index_.find(p); it != index_.end()) {
    lru_.splice(lru_.begin(), lru_, it->second);
    return it->second->second;
  }
  std::vector<double> col;
  if (lru_.size() >= capacity_) {
    col = std::move(lru_.back().second);
    index_.erase(lru_.back().first);
    lru_.pop_back();
  }
  const std::size_t n = size();
  col.resize(n);
  const auto dp = pairs_->diff(p);
  for (std::size_t q = 0; q < n; ++q) col[q] = pair_kernel(dp, pairs_->diff(q));
  lru_.emplace_front(p, std::move(col));
  index_[p] = lru_.begin();
  return lru_.front().second;
}

std::vector<double> PairDiffKernel::multiply(std::span<const double> v) const {
  const std::size_t n = size();
  if (v.size() != n) throw ArgumentError("PairDiffKernel::multiply: length mismatch");
  const SymMatrix w = weighted_outer_sum(*pairs_, v);
  std::vector<double> out(n);
  for (std::size_t p = 0; p < n; ++p) out[p] = w.quad_form(pairs_->diff(p));
  return out;
}

std::unique_ptr<KernelMatrix> make_pair_kernel(const PairSet& pairs, std::size_t dense_cap) {
  if (pairs.size() <= dense_cap) return std::make_unique<DenseKernel>(gram(pairs, dense_cap).entries);
  return std::make_unique<PairDiffKernel>(pairs);
}

}  // namespace metricforge
