#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "metricforge/dataset.hpp"
#include "metricforge/linalg.hpp"

namespace metricforge {

// h = -1 for a same-class (similar) pair, +1 for a different-class pair.
struct PairConstraint {
  std::size_t i = 0;
  std::size_t j = 0;
  int h = 0;
};

// Ordered constraint list with the difference vector x_i - x_j cached per
// constraint. The rank-one matrix X_p = diff(p) diff(p)^T is never formed.
class PairSet {
 public:
  PairSet() = default;
  PairSet(std::size_t dim, std::vector<PairConstraint> constraints, std::vector<double> diffs);
  // Computes diffs from the dataset and validates every constraint.
  PairSet(const Dataset& data, std::vector<PairConstraint> constraints);

  std::size_t size() const { return constraints_.size(); }
  std::size_t dim() const { return dim_; }
  const std::vector<PairConstraint>& constraints() const { return constraints_; }
  const PairConstraint& operator[](std::size_t p) const { return constraints_[p]; }
  std::span<const double> diff(std::size_t p) const { return {diffs_.data() + p * dim_, dim_}; }
  const std::vector<double>& diffs() const { return diffs_; }

  std::vector<double> signs() const;
  std::size_t count(int h) const;

  // Non-fatal notes from construction (e.g. singleton classes).
  std::vector<std::string> warnings;

 private:
  std::size_t dim_ = 0;
  std::vector<PairConstraint> constraints_;
  std::vector<double> diffs_;
};

// For every sample: its k nearest same-class samples become similar pairs and
// its k farthest different-class samples become dissimilar pairs (plain
// Euclidean distance, ties to the lower index). Unordered duplicates are
// dropped, first occurrence kept. Requires at least two classes.
PairSet build_constraints(const Dataset& data, std::size_t k);

// <X_ij, X_kl> = ((x_i - x_j)^T (x_k - x_l))^2
double pair_kernel(std::span<const double> d1, std::span<const double> d2);

struct PairGram {
  SymMatrix entries;
};

inline constexpr std::size_t kDefaultDenseGramCap = 4096;

// Dense P x P Gram matrix of the pair kernel. Throws ResourceError when P
// exceeds max_pairs.
PairGram gram(const PairSet& pairs, std::size_t max_pairs = kDefaultDenseGramCap);

// sum_p w_p diff(p) diff(p)^T
SymMatrix weighted_outer_sum(const PairSet& pairs, std::span<const double> weights);

}  // namespace metricforge
