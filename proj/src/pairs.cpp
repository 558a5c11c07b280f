#include "metricforge/pairs.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <utility>

#include "metricforge/error.hpp"

namespace metricforge {

PairSet::PairSet(std::size_t dim, std::vector<PairConstraint> constraints, std::vector<double> diffs)
    : dim_(dim), constraints_(std::move(constraints)), diffs_(std::move(diffs)) {
  if (dim_ == 0) throw ArgumentError("PairSet: dimension must be >= 1");
  if (diffs_.size() != constraints_.size() * dim_) {
    throw ArgumentError("PairSet: diffs has " + std::to_string(diffs_.size()) + " values, expected " +
                        std::to_string(constraints_.size() * dim_));
  }
  for (const auto& c : constraints_) {
    if (c.h != 1 && c.h != -1) throw ArgumentError("PairSet: indicator must be +1 or -1");
  }
}

PairSet::PairSet(const Dataset& data, std::vector<PairConstraint> constraints)
    : dim_(data.dim()), constraints_(std::move(constraints)) {
  std::set<std::pair<std::size_t, std::size_t>> seen;
  diffs_.reserve(constraints_.size() * dim_);
  for (const auto& c : constraints_) {
    if (c.i >= data.size() || c.j >= data.size()) throw ArgumentError("PairSet: index out of range");
    if (c.i == c.j) throw ArgumentError("PairSet: self pair (" + std::to_string(c.i) + ")");
    const int expected = data.label(c.i) == data.label(c.j) ? -1 : 1;
    if (c.h != expected) {
      throw ArgumentError("PairSet: indicator of pair (" + std::to_string(c.i) + ", " +
                          std::to_string(c.j) + ") disagrees with labels");
    }
    if (!seen.emplace(std::min(c.i, c.j), std::max(c.i, c.j)).second) {
      throw ArgumentError("PairSet: duplicate pair (" + std::to_string(c.i) + ", " +
                          std::to_string(c.j) + ")");
    }
    auto a = data.row(c.i);
    auto b = data.row(c.j);
    for (std::size_t k = 0; k < dim_; ++k) diffs_.push_back(a[k] - b[k]);
  }
}

std::vector<double> PairSet::signs() const {
  std::vector<double> s(constraints_.size());
  for (std::size_t p = 0; p < s.size(); ++p) s[p] = constraints_[p].h;
  return s;
}

std::size_t PairSet::count(int h) const {
  return static_cast<std::size_t>(
      std::count_if(constraints_.begin(), constraints_.end(), [h](const auto& c) { return c.h == h; }));
}

PairSet build_constraints(const Dataset& data, std::size_t k) {
  if (k == 0) throw ArgumentError("build_constraints: k must be >= 1");
  const auto classes = data.classes();
  if (classes.size() < 2) {
    throw ArgumentError("build_constraints: need at least 2 distinct labels, got " +
                        std::to_string(classes.size()));
  }
  const std::size_t n = data.size();

  std::vector<PairConstraint> out;
  std::set<std::pair<std::size_t, std::size_t>> seen;
  std::vector<std::string> warnings;
  auto emit = [&](std::size_t i, std::size_t j, int h) {
    if (seen.emplace(std::min(i, j), std::max(i, j)).second) out.push_back({i, j, h});
  };

  std::vector<std::pair<double, std::size_t>> same, other;
  for (std::size_t i = 0; i < n; ++i) {
    same.clear();
    other.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double d = squared_euclidean(data.row(i), data.row(j));
      (data.label(j) == data.label(i) ? same : other).emplace_back(d, j);
    }
    if (same.empty()) {
      warnings.push_back("sample " + std::to_string(i) + " (label " + std::to_string(data.label(i)) +
                         ") has no same-class partner; no similar pair emitted");
    }
    const std::size_t ks = std::min(k, same.size());
    std::partial_sort(same.begin(), same.begin() + static_cast<std::ptrdiff_t>(ks), same.end());
    for (std::size_t t = 0; t < ks; ++t) emit(i, same[t].second, -1);

    const std::size_t kd = std::min(k, other.size());
    // farthest first; equal distances keep the lower index first
    std::partial_sort(other.begin(), other.begin() + static_cast<std::ptrdiff_t>(kd), other.end(),
                      [](const auto& a, const auto& b) {
                        return a.first != b.first ? a.first > b.first : a.second < b.second;
                      });
    for (std::size_t t = 0; t < kd; ++t) emit(i, other[t].second, 1);
  }

  PairSet pairs(data, std::move(out));
  pairs.warnings = std::move(warnings);
  return pairs;
}

double pair_kernel(std::span<const double> d1, std::span<const double> d2) {
  if (d1.size() != d2.size()) throw ArgumentError("pair_kernel: length mismatch");
  const double t = dot(d1, d2);
  return t * t;
}

PairGram gram(const PairSet& pairs, std::size_t max_pairs) {
  const std::size_t p = pairs.size();
  if (p == 0) throw ArgumentError("gram: empty pair set");
  if (p > max_pairs) {
    throw ResourceError("gram: P = " + std::to_string(p) + " exceeds the dense cap of " +
                        std::to_string(max_pairs) + " pairs (" + std::to_string(p * p) + " entries)");
  }
  SymMatrix k(p);
  for (std::size_t a = 0; a < p; ++a) {
    for (std::size_t b = a; b < p; ++b) k.set(a, b, pair_kernel(pairs.diff(a), pairs.diff(b)));
  }
  return {std::move(k)};
}

SymMatrix weighted_outer_sum(const PairSet& pairs, std::span<const double> weights) {
  if (weights.size() != pairs.size()) throw ArgumentError("weighted_outer_sum: length mismatch");
  SymMatrix m(pairs.dim());
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    if (weights[p] != 0.0) m.add_outer(pairs.diff(p), weights[p]);
  }
  return m;
}

}  // namespace metricforge
