#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>

#include "helpers.hpp"
#include "metricforge/error.hpp"
#include "metricforge/kernel.hpp"
#include "metricforge/pairs.hpp"
#include "metricforge/synthetic.hpp"
#include "oracles.hpp"

using namespace metricforge;

namespace {

std::set<std::pair<std::size_t, std::size_t>> unordered(const PairSet& ps, int h) {
  std::set<std::pair<std::size_t, std::size_t>> out;
  for (const auto& c : ps.constraints()) {
    if (c.h == h) out.insert({std::min(c.i, c.j), std::max(c.i, c.j)});
  }
  return out;
}

// every pair (i, j) with j among i's k nearest same-class / k farthest
// other-class samples, by sorting all N^2 distances
std::set<std::pair<std::size_t, std::size_t>> brute(const Dataset& d, std::size_t k, int h) {
  std::set<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t i = 0; i < d.size(); ++i) {
    std::vector<std::pair<double, std::size_t>> cand;
    for (std::size_t j = 0; j < d.size(); ++j) {
      if (j == i) continue;
      const bool same = d.label(i) == d.label(j);
      if ((h == -1) != same) continue;
      const double dist = squared_euclidean(d.row(i), d.row(j));
      cand.push_back({h == -1 ? dist : -dist, j});
    }
    std::sort(cand.begin(), cand.end());
    for (std::size_t t = 0; t < std::min(k, cand.size()); ++t) {
      out.insert({std::min(i, cand[t].second), std::max(i, cand[t].second)});
    }
  }
  return out;
}

}  // namespace

TEST(BuildConstraints, FourPointExample) {
  Dataset d(2, {0, 0, 0, 1, 5, 0, 5, 1}, {0, 0, 1, 1});
  const auto ps = build_constraints(d, 1);
  using P = std::set<std::pair<std::size_t, std::size_t>>;
  EXPECT_EQ(unordered(ps, -1), (P{{0, 1}, {2, 3}}));
  EXPECT_EQ(unordered(ps, 1), (P{{0, 3}, {1, 2}}));
  EXPECT_EQ(ps.size(), 4u);
}

TEST(BuildConstraints, SingleClassRejected) {
  Dataset d(1, {0, 1}, {3, 3});
  EXPECT_THROW(build_constraints(d, 1), ArgumentError);
}

TEST(BuildConstraints, KClampedToAvailable) {
  Dataset d(1, {0, 1, 2, 10, 11}, {0, 0, 0, 1, 1});
  const auto ps = build_constraints(d, 50);
  // every unordered pair, each exactly once
  EXPECT_EQ(ps.size(), 10u);
}

TEST(BuildConstraints, SingletonClassWarns) {
  Dataset d(1, {0, 1, 5}, {0, 0, 1});
  const auto ps = build_constraints(d, 1);
  EXPECT_FALSE(ps.warnings.empty());
  EXPECT_GT(ps.count(1), 0u);
}

TEST(BuildConstraints, MatchesBruteForceAndInvariants) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto d = two_gaussians(seed, 40, 3);
    for (std::size_t k : {1u, 2u, 3u}) {
      const auto ps = build_constraints(d, k);
      EXPECT_EQ(unordered(ps, -1), brute(d, k, -1));
      EXPECT_EQ(unordered(ps, 1), brute(d, k, 1));
      EXPECT_LE(ps.size(), 2 * k * d.size());
      std::set<std::pair<std::size_t, std::size_t>> seen;
      for (std::size_t p = 0; p < ps.size(); ++p) {
        const auto& c = ps[p];
        EXPECT_NE(c.i, c.j);
        EXPECT_EQ(c.h, d.label(c.i) == d.label(c.j) ? -1 : 1);
        EXPECT_TRUE(seen.insert({std::min(c.i, c.j), std::max(c.i, c.j)}).second);
        for (std::size_t t = 0; t < d.dim(); ++t) EXPECT_EQ(ps.diff(p)[t], d.row(c.i)[t] - d.row(c.j)[t]);
      }
    }
  }
}

TEST(PairSet, RejectsInconsistentConstraints) {
  Dataset d(1, {0, 1, 2}, {0, 0, 1});
  EXPECT_THROW(PairSet(d, {{0, 1, 1}}), ArgumentError);
  EXPECT_THROW(PairSet(d, {{0, 0, -1}}), ArgumentError);
  EXPECT_THROW(PairSet(d, {{0, 1, -1}, {1, 0, -1}}), ArgumentError);
}

TEST(PairKernel, Examples) {
  const std::vector<double> z = {0, 0}, a = {1, 2}, b = {3, -1}, c = {-2, 1};
  EXPECT_EQ(pair_kernel(z, a), 0.0);
  EXPECT_EQ(pair_kernel(a, c), 0.0);
  EXPECT_EQ(pair_kernel(a, b), 1.0);
  const std::vector<double> three = {1, 2, 3};
  EXPECT_THROW(pair_kernel(a, three), ArgumentError);
}

TEST(Gram, SinglePairAndDuplicates) {
  const auto one = testutil::pairs_from_diffs(2, {{1, 2}}, {1});
  EXPECT_DOUBLE_EQ(gram(one).entries(0, 0), 25.0);
  const auto dup = testutil::pairs_from_diffs(2, {{1, 2}, {1, 2}}, {1, -1});
  const auto g = gram(dup).entries;
  EXPECT_NEAR(g(0, 0) * g(1, 1) - g(0, 1) * g(1, 0), 0.0, 1e-8);
}

TEST(Gram, ElementwiseAndFrobeniusOracle) {
  std::mt19937_64 rng(2);
  const auto ps = testutil::random_pairs(rng, 5, 4);
  const auto g = gram(ps).entries;
  for (std::size_t p = 0; p < 5; ++p) {
    for (std::size_t q = 0; q < 5; ++q) {
      SymMatrix xp(4), xq(4);
      xp.add_outer(ps.diff(p), 1.0);
      xq.add_outer(ps.diff(q), 1.0);
      EXPECT_NEAR(g(p, q), frob_inner(xp, xq), 1e-9 * std::max(1.0, std::abs(g(p, q))));
      EXPECT_EQ(g(p, q), pair_kernel(ps.diff(p), ps.diff(q)));
    }
  }
  const auto ev = oracle::eigenvalues(oracle::to_eigen(g));
  EXPECT_GE(ev.minCoeff(), -1e-8 * oracle::to_eigen(g).diagonal().maxCoeff());
}

TEST(Gram, ResourceCap) {
  std::mt19937_64 rng(4);
  const auto ps = testutil::random_pairs(rng, 10, 2);
  EXPECT_THROW(gram(ps, 5), ResourceError);
}

TEST(Kernel, OnTheFlyMatchesDense) {
  std::mt19937_64 rng(8);
  const auto ps = testutil::random_pairs(rng, 30, 5);
  DenseKernel dense(gram(ps).entries);
  PairDiffKernel lazy(ps, 3 * 30 * sizeof(double));  // room for three columns
  std::normal_distribution<double> z(0.0, 1.0);
  std::vector<double> v(30);
  for (auto& x : v) x = z(rng);
  const auto a = dense.multiply(v), b = lazy.multiply(v);
  for (std::size_t p = 0; p < 30; ++p) EXPECT_NEAR(a[p], b[p], 1e-9 * std::max(1.0, std::abs(a[p])));
  for (std::size_t p = 0; p < 30; p += 7) {
    const auto col = lazy.column(p);
    for (std::size_t q = 0; q < 30; ++q) EXPECT_EQ(col[q], dense.at(p, q));
    EXPECT_EQ(lazy.diag(p), dense.diag(p));
  }
}
