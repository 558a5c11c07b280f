#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>

#include "helpers.hpp"
#include "metricforge/error.hpp"
#include "metricforge/eval.hpp"
#include "metricforge/synthetic.hpp"
#include "oracles.hpp"

using namespace metricforge;

namespace {

Dataset shuffled_labels(const Dataset& d, std::uint64_t seed) {
  auto labels = d.labels();
  std::mt19937_64 rng(seed);
  std::shuffle(labels.begin(), labels.end(), rng);
  return Dataset(d.dim(), d.features(), labels);
}

// every distinct threshold, counted by brute force
double brute_best_accuracy(const std::vector<double>& dist, const std::vector<bool>& matched) {
  std::vector<double> ts(dist);
  ts.push_back(-std::numeric_limits<double>::infinity());
  double best = 0.0;
  for (double t : ts) {
    std::size_t ok = 0;
    for (std::size_t i = 0; i < dist.size(); ++i) ok += ((dist[i] <= t) == matched[i]);
    best = std::max(best, static_cast<double>(ok) / dist.size());
  }
  return best;
}

}  // namespace

TEST(Folds, StratifiedAndBalanced) {
  std::vector<int> labels;
  for (int i = 0; i < 37; ++i) labels.push_back(i % 3 == 0 ? 5 : 2);
  const auto f = stratified_folds(labels, 5, 11);
  std::vector<int> sizes(5, 0);
  std::map<std::pair<int, std::size_t>, int> per;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    ASSERT_LT(f[i], 5u);
    ++sizes[f[i]];
    ++per[{labels[i], f[i]}];
  }
  EXPECT_LE(*std::max_element(sizes.begin(), sizes.end()) - *std::min_element(sizes.begin(), sizes.end()), 1);
  for (int c : {2, 5}) {
    int lo = 1 << 30, hi = 0;
    for (std::size_t k = 0; k < 5; ++k) lo = std::min(lo, per[{c, k}]), hi = std::max(hi, per[{c, k}]);
    EXPECT_LE(hi - lo, 1);
  }
  EXPECT_EQ(f, stratified_folds(labels, 5, 11));
  EXPECT_NE(f, stratified_folds(labels, 5, 12));
}

TEST(Folds, Errors) {
  const std::vector<int> labels{0, 0, 1, 1, 2};
  EXPECT_THROW(stratified_folds(labels, 1, 1), ArgumentError);
  EXPECT_THROW(stratified_folds(labels, 6, 1), ArgumentError);
  EXPECT_THROW(stratified_folds(labels, 2, 1), ArgumentError);  // class 2 is a singleton
}

TEST(Cv, SeparableIsZero) {
  const auto data = two_blobs(3);
  TrainConfig c;
  const auto r = kfold_cv(data, c, {});
  EXPECT_EQ(r.fold_errors.size(), 10u);
  EXPECT_EQ(r.mean_error, 0.0);
}

TEST(Cv, ShuffledLabelsAreChance) {
  double total = 0.0;
  TrainConfig c;
  c.algo = Algorithm::kEuclidean;
  for (std::uint64_t s = 0; s < 10; ++s) {
    total += kfold_cv(shuffled_labels(two_gaussians(s, 200, 10), 100 + s), c, {}).mean_error;
  }
  EXPECT_NEAR(total / 10, 0.5, 0.1);
}

TEST(Cv, ShuffledLabelsPcml) {
  TrainConfig c;
  CvOptions o;
  o.folds = 5;
  const auto r = kfold_cv(shuffled_labels(two_gaussians(1, 100, 4), 9), c, o);
  EXPECT_NEAR(r.mean_error, 0.5, 0.15);
}

TEST(Cv, ReportInvariants) {
  const auto data = two_gaussians(2, 80, 4);
  TrainConfig c;
  CvOptions o;
  o.folds = 4;
  o.repeats = 2;
  const auto r = kfold_cv(data, c, o);
  ASSERT_EQ(r.folds.size(), 8u);
  double sum = 0.0;
  std::size_t tested = 0;
  for (std::size_t i = 0; i < r.folds.size(); ++i) {
    EXPECT_EQ(r.folds[i].repeat, i / 4);
    EXPECT_EQ(r.folds[i].fold, i % 4);
    EXPECT_EQ(r.folds[i].n_train + r.folds[i].n_test, data.size());
    EXPECT_GE(r.fold_errors[i], 0.0);
    EXPECT_LE(r.fold_errors[i], 1.0);
    sum += r.fold_errors[i];
    if (r.folds[i].repeat == 0) tested += r.folds[i].n_test;
  }
  EXPECT_EQ(tested, data.size());
  EXPECT_NEAR(r.mean_error, sum / 8, 1e-12);
}

TEST(Cv, DeterministicAcrossRunsAndJobs) {
  const auto data = two_gaussians(5, 100, 5);
  TrainConfig c;
  c.algo = Algorithm::kNcml;
  CvOptions o;
  o.folds = 5;
  const auto a = kfold_cv(data, c, o);
  o.jobs = 4;
  const auto b = kfold_cv(data, c, o);
  EXPECT_EQ(a.fold_errors, b.fold_errors);
  EXPECT_EQ(format_cv_summary_json(a, c, o, data), format_cv_summary_json(b, c, o, data));
  EXPECT_EQ(format_cv_folds_csv(a).substr(0, 20), format_cv_folds_csv(b).substr(0, 20));
}

TEST(Cv, PcaOptionReducesDimension) {
  const auto data = two_gaussians(5, 100, 8);
  TrainConfig c;
  CvOptions o;
  o.folds = 5;
  o.pca_dim = 3;
  const auto r = kfold_cv(data, c, o);
  EXPECT_LT(r.mean_error, 0.2);
  o.pca_dim = 9;
  EXPECT_THROW(kfold_cv(data, c, o), ArgumentError);
}

TEST(Roc, Examples) {
  const std::vector<double> d{0, 0, 0, 1, 2, 3};
  const std::vector<bool> m{true, true, true, false, false, false};
  const auto r = roc_from_distances(d, m, 10);
  EXPECT_EQ(r.best_accuracy, 1.0);
  EXPECT_EQ(r.thresholds.front(), -std::numeric_limits<double>::infinity());
  EXPECT_EQ(r.tpr.front(), 0.0);
  EXPECT_EQ(r.fpr.front(), 0.0);
  EXPECT_EQ(r.tpr.back(), 1.0);
  EXPECT_EQ(r.fpr.back(), 1.0);
  EXPECT_EQ(r.thresholds.size(), 12u);
  EXPECT_THROW(roc_from_distances(d, std::vector<bool>(6, true)), ArgumentError);
}

TEST(Roc, MatchesBruteForceAndIsMonotone) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> z(0, 1);
  std::bernoulli_distribution coin(0.4);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 2 + trial * 3;
    std::vector<double> d(n);
    std::vector<bool> m(n);
    for (std::size_t i = 0; i < n; ++i) {
      m[i] = i < 2 ? i == 0 : coin(rng);
      d[i] = std::round((m[i] ? 1.0 : 2.0) + z(rng) * 4) / 4;  // ties on purpose
    }
    const auto r = roc_from_distances(d, m, 1 + trial % 7);
    EXPECT_DOUBLE_EQ(r.best_accuracy, brute_best_accuracy(d, m));
    const double prior = std::max(r.n_matched, r.n_mismatched) / static_cast<double>(n);
    EXPECT_GE(r.best_accuracy, prior);
    for (std::size_t i = 1; i < r.thresholds.size(); ++i) {
      EXPECT_LE(r.thresholds[i - 1], r.thresholds[i]);
      EXPECT_LE(r.tpr[i - 1], r.tpr[i]);
      EXPECT_LE(r.fpr[i - 1], r.fpr[i]);
    }
  }
}

TEST(Verify, IdentityModelMatchesOracle) {
  const auto data = two_gaussians(6, 50, 3);
  std::vector<LabeledPair> pairs;
  std::vector<double> dist;
  std::vector<bool> m;
  std::mt19937_64 rng(6);
  std::uniform_int_distribution<std::size_t> pick(0, 49);
  for (int i = 0; i < 200; ++i) {
    const std::size_t a = pick(rng), b = pick(rng);
    pairs.push_back({a, b, data.label(a) == data.label(b)});
    double s = 0.0;
    for (std::size_t t = 0; t < 3; ++t) s += std::pow(data.row(a)[t] - data.row(b)[t], 2);
    dist.push_back(s);
    m.push_back(pairs.back().matched);
  }
  const auto r = verify_pairs(MetricModel::euclidean(3), data, pairs);
  EXPECT_DOUBLE_EQ(r.best_accuracy, brute_best_accuracy(dist, m));
  pairs.push_back({0, 50, true});
  EXPECT_THROW(verify_pairs(MetricModel::euclidean(3), data, pairs), ArgumentError);
}

TEST(Pca, SubspaceReconstruction) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> z(0, 1);
  // rank-2 data embedded in 5 dims, offset by a constant
  const auto B = oracle::random_symmetric(rng, 5, 1.0).leftCols(2).eval();
  std::vector<double> f;
  std::vector<int> labels;
  for (int i = 0; i < 30; ++i) {
    const oracle::Vec x = B * oracle::Vec::NullaryExpr(2, [&] { return z(rng); }) + oracle::Vec::Constant(5, 3.0);
    f.insert(f.end(), x.data(), x.data() + 5);
    labels.push_back(i % 2);
  }
  const Dataset data(5, f, labels);
  const auto [pca, proj] = pca_fit_transform(data, 2);
  EXPECT_EQ(proj.dim(), 2u);
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (std::size_t a = 0; a < 5; ++a) {
      double rec = pca.mean[a];
      for (std::size_t c = 0; c < 2; ++c) rec += pca.projection[a * 2 + c] * proj.row(i)[c];
      EXPECT_NEAR(rec, data.row(i)[a], 1e-8);
    }
  }
}

TEST(Pca, OrthonormalAndVarianceOracle) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> z(0, 1);
  const std::size_t n = 40, d = 6, r = 3;
  std::vector<double> f(n * d);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = z(rng) * (1 + i % d);
  const Dataset data(d, f, std::vector<int>(n, 0));
  const auto [pca, proj] = pca_fit_transform(data, r);
  for (std::size_t a = 0; a < r; ++a)
    for (std::size_t b = 0; b < r; ++b) {
      double s = 0.0;
      for (std::size_t t = 0; t < d; ++t) s += pca.projection[t * r + a] * pca.projection[t * r + b];
      EXPECT_NEAR(s, a == b ? 1.0 : 0.0, 1e-8);
    }
  oracle::Mat X(n, d);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t t = 0; t < d; ++t) X(i, t) = data.row(i)[t];
  const oracle::Mat Xc = X.rowwise() - X.colwise().mean();
  const oracle::Mat cov = Xc.transpose() * Xc / double(n - 1);
  const auto ev = oracle::eigenvalues(cov);
  const double top = ev.tail(r).sum();
  double projected = 0.0;
  for (std::size_t c = 0; c < r; ++c) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += proj.row(i)[c] * proj.row(i)[c];
    projected += s / double(n - 1);
  }
  EXPECT_NEAR(projected, top, 1e-8 * std::max(1.0, top));
  EXPECT_THROW(pca_fit(data, 0), ArgumentError);
  EXPECT_THROW(pca_fit(data, d + 1), ArgumentError);
}

TEST(Pca, FullRankIsIsometry) {
  const auto data = two_gaussians(7, 30, 4);
  const auto [pca, proj] = pca_fit_transform(data, 4);
  const auto id = MetricModel::euclidean(4);
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (std::size_t j = i + 1; j < data.size(); j += 3) {
      EXPECT_NEAR(squared_euclidean(data.row(i), data.row(j)), squared_euclidean(proj.row(i), proj.row(j)), 1e-8);
    }
    EXPECT_EQ(predict_1nn(id, data, data.row(i)), predict_1nn(id, proj, proj.row(i)));
  }
}

TEST(Reports, CsvAndJsonLayout) {
  const auto data = two_blobs(1);
  TrainConfig c;
  CvOptions o;
  o.folds = 3;
  const auto r = kfold_cv(data, c, o);
  const auto csv = format_cv_folds_csv(r);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "repeat,fold,n_train,n_test,n_errors,error,iterations,converged,train_seconds");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
  const auto js = format_cv_summary_json(r, c, o, data);
  EXPECT_NE(js.find("\"mean_error\""), std::string::npos);
  EXPECT_EQ(js.find("seconds"), std::string::npos);
  EXPECT_NE(format_cv_timing_json(r).find("total_train_seconds"), std::string::npos);
}
