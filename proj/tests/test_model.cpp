#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "helpers.hpp"
#include "metricforge/error.hpp"
#include "metricforge/model.hpp"
#include "metricforge/pcml.hpp"
#include "metricforge/synthetic.hpp"
#include "oracles.hpp"

using namespace metricforge;

namespace {

MetricModel diag_model(std::vector<double> d) {
  return MetricModel(SymMatrix::diagonal(d), {"pcml", 0.5, 0.01, 3, true, 1e-4});
}

}  // namespace

TEST(Distance, Examples) {
  const auto id = MetricModel::euclidean(2);
  const std::vector<double> x{1, 2}, y{4, 6};
  EXPECT_DOUBLE_EQ(id.distance2(x, y), 25.0);
  EXPECT_EQ(id.distance2(x, x), 0.0);
  const auto m = diag_model({2, 0});
  const std::vector<double> a{1, 3}, b{0, 0};
  EXPECT_DOUBLE_EQ(m.distance2(a, b), 2.0);
  const std::vector<double> bad{1, 2, 3};
  EXPECT_THROW(m.distance2(a, bad), ArgumentError);
}

TEST(Distance, SymmetryAndTriangle) {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> z(0, 1);
  for (int trial = 0; trial < 50; ++trial) {
    const int d = 1 + trial % 7;
    const MetricModel m(oracle::from_eigen(oracle::random_psd(rng, d, 1 + trial % d)), {});
    std::vector<double> x(d), y(d), w(d);
    for (int i = 0; i < d; ++i) x[i] = z(rng), y[i] = z(rng), w[i] = z(rng);
    EXPECT_EQ(m.distance2(x, y), m.distance2(y, x));
    const double xz = std::sqrt(m.distance2(x, w));
    EXPECT_LE(xz, std::sqrt(m.distance2(x, y)) + std::sqrt(m.distance2(y, w)) + 1e-8);
  }
}

TEST(Predict1nn, ExactMatchAndTies) {
  const Dataset train(1, {0.0, 2.0, 4.0}, {7, 8, 9});
  const auto id = MetricModel::euclidean(1);
  const std::vector<double> q{4.0}, mid{1.0};
  EXPECT_EQ(predict_1nn(id, train, q), 9);
  EXPECT_EQ(predict_1nn(id, train, mid), 7);  // equidistant to 0 and 2
}

TEST(Predict1nn, NoiseSuppressionFlipsLabel) {
  // A = (0, 0), B = (3, 10); the second axis is noise
  const Dataset train(2, {0.0, 0.0, 3.0, 10.0}, {0, 1});
  const std::vector<double> q{0.5, 9.0};
  // Euclidean: A 0.25 + 81, B 6.25 + 1 -> label 1
  EXPECT_EQ(predict_1nn(MetricModel::euclidean(2), train, q), 1);
  // noise axis suppressed: A 0.25, B 6.25 -> label 0
  EXPECT_EQ(predict_1nn(diag_model({1, 0}), train, q), 0);
}

TEST(Predict1nn, RescaleInvariant) {
  const auto data = two_gaussians(4, 40, 3);
  std::mt19937_64 rng(4);
  const auto M = oracle::random_psd(rng, 3, 3);
  const MetricModel a(oracle::from_eigen(M), {}), b(oracle::from_eigen(M * 7.5), {});
  for (std::size_t i = 0; i < data.size(); ++i) {
    EXPECT_EQ(predict_1nn(a, data, data.row(i)), predict_1nn(b, data, data.row(i)));
  }
}

TEST(ModelIo, RoundTripIsExact) {
  const auto ps = build_constraints(two_gaussians(9, 60, 4), 2);
  const auto r = train_pcml(ps, {});
  testutil::TempDir dir("model");
  save_model(r.model, dir / "m.txt");
  const auto back = load_model(dir / "m.txt");
  EXPECT_EQ(back.matrix(), r.model.matrix());
  EXPECT_EQ(back.meta(), r.model.meta());
  EXPECT_EQ(format_model(back), format_model(r.model));
}

TEST(ModelIo, TruncatedFileIsParseError) {
  const auto text = format_model(diag_model({1, 2, 3}));
  for (std::size_t cut : {std::size_t{0}, std::size_t{10}, text.size() / 2, text.size() - 8}) {
    EXPECT_THROW(load_model_text(text.substr(0, cut)), ParseError) << cut;
  }
  EXPECT_THROW(load_model_text("metricforge-model v2\n"), ParseError);
}

TEST(ModelIo, NegativeEigenvalueIsIntegrityError) {
  std::mt19937_64 rng(3);
  const auto M = oracle::random_psd(rng, 4, 2);  // rank 2: zero eigenvalues
  Eigen::SelfAdjointEigenSolver<oracle::Mat> es(M);
  const oracle::Vec u = es.eigenvectors().col(0);
  const oracle::Mat bad = M - 1e-3 * u * u.transpose();
  ASSERT_NEAR(oracle::eigenvalues(bad)(0), -1e-3, 1e-9);
  // build the file by hand since the model constructor refuses it
  auto text = format_model(MetricModel(oracle::from_eigen(M), {}));
  const auto header_end = text.find("final_gap");
  text = text.substr(0, text.find('\n', header_end) + 1);
  char buf[64];
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", bad(i, j));
      text += (j ? " " : "") + std::string(buf);
    }
    text += "\n";
  }
  EXPECT_NO_THROW(parse_model(text));
  EXPECT_THROW(load_model_text(text), IntegrityError);
}

TEST(ModelIo, AsymmetricMatrixRejected) {
  auto text = format_model(MetricModel::euclidean(2));
  const auto pos = text.rfind("0 1");
  ASSERT_NE(pos, std::string::npos);
  text.replace(pos, 3, "0.5 1");
  EXPECT_THROW(load_model_text(text), IntegrityError);
}

TEST(ModelIo, MissingFileIsIoError) {
  EXPECT_THROW(load_model("/nonexistent/dir/model.txt"), IoError);
}

TEST(MetricModel, CoefficientMismatchRejected) {
  const auto ps = testutil::pairs_from_diffs(2, {{1, 0}, {0, 1}}, {1, -1});
  MetricCoefficients co{{1.0, 2.0}, 2, ps.diffs()};
  EXPECT_NO_THROW(MetricModel(weighted_outer_sum(ps, co.mu), {}, co));
  EXPECT_THROW(MetricModel(SymMatrix::identity(2), {}, co), IntegrityError);
  EXPECT_THROW(MetricModel(SymMatrix::diagonal(std::vector<double>{1, -1}), {}), IntegrityError);
}
