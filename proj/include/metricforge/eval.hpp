#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "metricforge/dataset.hpp"
#include "metricforge/model.hpp"
#include "metricforge/pairs.hpp"
#include "metricforge/trace.hpp"

namespace metricforge {

enum class Algorithm { kPcml, kNcml, kEuclidean };

// "pcml" | "ncml" | "euclidean"; ArgumentError otherwise.
Algorithm parse_algorithm(const std::string& name);
std::string algorithm_name(Algorithm algo);

struct TrainConfig {
  Algorithm algo = Algorithm::kPcml;
  double C = 0.5;
  double eps = 0.01;
  int max_iter = 100;
  double qp_tol = 1e-6;
  std::size_t k = 2;         // neighbors per sample for pair construction
  std::uint64_t seed = 1;    // NCML eta initialization
  std::size_t dense_cap = kDefaultDenseGramCap;
};

void validate(const TrainConfig& config);

struct TrainOutcome {
  MetricModel model;
  TrainTrace trace;
  bool converged = true;
  std::size_t n_pairs = 0;
  std::vector<std::string> warnings;
};

// Builds constraints on `data` and trains the configured metric.
// kEuclidean returns the identity without touching the data.
TrainOutcome train_metric(const Dataset& data, const TrainConfig& config, const ProgressSink& sink = {});

// Fold index per sample. Every class is shuffled with the seed and dealt
// round-robin, continuing where the previous class stopped, so fold sizes
// differ by at most one and classes are spread proportionally.
// ArgumentError if folds < 2, N < folds, or some class has fewer than two
// members (its only sample would leave the training split class-free).
std::vector<std::size_t> stratified_folds(std::span<const int> labels, std::size_t folds, std::uint64_t seed);

struct CvOptions {
  std::size_t folds = 10;
  std::size_t repeats = 1;  // repeat r uses seed + r
  std::uint64_t seed = 1;
  std::optional<std::size_t> pca_dim;  // fit on each training split
  std::size_t jobs = 1;
};

struct CvFold {
  std::size_t repeat = 0;
  std::size_t fold = 0;
  std::size_t n_train = 0;
  std::size_t n_test = 0;
  std::size_t n_errors = 0;
  double error = 0.0;
  double train_seconds = 0.0;
  int iterations = 0;
  bool converged = true;
};

struct CvReport {
  std::vector<CvFold> folds;        // ordered by (repeat, fold)
  std::vector<double> fold_errors;  // same order
  double mean_error = 0.0;
  double std_error = 0.0;           // sample standard deviation over folds
  double total_train_seconds = 0.0;
};

CvReport kfold_cv(const Dataset& data, const TrainConfig& config, const CvOptions& options);

// Number of `test` samples whose 1-NN label in `train` under `model` is
// wrong.
std::size_t count_1nn_errors(const MetricModel& model, const Dataset& train, const Dataset& test);

struct RocReport {
  std::vector<double> thresholds;  // ascending, starts at -inf and ends at +inf
  std::vector<double> tpr;
  std::vector<double> fpr;
  double best_accuracy = 0.0;
  double best_threshold = 0.0;
  std::size_t n_matched = 0;
  std::size_t n_mismatched = 0;
};

// Pairs are declared matched when distance <= t. The grid is n_thresholds
// equally spaced values between the smallest and largest distance, plus
// +-inf. best_accuracy is the exact optimum: besides the grid, every
// observed distance is tried as a threshold.
RocReport roc_from_distances(std::span<const double> distances, const std::vector<bool>& matched,
                             std::size_t n_thresholds = 200);

// Squared Mahalanobis distance per pair, then roc_from_distances.
// ArgumentError on out-of-range indices or a single-class pair set.
RocReport verify_pairs(const MetricModel& model, const Dataset& features,
                       std::span<const LabeledPair> pairs, std::size_t n_thresholds = 200);

struct PcaTransform {
  std::size_t dim = 0;
  std::size_t rank = 0;
  std::vector<double> mean;         // dim
  std::vector<double> projection;   // dim x rank, row-major, orthonormal columns
  std::vector<double> variances;    // top-rank covariance eigenvalues, descending

  std::vector<double> apply(std::span<const double> x) const;
  Dataset apply(const Dataset& data) const;
};

// Covariance uses 1/(N-1). ArgumentError unless 1 <= r <= min(N, d).
PcaTransform pca_fit(const Dataset& data, std::size_t r);
std::pair<PcaTransform, Dataset> pca_fit_transform(const Dataset& data, std::size_t r);

// Report files. Column and key layouts are documented in docs/formats.md.
std::string format_cv_folds_csv(const CvReport& report);
std::string format_cv_summary_json(const CvReport& report, const TrainConfig& config,
                                   const CvOptions& options, const Dataset& data);
std::string format_cv_timing_json(const CvReport& report);
std::string format_roc_csv(const RocReport& report);
std::string format_verify_summary_json(const RocReport& report);

}  // namespace metricforge
