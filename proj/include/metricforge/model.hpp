#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "metricforge/dataset.hpp"
#include "metricforge/linalg.hpp"

namespace metricforge {

struct ModelMeta {
  std::string algorithm = "pcml";  // pcml | ncml | euclidean
  double C = 0.0;
  double eps = 0.0;
  int iterations = 0;
  bool converged = false;
  double final_gap = 0.0;

  friend bool operator==(const ModelMeta&, const ModelMeta&) = default;
};

// NCML keeps M = sum_p mu_p d_p d_p^T alongside the dense matrix.
struct MetricCoefficients {
  std::vector<double> mu;
  std::size_t dim = 0;
  std::vector<double> diffs;  // row-major P x dim
};

// Learned Mahalanobis metric. Immutable after construction.
class MetricModel {
 public:
  // Throws IntegrityError if M is not PSD within 1e-8 * max(1, max|M|), or
  // if the coefficients do not reproduce M.
  MetricModel(SymMatrix m, ModelMeta meta, std::optional<MetricCoefficients> coeffs = std::nullopt);

  static MetricModel euclidean(std::size_t dim);

  std::size_t dim() const { return m_.dim(); }
  const SymMatrix& matrix() const { return m_; }
  const ModelMeta& meta() const { return meta_; }
  const std::optional<MetricCoefficients>& coeffs() const { return coeffs_; }

  // (x - y)^T M (x - y), clamped at zero
  double distance2(std::span<const double> x, std::span<const double> y) const;

 private:
  SymMatrix m_;
  ModelMeta meta_;
  std::optional<MetricCoefficients> coeffs_;
};

// Label of the training sample nearest to `query`; ties go to the lowest
// index.
int predict_1nn(const MetricModel& model, const Dataset& train, std::span<const double> query);

// Model file, version 1:
//
//   metricforge-model v1
//   algorithm <pcml|ncml|euclidean>
//   dim <d>
//   C <float>
//   eps <float>
//   iterations <int>
//   converged <0|1>
//   final_gap <float>
//   <d rows of d space-separated floats, %.17g>
//
// Floats use 17 significant digits so every double round-trips exactly.
std::string format_model(const MetricModel& model);

// Parsed file contents before any PSD check. Used by `inspect`.
struct RawModel {
  ModelMeta meta;
  SymMatrix m;
};

// Throws ParseError (with line number) on malformed text and IntegrityError
// on an asymmetric matrix.
RawModel parse_model(const std::string& text);
// parse_model + MetricModel construction (PSD check).
MetricModel load_model_text(const std::string& text);

void save_model(const MetricModel& model, const std::filesystem::path& path);
MetricModel load_model(const std::filesystem::path& path);

}  // namespace metricforge
