#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace metricforge {

// N labeled samples of dimension d, stored row-major.
class Dataset {
 public:
  Dataset() = default;
  // Throws ArgumentError on shape mismatch, non-finite values or empty input.
  Dataset(std::size_t dim, std::vector<double> features, std::vector<int> labels);

  std::size_t size() const { return labels_.size(); }
  std::size_t dim() const { return dim_; }
  std::span<const double> row(std::size_t i) const { return {features_.data() + i * dim_, dim_}; }
  int label(std::size_t i) const { return labels_[i]; }
  const std::vector<int>& labels() const { return labels_; }
  const std::vector<double>& features() const { return features_; }

  // Sorted distinct labels.
  std::vector<int> classes() const;
  Dataset subset(std::span<const std::size_t> indices) const;

 private:
  std::size_t dim_ = 0;
  std::vector<double> features_;
  std::vector<int> labels_;
};

double squared_euclidean(std::span<const double> a, std::span<const double> b);

enum class DataFormat { kCsv, kLibsvm };

// CSV: optional header, comma separated, last column is the integer label.
Dataset parse_csv_dataset(const std::string& text);
// "label idx:val ..." with 1-based indices; dim is the largest index seen
// unless min_dim is larger.
Dataset parse_libsvm_dataset(const std::string& text, std::size_t min_dim = 0);
Dataset read_dataset(const std::filesystem::path& path, DataFormat format);

std::string format_csv_dataset(const Dataset& data);

// Labeled index pair for verification: rows a and b of a feature file.
struct LabeledPair {
  std::size_t a = 0;
  std::size_t b = 0;
  bool matched = false;
};

// Rows "idx_a,idx_b,matched" (0-based indices, matched in {0,1}), optional
// header. Throws ParseError on empty input.
std::vector<LabeledPair> parse_pair_file(const std::string& text);

std::string read_text_file(const std::filesystem::path& path);
// Writes through a temporary sibling and renames over the destination.
void write_text_file_atomic(const std::filesystem::path& path, const std::string& text);

}  // namespace metricforge
