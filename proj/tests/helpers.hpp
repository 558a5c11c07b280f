#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "metricforge/pairs.hpp"

namespace testutil {

inline metricforge::PairSet pairs_from_diffs(std::size_t dim, const std::vector<std::vector<double>>& diffs,
                                             const std::vector<int>& signs) {
  std::vector<metricforge::PairConstraint> cons;
  std::vector<double> flat;
  for (std::size_t p = 0; p < diffs.size(); ++p) {
    cons.push_back({2 * p, 2 * p + 1, signs[p]});
    flat.insert(flat.end(), diffs[p].begin(), diffs[p].end());
  }
  return metricforge::PairSet(dim, std::move(cons), std::move(flat));
}

inline metricforge::PairSet random_pairs(std::mt19937_64& rng, std::size_t n, std::size_t dim) {
  std::normal_distribution<double> z(0.0, 1.0);
  std::vector<std::vector<double>> diffs(n, std::vector<double>(dim));
  std::vector<int> signs(n);
  for (std::size_t p = 0; p < n; ++p) {
    for (auto& x : diffs[p]) x = z(rng);
    signs[p] = p % 2 ? -1 : 1;
  }
  return pairs_from_diffs(dim, diffs, signs);
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("mf_" + tag + "_" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace testutil
