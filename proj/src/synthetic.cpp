#include "metricforge/synthetic.hpp"

#include <random>

#include "metricforge/error.hpp"

namespace metricforge {

Dataset two_gaussians(std::uint64_t seed, std::size_t n, std::size_t dim, double sep) {
  if (n < 2 || dim == 0) throw ArgumentError("two_gaussians: need n >= 2 and dim >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  std::vector<double> x(n * dim);
  std::vector<int> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = static_cast<int>(i % 2);
    const double c = y[i] ? 0.5 * sep : -0.5 * sep;
    for (std::size_t j = 0; j < dim; ++j) x[i * dim + j] = c + z(rng);
  }
  return Dataset(dim, std::move(x), std::move(y));
}

Dataset anisotropic(std::uint64_t seed, std::size_t n, std::size_t informative, std::size_t noise,
                    double noise_scale, double sep) {
  if (n < 2 || informative == 0) throw ArgumentError("anisotropic: need n >= 2 and informative >= 1");
  const std::size_t dim = informative + noise;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  std::vector<double> x(n * dim);
  std::vector<int> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = static_cast<int>(i % 2);
    const double c = y[i] ? sep : -sep;
    for (std::size_t j = 0; j < informative; ++j) x[i * dim + j] = c + z(rng);
    for (std::size_t j = informative; j < dim; ++j) x[i * dim + j] = noise_scale * z(rng);
  }
  return Dataset(dim, std::move(x), std::move(y));
}

Dataset two_blobs(std::uint64_t seed, std::size_t n, std::size_t dim) {
  if (n < 2 || dim == 0) throw ArgumentError("two_blobs: need n >= 2 and dim >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0, 0.1);
  std::vector<double> x(n * dim);
  std::vector<int> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = static_cast<int>(i % 2);
    for (std::size_t j = 0; j < dim; ++j) x[i * dim + j] = (y[i] ? 10.0 : 0.0) + z(rng);
  }
  return Dataset(dim, std::move(x), std::move(y));
}

}  // namespace metricforge
