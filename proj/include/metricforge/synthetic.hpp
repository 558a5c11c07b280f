#pragma once

#include <cstddef>
#include <cstdint>

#include "metricforge/dataset.hpp"

namespace metricforge {

// Two isotropic unit-variance Gaussian classes (labels 0/1, alternating)
// with means at -sep/2 and +sep/2 along every coordinate.
Dataset two_gaussians(std::uint64_t seed, std::size_t n = 200, std::size_t dim = 10, double sep = 2.0);

// Two classes separated only in the first `informative` coordinates
// (means +-sep, unit variance); the remaining `noise` coordinates are
// N(0, noise_scale^2) and carry no label information.
Dataset anisotropic(std::uint64_t seed, std::size_t n = 300, std::size_t informative = 2,
                    std::size_t noise = 8, double noise_scale = 5.0, double sep = 4.0);

// Two tight blobs far apart.
Dataset two_blobs(std::uint64_t seed, std::size_t n = 60, std::size_t dim = 2);

}  // namespace metricforge
