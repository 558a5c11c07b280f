#pragma once

#include <span>

#include "metricforge/pcml.hpp"

namespace metricforge::detail {

// Shared bias/slack recovery. `offsets[p]` is the bias that would put pair p
// exactly on its margin (1/h_p - <M, X_p>), so the margin residual is
// 1 - h_p(<M, X_p> + b) = h_p (offsets[p] - b).
BiasAndSlacks bias_and_slacks(std::span<const double> offsets, std::span<const double> signs,
                              std::span<const double> multipliers, double C, SlackRule rule);

}  // namespace metricforge::detail
