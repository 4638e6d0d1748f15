#pragma once

#include <optional>
#include <span>

#include "dsgd/core/param_vector.hpp"

namespace dsgd {

// Displacements shorter than this carry no curvature information.
inline constexpr double kMinDisplacement = 1e-12;

// ||g1 - g0|| / ||x1 - x0||, or nullopt when ||x1 - x0|| < kMinDisplacement.
[[nodiscard]] std::optional<double> smoothness_ratio(const ParamVector& x0, const ParamVector& x1,
                                                     const ParamVector& g0, const ParamVector& g1);

struct TracePoint {
  ParamVector x;
  ParamVector g;
};

// Largest gradient-change / displacement ratio over consecutive trace
// points. Throws ConfigError for fewer than two points and
// EstimateUnavailable when every pair is skipped.
[[nodiscard]] double estimate_local_smoothness(std::span<const TracePoint> trace);

}  // namespace dsgd
