#include "dsgd/analysis/smoothness.hpp"

#include <algorithm>

#include "dsgd/core/error.hpp"

namespace dsgd {

std::optional<double> smoothness_ratio(const ParamVector& x0, const ParamVector& x1,
                                       const ParamVector& g0, const ParamVector& g1) {
  const double dx = vec_dist(x1, x0);
  if (dx < kMinDisplacement) return std::nullopt;
  return vec_dist(g1, g0) / dx;
}

double estimate_local_smoothness(std::span<const TracePoint> trace) {
  if (trace.size() < 2) throw ConfigError("local smoothness: need at least two trace points");
  std::optional<double> best;
  for (std::size_t k = 1; k < trace.size(); ++k) {
    const auto r = smoothness_ratio(trace[k - 1].x, trace[k].x, trace[k - 1].g, trace[k].g);
    if (r) best = std::max(best.value_or(*r), *r);
  }
  if (!best) throw EstimateUnavailable("local smoothness: every displacement was negligible");
  return *best;
}

}  // namespace dsgd
