#include "dsgd/analysis/convergence.hpp"

#include <cmath>

#include "dsgd/core/error.hpp"

namespace dsgd {

namespace {
constexpr std::size_t kMinRecords = 50;
}

double loglog_slope_second_half(std::span<const double> values) {
  if (values.size() < 4) throw ConfigError("log-log slope: need at least 4 values");
  for (double v : values) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError("log-log slope: values must be positive and finite");
  }
  const std::size_t begin = values.size() / 2;
  const auto n = static_cast<double>(values.size() - begin);
  double sx = 0.0, sy = 0.0;
  for (std::size_t k = begin; k < values.size(); ++k) {
    sx += std::log(static_cast<double>(k + 1));
    sy += std::log(values[k]);
  }
  const double mx = sx / n, my = sy / n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t k = begin; k < values.size(); ++k) {
    const double dx = std::log(static_cast<double>(k + 1)) - mx;
    sxy += dx * (std::log(values[k]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

std::vector<double> running_mean(std::span<const double> values) {
  std::vector<double> out(values.size());
  double s = 0.0;
  for (std::size_t k = 0; k < values.size(); ++k) {
    s += values[k];
    out[k] = s / static_cast<double>(k + 1);
  }
  return out;
}

double convergence_slope(std::span<const double> grad_norm_sq) {
  if (grad_norm_sq.size() < kMinRecords) {
    throw ConfigError("convergence slope: need at least 50 records");
  }
  for (double v : grad_norm_sq) {
    if (!(v > 0.0)) throw ConfigError("convergence slope: gradient norms must be positive");
  }
  const std::vector<double> avg = running_mean(grad_norm_sq);
  return loglog_slope_second_half(avg);
}

double convergence_slope(std::span<const RoundRecord> records) {
  std::vector<double> g;
  g.reserve(records.size());
  for (const RoundRecord& r : records) {
    if (r.evaluated) g.push_back(r.grad_norm_sq);
  }
  return convergence_slope(std::span<const double>(g));
}

}  // namespace dsgd
