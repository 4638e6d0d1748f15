#pragma once

#include <span>
#include <vector>

#include "dsgd/fed/experiment.hpp"

namespace dsgd {

// Least-squares slope of log(values[k]) against log(k + 1) over the second
// half of the sequence. Throws ConfigError on fewer than 4 values or any
// nonpositive value.
[[nodiscard]] double loglog_slope_second_half(std::span<const double> values);

// Running means r_t = (1/t) sum_{s<=t} v_s.
[[nodiscard]] std::vector<double> running_mean(std::span<const double> values);

// Slope of log(running mean of ||grad f(x_t)||^2) versus log t over the
// second half of training; the sublinear-rate trend check. Only evaluated
// rounds are used. Throws ConfigError with fewer than 50 evaluated records
// or a nonpositive value.
[[nodiscard]] double convergence_slope(std::span<const RoundRecord> records);

// Same check on a raw sequence of squared gradient norms.
[[nodiscard]] double convergence_slope(std::span<const double> grad_norm_sq);

}  // namespace dsgd
