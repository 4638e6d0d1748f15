#pragma once

#include <functional>

#include "dsgd/core/param_vector.hpp"

namespace dsgd {

using ScalarFn = std::function<double(const ParamVector&)>;

// Central-difference gradient (loss(x + h e_j) - loss(x - h e_j)) / 2h.
// Throws ConfigError for h <= 0 and InvalidNumber if any evaluation is
// non-finite.
[[nodiscard]] ParamVector finite_diff_grad(const ScalarFn& loss, const ParamVector& x, double h);

// ||a - b|| / max(||a||, ||b||), or the absolute difference when both norms
// are below `floor`.
[[nodiscard]] double relative_error(const ParamVector& a, const ParamVector& b, double floor = 1e-8);

}  // namespace dsgd
