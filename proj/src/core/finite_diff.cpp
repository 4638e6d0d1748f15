#include "dsgd/core/finite_diff.hpp"

#include <algorithm>
#include <cmath>

#include "dsgd/core/error.hpp"

namespace dsgd {

ParamVector finite_diff_grad(const ScalarFn& loss, const ParamVector& x, double h) {
  if (!(h > 0.0)) throw ConfigError("finite_diff_grad: step h must be > 0");
  require_finite(x.span(), "finite_diff_grad input");
  ParamVector probe = x;
  ParamVector out(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double xj = x[j];
    probe[j] = xj + h;
    const double up = loss(probe);
    probe[j] = xj - h;
    const double down = loss(probe);
    probe[j] = xj;
    require_finite(up, "finite_diff_grad loss evaluation");
    require_finite(down, "finite_diff_grad loss evaluation");
    out[j] = (up - down) / (2.0 * h);
  }
  return out;
}

double relative_error(const ParamVector& a, const ParamVector& b, double floor) {
  const double diff = vec_dist(a, b);
  const double scale = std::max(vec_norm(a), vec_norm(b));
  if (scale < floor) return diff;
  return diff / scale;
}

}  // namespace dsgd
