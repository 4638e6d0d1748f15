#include "dsgd/analysis/lyapunov.hpp"

#include "dsgd/core/error.hpp"

namespace dsgd {

LyapunovSnapshot lyapunov_value(const LyapunovInputs& in, const ClientObjective& f,
                                const LyapunovRegime& regime) {
  if (regime.local_steps != 1 || regime.participation != 1.0 || !regime.full_batch) {
    throw ConfigError(
        "lyapunov: only defined for one full-batch local step with full participation");
  }
  if (!in.x_t || !in.x_star) throw ConfigError("lyapunov: x_t and x_star are required");
  const std::size_t m = in.x_curr.size();
  if (m == 0) throw ConfigError("lyapunov: need at least one client");
  require_same_size(in.x_prev.size(), m, "lyapunov previous iterates");
  require_same_size(in.eta.size(), m, "lyapunov step sizes");
  require_same_size(in.theta.size(), m, "lyapunov step ratios");

  LyapunovSnapshot s;
  s.round = in.round;
  const double dist = vec_dist(*in.x_t, *in.x_star);
  s.distance = dist * dist;

  const auto md = static_cast<double>(m);
  double pair = 0.0;
  double sub = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double step = vec_dist(in.x_curr[i], in.x_prev[i]);
    pair += step * step;
    const double gap = f(i, in.x_prev[i]) - f(i, *in.x_star);
    sub += in.eta[i] * in.theta[i] * gap;
  }
  s.pairwise = pair / (2.0 * md);
  s.suboptimality = 2.0 * sub / md;
  s.value = s.distance + s.pairwise + s.suboptimality;
  require_finite(s.value, "lyapunov value");
  return s;
}

}  // namespace dsgd
