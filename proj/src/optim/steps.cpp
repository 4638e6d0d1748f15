#include "dsgd/optim/steps.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dsgd/core/error.hpp"

namespace dsgd {

void DeltaSgdParams::validate() const {
  if (!(gamma > 0.0)) throw ConfigError("delta-sgd: gamma must be > 0");
  if (!(delta > 0.0)) throw ConfigError("delta-sgd: delta must be > 0");
  if (!(eta0 > 0.0)) throw ConfigError("delta-sgd: eta0 must be > 0");
  if (!(theta0 > 0.0)) throw ConfigError("delta-sgd: theta0 must be > 0");
}

DeltaSgdState DeltaSgdState::fresh(const DeltaSgdParams& params) {
  params.validate();
  DeltaSgdState s;
  s.params = params;
  s.eta_prev = params.eta0;
  s.theta_prev = params.theta0;
  return s;
}

DeltaSgdStep delta_sgd_step(DeltaSgdState state, const ParamVector& x, const ParamVector& g) {
  require_same_size(x.size(), g.size(), "delta_sgd_step");
  DeltaSgdStep out;
  const double nan = std::numeric_limits<double>::quiet_NaN();

  if (!state.has_history) {
    const double eta = state.params.eta0;
    out.x_next = vec_axpy(-eta, g, x);
    out.eta_used = eta;
    out.trace = {nan, nan, eta};
    state.eta_prev = eta;
    state.theta_prev = state.params.theta0;
  } else {
    require_same_size(x.size(), state.x_prev.size(), "delta_sgd_step history");
    const double dx = vec_dist(x, state.x_prev);
    const double dg = vec_dist(g, state.g_prev);
    const double branch1 = (dg < kDeltaSgdTiny || dx < kDeltaSgdTiny)
                               ? std::numeric_limits<double>::infinity()
                               : state.params.gamma * dx / (2.0 * dg);
    const double branch2 =
        std::sqrt(1.0 + state.params.delta * state.theta_prev) * state.eta_prev;
    const double eta = std::min(branch1, branch2);
    require_finite(eta, "delta_sgd_step step size");
    out.x_next = vec_axpy(-eta, g, x);
    out.eta_used = eta;
    out.trace = {branch1, branch2, eta};
    state.theta_prev = eta / state.eta_prev;
    state.eta_prev = eta;
    require_finite(state.theta_prev, "delta_sgd_step ratio");
  }
  state.x_prev = x;
  state.g_prev = g;
  state.has_history = true;
  out.state = std::move(state);
  return out;
}

ParamVector sgd_step(double eta, const ParamVector& x, const ParamVector& g) {
  if (!(eta > 0.0)) throw ConfigError("sgd_step: eta must be > 0");
  return vec_axpy(-eta, g, x);
}

double lr_decay_factor(std::size_t round, std::size_t total_rounds) {
  if (total_rounds == 0) throw ConfigError("lr_decay_factor: total_rounds must be > 0");
  if (round >= total_rounds) throw ConfigError("lr_decay_factor: round outside [0, total_rounds)");
  // ceil(T/2) and ceil(3T/4) in integer arithmetic
  const std::size_t half = (total_rounds + 1) / 2;
  const std::size_t three_quarters = (3 * total_rounds + 3) / 4;
  if (round >= three_quarters) return 0.01;
  if (round >= half) return 0.1;
  return 1.0;
}

MomentumStep sgdm_step(double eta, double beta, const ParamVector& buffer, const ParamVector& x,
                       const ParamVector& g) {
  if (!(beta >= 0.0 && beta < 1.0)) throw ConfigError("sgdm_step: beta must lie in [0, 1)");
  require_same_size(x.size(), g.size(), "sgdm_step");
  MomentumStep out;
  if (beta == 0.0) {
    out.buffer = g;
  } else {
    require_same_size(buffer.size(), g.size(), "sgdm_step buffer");
    out.buffer = vec_axpy(beta, buffer, g);
  }
  out.x_next = sgd_step(eta, x, out.buffer);
  return out;
}

AdamStep adam_step(const AdamState& state, const ParamVector& x, const ParamVector& g, double eta,
                   double beta1, double beta2, double eps, std::size_t step_count) {
  if (step_count == 0) throw ConfigError("adam_step: step_count must be >= 1");
  require_same_size(x.size(), g.size(), "adam_step");
  require_same_size(state.m.size(), g.size(), "adam_step first moment");
  require_same_size(state.v.size(), g.size(), "adam_step second moment");
  const double t = static_cast<double>(step_count);
  const double c1 = 1.0 - std::pow(beta1, t);
  const double c2 = 1.0 - std::pow(beta2, t);
  AdamStep out{ParamVector(x.size()), {ParamVector(x.size()), ParamVector(x.size())}};
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double m = beta1 * state.m[i] + (1.0 - beta1) * g[i];
    const double v = beta2 * state.v[i] + (1.0 - beta2) * g[i] * g[i];
    out.state.m[i] = m;
    out.state.v[i] = v;
    const double mhat = m / c1;
    const double denom = std::sqrt(v / c2) + eps;
    // 0/0 only when m == v == 0 and eps == 0: no move
    out.x_next[i] = (mhat == 0.0) ? x[i] : x[i] - eta * mhat / denom;
  }
  require_finite(out.x_next.span(), "adam_step");
  return out;
}

AdagradStep adagrad_step(const ParamVector& accum, const ParamVector& x, const ParamVector& g,
                         double eta, double eps) {
  require_same_size(x.size(), g.size(), "adagrad_step");
  require_same_size(accum.size(), g.size(), "adagrad_step accumulator");
  AdagradStep out{ParamVector(x.size()), ParamVector(x.size())};
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double a = accum[i] + g[i] * g[i];
    out.accum[i] = a;
    out.x_next[i] = (g[i] == 0.0) ? x[i] : x[i] - eta * g[i] / (std::sqrt(a) + eps);
  }
  require_finite(out.x_next.span(), "adagrad_step");
  return out;
}

SpsStep sps_step(const ParamVector& x, const ParamVector& g, double loss_value, double c,
                 double fstar, std::optional<double> max_step) {
  if (!(c > 0.0)) throw ConfigError("sps_step: c must be > 0");
  require_same_size(x.size(), g.size(), "sps_step");
  require_finite(loss_value, "sps_step loss");
  const double gg = vec_norm_sq(g);
  SpsStep out;
  if (gg < 1e-24) {
    out.x_next = x;
    out.skipped = true;
    return out;
  }
  double eta = std::max(0.0, (loss_value - fstar) / (c * gg));
  if (max_step) eta = std::min(eta, *max_step);
  out.eta_used = eta;
  out.x_next = eta == 0.0 ? x : vec_axpy(-eta, g, x);
  return out;
}

}  // namespace dsgd
