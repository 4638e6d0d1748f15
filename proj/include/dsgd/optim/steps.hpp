#pragma once

#include <cstddef>
#include <optional>

#include "dsgd/core/param_vector.hpp"

namespace dsgd {

// Gradient-difference / displacement norms below this are treated as "no
// information" by the locality-adaptive step size.
inline constexpr double kDeltaSgdTiny = 1e-12;

struct DeltaSgdParams {
  double gamma = 2.0;   // amplifier on the curvature branch
  double delta = 0.1;   // damping inside the growth branch
  double eta0 = 0.2;    // step size of the first step of a round
  double theta0 = 1.0;  // initial step-size ratio

  void validate() const;
  friend bool operator==(const DeltaSgdParams&, const DeltaSgdParams&) = default;
};

// Per-client memory of the locality-adaptive step size.
struct DeltaSgdState {
  DeltaSgdParams params;
  double eta_prev = 0.0;
  double theta_prev = 0.0;
  ParamVector x_prev;
  ParamVector g_prev;
  bool has_history = false;

  static DeltaSgdState fresh(const DeltaSgdParams& params);
};

// Both candidate step sizes and the chosen one; branch values are NaN on a
// round's first step where no history exists, branch1 is +inf when the
// curvature estimate is undefined.
struct DeltaSgdTrace {
  double branch1 = 0.0;
  double branch2 = 0.0;
  double eta = 0.0;
};

struct DeltaSgdStep {
  ParamVector x_next;
  double eta_used = 0.0;
  DeltaSgdState state;
  DeltaSgdTrace trace;
};

// One step of the locality-adaptive rule:
//   eta = min{ gamma ||x - x_prev|| / (2 ||g - g_prev||), sqrt(1 + delta theta_prev) eta_prev }
//   x_next = x - eta g,  theta = eta / eta_prev
// Without history the step uses (eta0, theta0) and only records (x, g).
// When ||g - g_prev|| or ||x - x_prev|| is below kDeltaSgdTiny the first
// branch is +inf. Throws InvalidNumber on a non-finite result.
[[nodiscard]] DeltaSgdStep delta_sgd_step(DeltaSgdState state, const ParamVector& x,
                                          const ParamVector& g);

[[nodiscard]] ParamVector sgd_step(double eta, const ParamVector& x, const ParamVector& g);

// 1 before ceil(T/2), 0.1 before ceil(3T/4), 0.01 after.
[[nodiscard]] double lr_decay_factor(std::size_t round, std::size_t total_rounds);

struct MomentumStep {
  ParamVector x_next;
  ParamVector buffer;
};

// Heavy ball without dampening: buf = beta buf + g; x - eta buf.
[[nodiscard]] MomentumStep sgdm_step(double eta, double beta, const ParamVector& buffer,
                                     const ParamVector& x, const ParamVector& g);

struct AdamState {
  ParamVector m;
  ParamVector v;
  friend bool operator==(const AdamState&, const AdamState&) = default;
};

struct AdamStep {
  ParamVector x_next;
  AdamState state;
};

// Bias-corrected Adam; step_count is the 1-based index of this step.
[[nodiscard]] AdamStep adam_step(const AdamState& state, const ParamVector& x, const ParamVector& g,
                                 double eta, double beta1, double beta2, double eps,
                                 std::size_t step_count);

struct AdagradStep {
  ParamVector x_next;
  ParamVector accum;
};

[[nodiscard]] AdagradStep adagrad_step(const ParamVector& accum, const ParamVector& x,
                                       const ParamVector& g, double eta, double eps);

struct SpsStep {
  ParamVector x_next;
  double eta_used = 0.0;
  bool skipped = false;  // gradient too small, no move
};

// Stochastic Polyak step eta = (loss - fstar) / (c ||g||^2), clipped below at 0
// and above at max_step when given.
[[nodiscard]] SpsStep sps_step(const ParamVector& x, const ParamVector& g, double loss_value,
                               double c, double fstar, std::optional<double> max_step = std::nullopt);

}  // namespace dsgd
