#pragma once

#include <cstddef>
#include <functional>
#include <span>

#include "dsgd/core/param_vector.hpp"

namespace dsgd {

// Per-client objective f_i(x).
using ClientObjective = std::function<double(std::size_t client, const ParamVector& x)>;

// Description of the run the snapshot is taken from. The potential only
// certifies anything for one full-batch local step with every client
// participating.
struct LyapunovRegime {
  std::size_t local_steps = 1;
  double participation = 1.0;
  bool full_batch = true;
};

struct LyapunovSnapshot {
  std::size_t round = 0;
  double value = 0.0;
  double distance = 0.0;        // ||x_t - x*||^2
  double pairwise = 0.0;        // (1/2m) sum ||x_t^i - x_{t-1}^i||^2
  double suboptimality = 0.0;   // (2/m) sum eta_t^i theta_t^i (f_i(x_{t-1}^i) - f_i(x*))
};

struct LyapunovInputs {
  std::size_t round = 0;
  const ParamVector* x_t = nullptr;
  std::span<const ParamVector> x_curr;  // x_t^i
  std::span<const ParamVector> x_prev;  // x_{t-1}^i
  std::span<const double> eta;          // eta_t^i
  std::span<const double> theta;        // theta_t^i
  const ParamVector* x_star = nullptr;
};

// V_t = ||x_t - x*||^2 + (1/2m) sum_i ||x_t^i - x_{t-1}^i||^2
//       + (2/m) sum_i eta_t^i theta_t^i (f_i(x_{t-1}^i) - f_i(x*)).
// Throws ConfigError outside the regime (K != 1, p != 1, stochastic batches)
// and DimensionError when the per-client spans disagree in length.
[[nodiscard]] LyapunovSnapshot lyapunov_value(const LyapunovInputs& in, const ClientObjective& f,
                                              const LyapunovRegime& regime);

}  // namespace dsgd
