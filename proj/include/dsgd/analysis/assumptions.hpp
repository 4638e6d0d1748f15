#pragma once

#include <cstddef>
#include <optional>
#include <span>

#include "dsgd/core/param_vector.hpp"
#include "dsgd/core/rng.hpp"
#include "dsgd/models/dataset.hpp"
#include "dsgd/models/model.hpp"

namespace dsgd {

// Empirical maxima over a probe set. They are lower bounds on the suprema
// over all of R^d, never the constants themselves.
struct AssumptionEstimates {
  double sigma2_hat = 0.0;             // max_i,x mean_B ||grad_B f_i(x) - grad f_i(x)||^2
  double g_hat = 0.0;                  // max_i,x ||grad f_i(x)||
  std::optional<double> rho_hat;       // max_i,x ||grad f_i - grad f||^2 / ||grad f||^2
  std::optional<double> ltilde_hat;    // max_i over consecutive probes of the smoothness ratio
  std::size_t probes = 0;
  std::size_t rho_probes_skipped = 0;
};

struct ProbeSettings {
  std::size_t batch_size = 1;     // batch size of the stochastic gradients
  std::size_t batch_draws = 16;   // draws per (client, probe)
  double rho_min_grad_norm = 1e-8;
};

// Probes every point for every client. Batch draws for (probe j, client i)
// use a stream derived from (j, i), so appending probes never changes the
// contribution of earlier ones. A batch at least as large as the client's
// data is the full data, giving zero variance. Throws ConfigError on an
// empty probe set or no clients.
[[nodiscard]] AssumptionEstimates estimate_assumption_constants(const Model& model,
                                                                std::span<const Dataset> clients,
                                                                std::span<const ParamVector> probes,
                                                                const ProbeSettings& settings,
                                                                const SeededRng& rng);

// Coordinate-wise maximum of two estimate sets (for running estimates).
[[nodiscard]] AssumptionEstimates merge_estimates(const AssumptionEstimates& a, const AssumptionEstimates& b);

// Psi_2 = sigma^2 / b + G^2 and, when the initial gap f(x0) - f* is known,
// Psi_1 = max{sigma^2 / b, f(x0) - f*}; reported, not asserted.
struct RateConstants {
  double psi2 = 0.0;
  std::optional<double> psi1;
};

[[nodiscard]] RateConstants rate_constants(const AssumptionEstimates& est, std::size_t batch_size,
                                           std::optional<double> initial_gap);

}  // namespace dsgd
