#pragma once

#include <cstddef>
#include <optional>
#include <span>

#include "dsgd/core/param_vector.hpp"
#include "dsgd/optim/steps.hpp"

namespace dsgd {

// sum_i w_i x_i / sum_i w_i, accumulated in list order. Weights are
// normalized before the sum, so equal weights of any scale give the same
// bits as plain averaging. Throws ConfigError on an empty list, negative
// weights, or a zero weight sum.
[[nodiscard]] ParamVector fedavg_aggregate(std::span<const ParamVector> params,
                                           std::span<const double> weights);

// Plain mean (all-ones weights).
[[nodiscard]] ParamVector fedavg_aggregate(std::span<const ParamVector> params);

struct FedAdamParams {
  double lr = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  friend bool operator==(const FedAdamParams&, const FedAdamParams&) = default;
};

// Global model plus the server optimizer's moments (FedAdam only).
struct ServerState {
  ParamVector x;
  std::optional<AdamState> moments;
  std::size_t steps = 0;

  static ServerState plain(ParamVector x0);
  static ServerState with_adam(ParamVector x0);
};

// Adam on the pseudo-gradient x_t - client_avg. Coordinates whose first
// moment is exactly zero do not move.
[[nodiscard]] ServerState fedadam_aggregate(const ServerState& server, const ParamVector& client_avg,
                                            const FedAdamParams& params);

}  // namespace dsgd
