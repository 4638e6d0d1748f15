#include "dsgd/fed/aggregate.hpp"

#include <cmath>
#include <vector>

#include "dsgd/core/error.hpp"

namespace dsgd {

ParamVector fedavg_aggregate(std::span<const ParamVector> params, std::span<const double> weights) {
  if (params.empty()) throw ConfigError("fedavg: no client parameters to aggregate");
  if (weights.size() != params.size()) throw ConfigError("fedavg: one weight per client required");
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw ConfigError("fedavg: weights must be finite and >= 0");
    total += w;
  }
  if (!(total > 0.0)) throw ConfigError("fedavg: weights sum to zero");

  const std::size_t d = params.front().size();
  ParamVector out(d);
  for (std::size_t i = 0; i < params.size(); ++i) {
    require_same_size(params[i].size(), d, "fedavg");
    const double u = weights[i] / total;
    for (std::size_t j = 0; j < d; ++j) out[j] += u * params[i][j];
  }
  require_finite(out.span(), "fedavg");
  return out;
}

ParamVector fedavg_aggregate(std::span<const ParamVector> params) {
  const std::vector<double> ones(params.size(), 1.0);
  return fedavg_aggregate(params, ones);
}

ServerState ServerState::plain(ParamVector x0) {
  ServerState s;
  s.x = std::move(x0);
  return s;
}

ServerState ServerState::with_adam(ParamVector x0) {
  ServerState s;
  const std::size_t d = x0.size();
  s.x = std::move(x0);
  s.moments = AdamState{ParamVector(d), ParamVector(d)};
  return s;
}

ServerState fedadam_aggregate(const ServerState& server, const ParamVector& client_avg,
                              const FedAdamParams& p) {
  if (!server.moments) throw ConfigError("fedadam: server state has no moments");
  const ParamVector pseudo_grad = vec_sub(server.x, client_avg);
  ServerState next;
  next.steps = server.steps + 1;
  auto step = adam_step(*server.moments, server.x, pseudo_grad, p.lr, p.beta1, p.beta2, p.eps,
                        next.steps);
  next.x = std::move(step.x_next);
  next.moments = std::move(step.state);
  return next;
}

}  // namespace dsgd
