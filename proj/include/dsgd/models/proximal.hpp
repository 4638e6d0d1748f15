#pragma once

#include "dsgd/models/model.hpp"

namespace dsgd {

// FedProx objective: inner loss + (mu / 2) ||x - anchor||^2, where the anchor
// is the round-start global model.
class ProximalWrapper {
 public:
  // Throws ConfigError for mu < 0 and DimensionError when the anchor does not
  // match the model's parameter count.
  ProximalWrapper(Model inner, double mu, ParamVector anchor);

  [[nodiscard]] const Model& inner() const noexcept { return inner_; }
  [[nodiscard]] double mu() const noexcept { return mu_; }
  [[nodiscard]] const ParamVector& anchor() const noexcept { return anchor_; }

 private:
  Model inner_;
  double mu_;
  ParamVector anchor_;
};

// With mu == 0 these return the inner model's values unchanged (bitwise).
[[nodiscard]] double prox_loss(const ProximalWrapper& w, const ParamVector& x, const Batch& batch);
[[nodiscard]] ParamVector prox_grad(const ProximalWrapper& w, const ParamVector& x, const Batch& batch);
[[nodiscard]] LossGrad prox_loss_and_grad(const ProximalWrapper& w, const ParamVector& x,
                                          const Batch& batch);

}  // namespace dsgd
