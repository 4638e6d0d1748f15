#include "dsgd/models/proximal.hpp"

#include "dsgd/core/error.hpp"

namespace dsgd {

ProximalWrapper::ProximalWrapper(Model inner, double mu, ParamVector anchor)
    : inner_(std::move(inner)), mu_(mu), anchor_(std::move(anchor)) {
  if (!(mu_ >= 0.0)) throw ConfigError("proximal wrapper: mu must be >= 0");
  require_same_size(anchor_.size(), inner_.param_count(), "proximal anchor");
  require_finite(anchor_.span(), "proximal anchor");
}

namespace {

double penalty(const ProximalWrapper& w, const ParamVector& x) {
  const double d = vec_dist(x, w.anchor());
  return 0.5 * w.mu() * d * d;
}

void add_penalty_grad(const ProximalWrapper& w, const ParamVector& x, ParamVector& g) {
  for (std::size_t i = 0; i < g.size(); ++i) g[i] += w.mu() * (x[i] - w.anchor()[i]);
  require_finite(g.span(), "proximal gradient");
}

}  // namespace

double prox_loss(const ProximalWrapper& w, const ParamVector& x, const Batch& batch) {
  require_same_size(x.size(), w.anchor().size(), "proximal parameters");
  const double inner = loss(w.inner(), x, batch);
  if (w.mu() == 0.0) return inner;
  return inner + penalty(w, x);
}

ParamVector prox_grad(const ProximalWrapper& w, const ParamVector& x, const Batch& batch) {
  require_same_size(x.size(), w.anchor().size(), "proximal parameters");
  ParamVector g = grad(w.inner(), x, batch);
  if (w.mu() != 0.0) add_penalty_grad(w, x, g);
  return g;
}

LossGrad prox_loss_and_grad(const ProximalWrapper& w, const ParamVector& x, const Batch& batch) {
  require_same_size(x.size(), w.anchor().size(), "proximal parameters");
  LossGrad out = loss_and_grad(w.inner(), x, batch);
  if (w.mu() != 0.0) {
    out.loss += penalty(w, x);
    add_penalty_grad(w, x, out.grad);
  }
  return out;
}

}  // namespace dsgd
