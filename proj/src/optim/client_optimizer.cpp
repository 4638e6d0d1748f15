#include "dsgd/optim/client_optimizer.hpp"

#include <cmath>
#include <string>

#include "dsgd/core/error.hpp"

namespace dsgd {

namespace {
constexpr double kAdaptiveDefaultLr = 0.01;
}

std::string_view to_string(StepRule rule) noexcept {
  switch (rule) {
    case StepRule::sgd: return "sgd";
    case StepRule::sgd_decay: return "sgd-decay";
    case StepRule::sgdm: return "sgdm";
    case StepRule::sgdm_decay: return "sgdm-decay";
    case StepRule::adam: return "adam";
    case StepRule::adagrad: return "adagrad";
    case StepRule::sps: return "sps";
    case StepRule::delta_sgd: return "delta-sgd";
  }
  return "unknown";
}

StepRule parse_step_rule(std::string_view name) {
  for (StepRule r : {StepRule::sgd, StepRule::sgd_decay, StepRule::sgdm, StepRule::sgdm_decay,
                     StepRule::adam, StepRule::adagrad, StepRule::sps, StepRule::delta_sgd}) {
    if (name == to_string(r)) return r;
  }
  throw ConfigError("unknown optimizer '" + std::string(name) + "'");
}

void OptimizerSpec::validate() const {
  switch (rule) {
    case StepRule::sgd:
    case StepRule::sgd_decay:
    case StepRule::sgdm:
    case StepRule::sgdm_decay:
      if (!lr) throw ConfigError(std::string(to_string(rule)) + ": lr is required");
      break;
    default:
      break;
  }
  if (lr && !(*lr > 0.0)) throw ConfigError("optimizer: lr must be > 0");
  if (rule == StepRule::sgdm || rule == StepRule::sgdm_decay) {
    if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("sgdm: momentum must lie in [0, 1)");
  }
  if (rule == StepRule::adam) {
    if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
      throw ConfigError("adam: betas must lie in [0, 1)");
    }
    if (!(adam_eps >= 0.0)) throw ConfigError("adam: eps must be >= 0");
  }
  if (rule == StepRule::adagrad && !(adagrad_eps >= 0.0)) throw ConfigError("adagrad: eps must be >= 0");
  if (rule == StepRule::sps) {
    if (!(sps_c > 0.0)) throw ConfigError("sps: c must be > 0");
    if (sps_max_step && !(*sps_max_step > 0.0)) throw ConfigError("sps: max_step must be > 0");
  }
  if (rule == StepRule::delta_sgd) delta_sgd.validate();
  if (gamma_theory_c && !(*gamma_theory_c > 0.0)) throw ConfigError("delta-sgd: gamma_theory_c must be > 0");
}

OptimizerSpec OptimizerSpec::for_client(std::size_t local_steps, std::size_t total_rounds) const {
  OptimizerSpec out = *this;
  if (rule == StepRule::delta_sgd && gamma_theory_c && local_steps > 0 && total_rounds > 0) {
    out.delta_sgd.gamma = *gamma_theory_c / (static_cast<double>(local_steps) *
                                             std::sqrt(static_cast<double>(total_rounds)));
  }
  return out;
}

double OptimizerSpec::base_lr() const {
  switch (rule) {
    case StepRule::adam:
    case StepRule::adagrad:
      return lr.value_or(kAdaptiveDefaultLr);
    case StepRule::sps:
    case StepRule::delta_sgd:
      return 0.0;
    default:
      return lr.value_or(0.0);
  }
}

ClientOptimizer::ClientOptimizer(OptimizerSpec spec, std::size_t dim)
    : spec_(std::move(spec)), dim_(dim) {
  spec_.validate();
  state_ = fresh_state();
}

ClientOptimizer::State ClientOptimizer::fresh_state() const {
  switch (spec_.rule) {
    case StepRule::sgdm:
    case StepRule::sgdm_decay:
      return Momentum{ParamVector(dim_)};
    case StepRule::adam:
      return Adam{{ParamVector(dim_), ParamVector(dim_)}, 0};
    case StepRule::adagrad:
      return Adagrad{ParamVector(dim_)};
    case StepRule::delta_sgd:
      return DeltaSgdState::fresh(spec_.delta_sgd);
    default:
      return Plain{};
  }
}

void ClientOptimizer::set_decay(std::size_t round, std::size_t total_rounds) {
  const bool decays = spec_.rule == StepRule::sgd_decay || spec_.rule == StepRule::sgdm_decay;
  decay_ = decays ? lr_decay_factor(round, total_rounds) : 1.0;
}

void ClientOptimizer::begin_round(std::size_t round, std::size_t total_rounds) {
  set_decay(round, total_rounds);
  state_ = fresh_state();
}

void ClientOptimizer::continue_round(std::size_t round, std::size_t total_rounds) {
  set_decay(round, total_rounds);
  if (!std::holds_alternative<DeltaSgdState>(state_)) state_ = fresh_state();
}

const DeltaSgdState* ClientOptimizer::delta_state() const noexcept {
  return std::get_if<DeltaSgdState>(&state_);
}

StepOutcome ClientOptimizer::step(const ParamVector& x, const ParamVector& g, double loss_value) {
  require_same_size(x.size(), dim_, "optimizer step");
  StepOutcome out;
  const double eta = spec_.base_lr() * decay_;
  switch (spec_.rule) {
    case StepRule::sgd:
    case StepRule::sgd_decay:
      out.x_next = sgd_step(eta, x, g);
      out.eta = eta;
      break;
    case StepRule::sgdm:
    case StepRule::sgdm_decay: {
      auto& st = std::get<Momentum>(state_);
      auto r = sgdm_step(eta, spec_.momentum, st.buffer, x, g);
      st.buffer = std::move(r.buffer);
      out.x_next = std::move(r.x_next);
      out.eta = eta;
      break;
    }
    case StepRule::adam: {
      auto& st = std::get<Adam>(state_);
      ++st.steps;
      auto r = adam_step(st.moments, x, g, eta, spec_.beta1, spec_.beta2, spec_.adam_eps, st.steps);
      st.moments = std::move(r.state);
      out.x_next = std::move(r.x_next);
      out.eta = eta;
      break;
    }
    case StepRule::adagrad: {
      auto& st = std::get<Adagrad>(state_);
      auto r = adagrad_step(st.accum, x, g, eta, spec_.adagrad_eps);
      st.accum = std::move(r.accum);
      out.x_next = std::move(r.x_next);
      out.eta = eta;
      break;
    }
    case StepRule::sps: {
      auto r = sps_step(x, g, loss_value, spec_.sps_c, spec_.sps_fstar, spec_.sps_max_step);
      out.x_next = std::move(r.x_next);
      out.eta = r.eta_used;
      out.skipped = r.skipped;
      break;
    }
    case StepRule::delta_sgd: {
      auto r = delta_sgd_step(std::move(std::get<DeltaSgdState>(state_)), x, g);
      state_ = std::move(r.state);
      out.x_next = std::move(r.x_next);
      out.eta = r.eta_used;
      out.branches = r.trace;
      break;
    }
  }
  return out;
}

}  // namespace dsgd
