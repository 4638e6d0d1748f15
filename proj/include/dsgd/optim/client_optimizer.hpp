#pragma once

#include <cstddef>
#include <optional>
#include <string_view>
#include <variant>

#include "dsgd/optim/steps.hpp"

namespace dsgd {

enum class StepRule { sgd, sgd_decay, sgdm, sgdm_decay, adam, adagrad, sps, delta_sgd };

[[nodiscard]] std::string_view to_string(StepRule rule) noexcept;
// Throws ConfigError on an unknown name.
[[nodiscard]] StepRule parse_step_rule(std::string_view name);

// Rule name plus every hyperparameter any rule reads. Unused fields are
// ignored by the other rules.
struct OptimizerSpec {
  StepRule rule = StepRule::delta_sgd;
  std::optional<double> lr;  // required for the sgd family; adam/adagrad default 0.01
  double momentum = 0.9;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  double adagrad_eps = 1e-10;
  double sps_c = 0.5;
  double sps_fstar = 0.0;
  std::optional<double> sps_max_step;
  DeltaSgdParams delta_sgd;
  // When set, delta-sgd uses gamma = c / (K sqrt(T)) instead of delta_sgd.gamma,
  // K being the client's local step count and T the number of rounds.
  std::optional<double> gamma_theory_c;

  // Throws ConfigError on a missing or out-of-range hyperparameter.
  void validate() const;
  // Base learning rate after defaults are applied; 0 for sps / delta-sgd.
  [[nodiscard]] double base_lr() const;
  // The spec with the gamma schedule resolved for one client.
  [[nodiscard]] OptimizerSpec for_client(std::size_t local_steps, std::size_t total_rounds) const;

  friend bool operator==(const OptimizerSpec&, const OptimizerSpec&) = default;
};

struct StepOutcome {
  ParamVector x_next;
  double eta = 0.0;
  bool skipped = false;
  std::optional<DeltaSgdTrace> branches;  // delta-sgd only
};

// A step rule with its mutable state, owned by one client for one round.
class ClientOptimizer {
 public:
  ClientOptimizer(OptimizerSpec spec, std::size_t dim);

  // Resets round state (momentum, moments, step-size history) and fixes the
  // decay factor for the round.
  void begin_round(std::size_t round, std::size_t total_rounds);

  // Like begin_round but keeps the delta-sgd history from the previous
  // round. Used for the one-step, full-participation analysis regime only.
  void continue_round(std::size_t round, std::size_t total_rounds);

  [[nodiscard]] StepOutcome step(const ParamVector& x, const ParamVector& g, double loss_value);

  [[nodiscard]] const OptimizerSpec& spec() const noexcept { return spec_; }
  [[nodiscard]] std::size_t dim() const noexcept { return dim_; }
  // Present only for the delta-sgd rule.
  [[nodiscard]] const DeltaSgdState* delta_state() const noexcept;

 private:
  struct Plain {};
  struct Momentum {
    ParamVector buffer;
  };
  struct Adam {
    AdamState moments;
    std::size_t steps = 0;
  };
  struct Adagrad {
    ParamVector accum;
  };
  using State = std::variant<Plain, Momentum, Adam, Adagrad, DeltaSgdState>;

  State fresh_state() const;
  void set_decay(std::size_t round, std::size_t total_rounds);

  OptimizerSpec spec_;
  std::size_t dim_;
  double decay_ = 1.0;
  State state_;
};

}  // namespace dsgd
