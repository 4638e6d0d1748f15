#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string_view>
#include <vector>

#include "dsgd/analysis/lyapunov.hpp"
#include "dsgd/fed/aggregate.hpp"
#include "dsgd/fed/local_train.hpp"
#include "dsgd/models/dataset.hpp"
#include "dsgd/models/model.hpp"
#include "dsgd/optim/client_optimizer.hpp"

namespace dsgd {

enum class ServerRule { fedavg, fedavg_weighted, fedadam };

[[nodiscard]] std::string_view to_string(ServerRule rule) noexcept;
[[nodiscard]] ServerRule parse_server_rule(std::string_view name);

struct FLConfig {
  std::size_t clients = 100;
  double participation = 0.1;
  std::size_t rounds = 100;
  std::size_t local_epochs = 1;
  std::size_t batch_size = 64;
  ServerRule server_rule = ServerRule::fedavg;
  FedAdamParams server_adam;
  OptimizerSpec client;
  double prox_mu = 0.0;
  std::uint64_t seed = 0;
  // Worker threads for the clients of one round; results do not depend on it.
  std::size_t threads = 1;
  // Global metrics every `eval_stride` rounds (and on the last round).
  std::size_t eval_stride = 1;
  // Keep each client's delta-sgd history across rounds. Only meaningful for
  // one full-batch local step with full participation, where it turns the
  // loop into the distributed adaptive gradient method the convex analysis
  // covers.
  bool persistent_client_state = false;
  bool record_wall_time = false;

  void validate() const;
  friend bool operator==(const FLConfig&, const FLConfig&) = default;
};

// Training data already split per client, plus a held-out test set (may be
// empty).
struct FederatedData {
  std::vector<Dataset> clients;
  Dataset test;
};

struct RoundRecord {
  std::size_t round = 0;
  double wall_ms = 0.0;
  bool evaluated = false;
  double train_loss = 0.0;    // f(x_{t+1}) = mean_i f_i
  double test_loss = 0.0;
  double test_acc = 0.0;      // NaN for regression or an empty test set
  double grad_norm_sq = 0.0;  // ||grad f(x_{t+1})||^2
  double eta_mean = 0.0;
  double eta_max = 0.0;
  double eta_min = 0.0;
  std::size_t participating_clients = 0;
  std::size_t skipped_steps = 0;
  double ltilde_hat = 0.0;  // max local smoothness ratio seen this round, NaN if none
  std::optional<LyapunovSnapshot> lyapunov;
};

struct StepTraceRow {
  std::size_t round = 0;
  std::size_t client = 0;
  std::size_t local_step = 0;
  double branch1 = 0.0;
  double branch2 = 0.0;
  double eta = 0.0;
};

struct ExperimentOptions {
  std::optional<ParamVector> initial_x;  // defaults to model.initial_params
  // Enables Lyapunov snapshots; requires the one-step full-participation
  // full-batch regime with persistent client state.
  std::optional<ParamVector> lyapunov_x_star;
  bool collect_step_trace = false;
  // Called after each round with its record and the new global model.
  std::function<void(const RoundRecord&, const ParamVector&)> on_round;
};

struct ExperimentResult {
  std::vector<RoundRecord> records;
  std::vector<StepTraceRow> step_trace;
  ParamVector final_x;
};

// Thrown by run_experiment; carries everything completed before the failure.
class ExperimentDiverged : public DivergenceError {
 public:
  ExperimentDiverged(const DivergenceError& cause, ExperimentResult partial);
  [[nodiscard]] const ExperimentResult& partial() const noexcept { return partial_; }

 private:
  ExperimentResult partial_;
};

// Global objective f = (1/m) sum_i f_i over full client data.
[[nodiscard]] LossGrad global_loss_and_grad(const Model& model, const ParamVector& x,
                                            const FederatedData& data);

// Runs config.rounds rounds of sample -> local train -> aggregate -> evaluate.
// Deterministic for a given seed regardless of thread count.
[[nodiscard]] ExperimentResult run_experiment(const FLConfig& config, const FederatedData& data,
                                              const Model& model, const ExperimentOptions& options = {});

}  // namespace dsgd
