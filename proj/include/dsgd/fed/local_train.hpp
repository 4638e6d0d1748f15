#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "dsgd/core/error.hpp"
#include "dsgd/core/rng.hpp"
#include "dsgd/models/dataset.hpp"
#include "dsgd/models/model.hpp"
#include "dsgd/optim/client_optimizer.hpp"

namespace dsgd {

// Local training produced a non-finite iterate or loss.
class DivergenceError : public Error {
 public:
  DivergenceError(std::size_t round, std::size_t client, std::size_t step, const std::string& detail);

  [[nodiscard]] std::size_t round() const noexcept { return round_; }
  [[nodiscard]] std::size_t client() const noexcept { return client_; }
  [[nodiscard]] std::size_t step() const noexcept { return step_; }

 private:
  std::size_t round_;
  std::size_t client_;
  std::size_t step_;
};

struct LocalStepRecord {
  std::size_t step = 0;
  double loss = 0.0;  // mini-batch loss at the pre-step iterate
  double eta = 0.0;
  bool skipped = false;
  std::optional<DeltaSgdTrace> branches;
  // ||g_k - g_{k-1}|| / ||x_k - x_{k-1}|| against the previous step; NaN on
  // the first step or when the displacement is negligible
  double smoothness = 0.0;
};

struct LocalTrainSettings {
  std::size_t epochs = 1;
  std::size_t batch_size = 64;
  double prox_mu = 0.0;
  std::size_t round = 0;   // for error context only
  std::size_t client = 0;  // for error context only
};

struct LocalTrainResult {
  ParamVector x;
  std::vector<LocalStepRecord> trace;
};

// Number of local steps: epochs * ceil(n / batch_size).
[[nodiscard]] std::size_t local_step_count(std::size_t n, std::size_t epochs, std::size_t batch_size);

// Runs epochs * ceil(n_i / b) mini-batch steps from x_t. Each epoch visits a
// fresh shuffle of the client's samples; the last batch of an epoch may be
// short. One gradient evaluation per step, shared by the step-size rule and
// the update. With prox_mu > 0 the loss gains (mu/2)||x - x_t||^2.
//
// The optimizer's round state must already be prepared (begin_round /
// continue_round). Throws DivergenceError on non-finite values.
[[nodiscard]] LocalTrainResult local_train(const ParamVector& x_t, const Model& model,
                                           const Dataset& client_data, ClientOptimizer& opt,
                                           const LocalTrainSettings& settings, SeededRng& rng);

}  // namespace dsgd
