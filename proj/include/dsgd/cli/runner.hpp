#pragma once

#include <cstddef>
#include <optional>
#include <ostream>
#include <string>

#include "dsgd/cli/config.hpp"
#include "dsgd/fed/experiment.hpp"
#include "dsgd/models/model.hpp"

namespace dsgd::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitDiverged = 3;
inline constexpr int kExitIo = 4;

// Model and per-client data for a config. x_star is set for the
// shared-minimizer source only.
struct PreparedTask {
  Model model;
  FederatedData data;
  std::optional<ParamVector> x_star;
};

// Throws ConfigError (infeasible partition, bad model/data combination) or
// IoError (unreadable data files).
[[nodiscard]] PreparedTask prepare_task(const ExperimentConfig& config);

enum class RunStatus { ok, diverged, config_error, io_error };

[[nodiscard]] std::string_view to_string(RunStatus s) noexcept;
[[nodiscard]] int exit_code(RunStatus s) noexcept;

struct RunSummary {
  RunStatus status = RunStatus::ok;
  std::string message;
  std::size_t rounds_completed = 0;
  double final_test_acc = 0.0;   // NaN when never evaluated
  double final_train_loss = 0.0;
};

// Runs the experiment and writes into config.output_dir:
//   metrics.csv     round,wall_ms,train_loss,test_loss,test_acc,grad_norm_sq,
//                   eta_mean,eta_max,eta_min,participating_clients,skipped_steps
//   analysis.csv    round,V,V_dist,V_pair,V_subopt,Ltilde_hat,sigma2_hat,G_hat,rho_hat,slope
//   step_trace.csv  round,client,local_step,branch1,branch2,eta (analysis.step_trace)
//   final.ckpt      global model after the last completed round
//   config.json     the resolved config
//   run_info.json   status and final metrics
// Rows are written as rounds complete, so a diverged run keeps its prefix.
// Never throws for config, divergence or I/O failures; they are reported in
// the summary. `log` may be null.
[[nodiscard]] RunSummary execute_run(const ExperimentConfig& config, std::ostream* log);

}  // namespace dsgd::cli
