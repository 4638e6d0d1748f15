#include "dsgd/cli/runner.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <memory>

#include "dsgd/analysis/assumptions.hpp"
#include "dsgd/analysis/convergence.hpp"
#include "dsgd/analysis/shared_minimizer.hpp"
#include "dsgd/cli/csv.hpp"
#include "dsgd/cli/synthetic.hpp"
#include "dsgd/core/error.hpp"
#include "dsgd/fed/io.hpp"
#include "dsgd/fed/partition.hpp"

namespace dsgd::cli {

namespace fs = std::filesystem;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr std::uint64_t kPartitionTag = 0xDA7A;
constexpr std::uint64_t kSharedTag = 0x5A4E;
constexpr std::uint64_t kProbeTag = 0xA11;

Model make_model(const ModelSpec& spec, std::size_t feature_dim, std::size_t num_classes) {
  switch (spec.kind) {
    case ModelKind::linear_regression: return Model::linear_regression(feature_dim);
    case ModelKind::softmax_regression: return Model::softmax_regression(feature_dim, num_classes);
    case ModelKind::mlp: return Model::mlp(feature_dim, spec.hidden, num_classes);
  }
  throw ConfigError("unknown model kind");
}

std::vector<Dataset> split_clients(const ExperimentConfig& c, const Dataset& train) {
  SeededRng rng(c.fl.seed, stream_id({kPartitionTag, 1}));
  std::optional<std::vector<std::size_t>> quotas;
  if (c.partition.scheme == "unequal") {
    quotas = unequal_partition_sizes(c.fl.clients, c.partition.n_min, c.partition.n_max, train.size(), rng);
  }
  const Partition p = dirichlet_partition(train.labels, train.num_classes, c.fl.clients, c.partition.alpha, rng, quotas);
  std::vector<Dataset> out;
  out.reserve(p.num_clients());
  for (const auto& idx : p.client_indices) out.push_back(train.subset(idx));
  return out;
}

void write_json(const fs::path& path, const nlohmann::json& j) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

void as_regression(Dataset& d) {
  d.targets.assign(d.labels.begin(), d.labels.end());
  std::fill(d.labels.begin(), d.labels.end(), 0);
  d.num_classes = 1;
}

nlohmann::json number_or_null(double v) {
  return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

}  // namespace

PreparedTask prepare_task(const ExperimentConfig& c) {
  c.validate();
  const DatasetSpec& ds = c.dataset;
  Dataset train, test;
  if (ds.source == "shared-minimizer") {
    SeededRng rng(ds.synthetic.seed, stream_id({kSharedTag, 1}));
    SharedMinimizerProblem p = shared_minimizer_softmax(c.fl.clients, ds.synthetic.classes, ds.synthetic.dim,
                                                        ds.shared_points, ds.shared_client_spread, rng);
    return PreparedTask{p.model, std::move(p.data), std::move(p.x_star)};
  }
  if (ds.source == "synthetic") {
    SplitDataset s = generate_synthetic(ds.synthetic);
    train = std::move(s.train);
    test = std::move(s.test);
  } else if (ds.source == "idx") {
    train = read_idx(ds.train_images, ds.train_labels);
    if (!ds.test_images.empty()) test = read_idx(ds.test_images, ds.test_labels, train.num_classes);
  } else {
    train = read_dataset_csv(ds.train_csv);
    if (!ds.test_csv.empty()) test = read_dataset_csv(ds.test_csv, train.num_classes);
  }
  if (!test.labels.empty()) {
    if (test.feature_dim != train.feature_dim) throw ConfigError("train and test feature counts differ");
    test.num_classes = train.num_classes = std::max(train.num_classes, test.num_classes);
  }
  if (test.labels.empty()) {
    test.feature_dim = train.feature_dim;
    test.num_classes = train.num_classes;
  }
  PreparedTask out{make_model(c.model, train.feature_dim, train.num_classes), {}, std::nullopt};
  out.data.clients = split_clients(c, train);
  out.data.test = std::move(test);
  if (c.model.kind == ModelKind::linear_regression) {
    // regress on the label value; partitioning above still used the classes
    out.model = Model::linear_regression(train.feature_dim);
    for (Dataset& d : out.data.clients) as_regression(d);
    as_regression(out.data.test);
  }
  return out;
}

std::string_view to_string(RunStatus s) noexcept {
  switch (s) {
    case RunStatus::ok: return "ok";
    case RunStatus::diverged: return "diverged";
    case RunStatus::config_error: return "config-error";
    case RunStatus::io_error: return "io-error";
  }
  return "unknown";
}

int exit_code(RunStatus s) noexcept {
  switch (s) {
    case RunStatus::ok: return kExitOk;
    case RunStatus::diverged: return kExitDiverged;
    case RunStatus::config_error: return kExitConfig;
    case RunStatus::io_error: return kExitIo;
  }
  return kExitIo;
}

RunSummary execute_run(const ExperimentConfig& config, std::ostream* log) {
  RunSummary summary;
  summary.final_test_acc = summary.final_train_loss = kNaN;

  PreparedTask task{Model::linear_regression(1), {}, std::nullopt};
  try {
    task = prepare_task(config);
  } catch (const ConfigError& e) {
    return {RunStatus::config_error, e.what(), 0, kNaN, kNaN};
  } catch (const DimensionError& e) {
    return {RunStatus::config_error, e.what(), 0, kNaN, kNaN};
  } catch (const IoError& e) {
    return {RunStatus::io_error, e.what(), 0, kNaN, kNaN};
  }

  const fs::path dir = config.output_dir;
  std::unique_ptr<CsvWriter> metrics, analysis, trace;
  try {
    fs::create_directories(dir);
    write_json(dir / "config.json", config_to_json(config));
    metrics = std::make_unique<CsvWriter>(
        dir / "metrics.csv",
        std::initializer_list<std::string_view>{"round", "wall_ms", "train_loss", "test_loss", "test_acc",
                                                "grad_norm_sq", "eta_mean", "eta_max", "eta_min",
                                                "participating_clients", "skipped_steps"});
    analysis = std::make_unique<CsvWriter>(
        dir / "analysis.csv",
        std::initializer_list<std::string_view>{"round", "V", "V_dist", "V_pair", "V_subopt", "Ltilde_hat",
                                                "sigma2_hat", "G_hat", "rho_hat", "slope"});
    if (config.analysis.step_trace) {
      trace = std::make_unique<CsvWriter>(
          dir / "step_trace.csv",
          std::initializer_list<std::string_view>{"round", "client", "local_step", "branch1", "branch2", "eta"});
    } else {
      fs::remove(dir / "step_trace.csv");
    }
  } catch (const fs::filesystem_error& e) {
    return {RunStatus::io_error, e.what(), 0, kNaN, kNaN};
  } catch (const IoError& e) {
    return {RunStatus::io_error, e.what(), 0, kNaN, kNaN};
  }

  std::vector<double> grad_history;
  ProbeSettings probe;
  probe.batch_size = config.analysis.probe_batch;
  probe.batch_draws = config.analysis.probe_draws;

  ExperimentOptions options;
  options.collect_step_trace = config.analysis.step_trace;
  if (config.analysis.lyapunov) options.lyapunov_x_star = task.x_star;
  std::size_t trace_written = 0;

  options.on_round = [&](const RoundRecord& r, const ParamVector& x) {
    metrics->cell(r.round).cell(r.wall_ms).cell(r.train_loss).cell(r.test_loss).cell(r.test_acc)
        .cell(r.grad_norm_sq).cell(r.eta_mean).cell(r.eta_max).cell(r.eta_min)
        .cell(r.participating_clients).cell(r.skipped_steps);
    metrics->end_row();
    if (r.evaluated) {
      grad_history.push_back(r.grad_norm_sq);
      summary.final_test_acc = r.test_acc;
      summary.final_train_loss = r.train_loss;
    }
    summary.rounds_completed = r.round + 1;

    double sigma2 = kNaN, g = kNaN, rho = kNaN;
    if (config.analysis.constants && r.round % config.analysis.constants_stride == 0) {
      const std::vector<ParamVector> probes{x};
      SeededRng rng(config.fl.seed, stream_id({kProbeTag, r.round}));
      const AssumptionEstimates est = estimate_assumption_constants(task.model, task.data.clients, probes, probe, rng);
      sigma2 = est.sigma2_hat;
      g = est.g_hat;
      rho = est.rho_hat.value_or(kNaN);
    }
    double slope = kNaN;
    if (r.round + 1 == config.fl.rounds && grad_history.size() >= 50) {
      try {
        slope = convergence_slope(grad_history);
      } catch (const Error&) {
        slope = kNaN;
      }
    }
    const auto& v = r.lyapunov;
    analysis->cell(r.round)
        .cell(v ? v->value : kNaN)
        .cell(v ? v->distance : kNaN)
        .cell(v ? v->pairwise : kNaN)
        .cell(v ? v->suboptimality : kNaN)
        .cell(r.ltilde_hat)
        .cell(sigma2)
        .cell(g)
        .cell(rho)
        .cell(slope);
    analysis->end_row();
  };

  auto flush_trace = [&](const std::vector<StepTraceRow>& rows) {
    if (!trace) return;
    for (; trace_written < rows.size(); ++trace_written) {
      const StepTraceRow& s = rows[trace_written];
      trace->cell(s.round).cell(s.client).cell(s.local_step).cell(s.branch1).cell(s.branch2).cell(s.eta);
      trace->end_row();
    }
  };

  try {
    try {
      const ExperimentResult result = run_experiment(config.fl, task.data, task.model, options);
      flush_trace(result.step_trace);
      save_checkpoint(dir / "final.ckpt", result.final_x);
      summary.status = RunStatus::ok;
    } catch (const ExperimentDiverged& e) {
      flush_trace(e.partial().step_trace);
      save_checkpoint(dir / "final.ckpt", e.partial().final_x);
      summary.status = RunStatus::diverged;
      summary.message = e.what();
    }
  } catch (const ConfigError& e) {
    summary.status = RunStatus::config_error;
    summary.message = e.what();
  } catch (const IoError& e) {
    summary.status = RunStatus::io_error;
    summary.message = e.what();
  }

  nlohmann::json info{{"status", std::string(to_string(summary.status))},
                      {"exit_code", exit_code(summary.status)},
                      {"name", config.name},
                      {"task", config.task},
                      {"optimizer", std::string(to_string(config.fl.client.rule))},
                      {"seed", config.fl.seed},
                      {"rounds_completed", summary.rounds_completed},
                      {"final_test_acc", number_or_null(summary.final_test_acc)},
                      {"final_train_loss", number_or_null(summary.final_train_loss)},
                      {"message", summary.message}};
  try {
    write_json(dir / "run_info.json", info);
  } catch (const IoError& e) {
    if (summary.status == RunStatus::ok) summary = {RunStatus::io_error, e.what(), summary.rounds_completed, kNaN, kNaN};
  }
  if (log) {
    *log << config.name << ": " << to_string(summary.status) << ", " << summary.rounds_completed << " rounds";
    if (std::isfinite(summary.final_test_acc)) *log << ", test_acc " << format_double(summary.final_test_acc);
    if (!summary.message.empty()) *log << " (" << summary.message << ")";
    *log << '\n';
  }
  return summary;
}

}  // namespace dsgd::cli
