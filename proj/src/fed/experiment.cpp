#include "dsgd/fed/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <string>
#include <thread>

#include "dsgd/core/error.hpp"
#include "dsgd/fed/sampling.hpp"

namespace dsgd {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr std::uint64_t kInitTag = 0x1001;
constexpr std::uint64_t kSampleTag = 0x1002;
constexpr std::uint64_t kLocalTag = 0x1003;

// Runs body(i) for i in [0, n) on up to `threads` workers. Exceptions are
// collected per index and the lowest-index one is rethrown.
template <typename Body>
void parallel_for(std::size_t n, std::size_t threads, Body&& body) {
  std::vector<std::exception_ptr> errors(n);
  auto run_one = [&](std::size_t i) {
    try {
      body(i);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };
  const std::size_t workers = std::min(threads, n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) run_one(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) run_one(i);
      });
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace

std::string_view to_string(ServerRule rule) noexcept {
  switch (rule) {
    case ServerRule::fedavg: return "fedavg";
    case ServerRule::fedavg_weighted: return "fedavg-weighted";
    case ServerRule::fedadam: return "fedadam";
  }
  return "unknown";
}

ServerRule parse_server_rule(std::string_view name) {
  for (ServerRule r : {ServerRule::fedavg, ServerRule::fedavg_weighted, ServerRule::fedadam}) {
    if (name == to_string(r)) return r;
  }
  throw ConfigError("unknown server rule '" + std::string(name) + "'");
}

void FLConfig::validate() const {
  if (clients == 0) throw ConfigError("clients must be >= 1");
  (void)participants_per_round(clients, participation);
  if (local_epochs == 0) throw ConfigError("local_epochs must be >= 1");
  if (batch_size == 0) throw ConfigError("batch_size must be >= 1");
  if (!(prox_mu >= 0.0)) throw ConfigError("prox_mu must be >= 0");
  if (threads == 0) throw ConfigError("threads must be >= 1");
  if (eval_stride == 0) throw ConfigError("eval_stride must be >= 1");
  if (server_rule == ServerRule::fedadam) {
    if (!(server_adam.lr > 0.0)) throw ConfigError("fedadam: lr must be > 0");
    if (!(server_adam.beta1 >= 0.0 && server_adam.beta1 < 1.0) ||
        !(server_adam.beta2 >= 0.0 && server_adam.beta2 < 1.0)) {
      throw ConfigError("fedadam: betas must lie in [0, 1)");
    }
    if (!(server_adam.eps >= 0.0)) throw ConfigError("fedadam: eps must be >= 0");
  }
  client.validate();
}

ExperimentDiverged::ExperimentDiverged(const DivergenceError& cause, ExperimentResult partial)
    : DivergenceError(cause), partial_(std::move(partial)) {}

LossGrad global_loss_and_grad(const Model& model, const ParamVector& x, const FederatedData& data) {
  LossGrad out{0.0, ParamVector(x.size())};
  const auto m = static_cast<double>(data.clients.size());
  for (const Dataset& d : data.clients) {
    const LossGrad lg = loss_and_grad(model, x, Batch::full(d));
    out.loss += lg.loss / m;
    for (std::size_t j = 0; j < x.size(); ++j) out.grad[j] += lg.grad[j] / m;
  }
  return out;
}

ExperimentResult run_experiment(const FLConfig& config, const FederatedData& data,
                                const Model& model, const ExperimentOptions& options) {
  config.validate();
  if (data.clients.size() != config.clients) {
    throw ConfigError("data holds " + std::to_string(data.clients.size()) + " clients, config " +
                      std::to_string(config.clients));
  }
  std::size_t max_client_size = 0;
  for (const Dataset& d : data.clients) {
    if (d.size() == 0) throw ConfigError("every client must hold at least one sample");
    require_same_size(d.feature_dim, model.feature_dim(), "client feature dimension");
    max_client_size = std::max(max_client_size, d.size());
  }

  const std::size_t d = model.param_count();
  ParamVector x0;
  if (options.initial_x) {
    x0 = *options.initial_x;
    require_same_size(x0.size(), d, "initial parameters");
  } else {
    SeededRng init_rng(config.seed, stream_id({kInitTag}));
    x0 = model.initial_params(init_rng);
  }

  const bool track_lyapunov = options.lyapunov_x_star.has_value();
  const bool persistent = config.persistent_client_state;
  const std::size_t per_round = participants_per_round(config.clients, config.participation);
  if (persistent || track_lyapunov) {
    const bool one_step = config.local_epochs == 1 && config.batch_size >= max_client_size;
    if (!one_step || per_round != config.clients) {
      throw ConfigError(
          "persistent client state / Lyapunov tracking need one full-batch local step with full "
          "participation");
    }
  }
  if (track_lyapunov) {
    if (!persistent || config.client.rule != StepRule::delta_sgd) {
      throw ConfigError("Lyapunov tracking needs delta-sgd with persistent client state");
    }
    if (config.prox_mu != 0.0 || config.server_rule == ServerRule::fedadam) {
      throw ConfigError("Lyapunov tracking needs plain averaging without a proximal term");
    }
    require_same_size(options.lyapunov_x_star->size(), d, "Lyapunov minimizer");
  }

  ServerState server = config.server_rule == ServerRule::fedadam ? ServerState::with_adam(x0)
                                                                 : ServerState::plain(x0);
  std::vector<ClientOptimizer> persistent_opts;
  const auto client_spec = [&](std::size_t client) {
    const std::size_t k = local_step_count(data.clients[client].size(), config.local_epochs, config.batch_size);
    return config.client.for_client(k, config.rounds);
  };
  if (persistent) {
    persistent_opts.reserve(config.clients);
    for (std::size_t i = 0; i < config.clients; ++i) persistent_opts.emplace_back(client_spec(i), d);
  }

  ExperimentResult result;
  ParamVector prev_x;  // x_{t-1}, for the Lyapunov pairwise term
  const ClientObjective objective = [&](std::size_t i, const ParamVector& x) {
    return loss(model, x, Batch::full(data.clients[i]));
  };

  for (std::size_t t = 0; t < config.rounds; ++t) {
    const auto started = std::chrono::steady_clock::now();
    SeededRng sample_rng(config.seed, stream_id({kSampleTag, t}));
    const std::vector<std::size_t> chosen = sample_clients(config.clients, config.participation, sample_rng);

    std::vector<LocalTrainResult> local(chosen.size());
    std::vector<double> etas_now(chosen.size(), kNaN), thetas_now(chosen.size(), kNaN);
    try {
      parallel_for(chosen.size(), config.threads, [&](std::size_t slot) {
        const std::size_t client = chosen[slot];
        SeededRng rng(config.seed, stream_id({kLocalTag, t, client}));
        LocalTrainSettings settings{config.local_epochs, config.batch_size, config.prox_mu, t, client};
        if (persistent) {
          ClientOptimizer& opt = persistent_opts[client];
          opt.continue_round(t, config.rounds);
          local[slot] = local_train(server.x, model, data.clients[client], opt, settings, rng);
          if (const DeltaSgdState* s = opt.delta_state()) {
            etas_now[slot] = s->eta_prev;
            thetas_now[slot] = s->theta_prev;
          }
        } else {
          ClientOptimizer opt(client_spec(client), d);
          opt.begin_round(t, config.rounds);
          local[slot] = local_train(server.x, model, data.clients[client], opt, settings, rng);
        }
      });
    } catch (const DivergenceError& e) {
      result.final_x = server.x;
      throw ExperimentDiverged(e, std::move(result));
    }

    RoundRecord rec;
    rec.round = t;
    rec.participating_clients = chosen.size();

    if (track_lyapunov && t > 0) {
      const std::vector<ParamVector> curr(config.clients, server.x);
      const std::vector<ParamVector> prev(config.clients, prev_x);
      LyapunovInputs in{t, &server.x, curr, prev, etas_now, thetas_now, &*options.lyapunov_x_star};
      rec.lyapunov = lyapunov_value(in, objective, LyapunovRegime{1, 1.0, true});
    }

    // step-size statistics and traces, in canonical client order
    double eta_sum = 0.0;
    std::size_t eta_count = 0;
    rec.eta_max = -std::numeric_limits<double>::infinity();
    rec.eta_min = std::numeric_limits<double>::infinity();
    rec.ltilde_hat = kNaN;
    for (std::size_t slot = 0; slot < chosen.size(); ++slot) {
      for (const LocalStepRecord& s : local[slot].trace) {
        if (s.skipped) {
          ++rec.skipped_steps;
        } else {
          eta_sum += s.eta;
          ++eta_count;
          rec.eta_max = std::max(rec.eta_max, s.eta);
          rec.eta_min = std::min(rec.eta_min, s.eta);
        }
        if (std::isfinite(s.smoothness)) {
          rec.ltilde_hat = std::isnan(rec.ltilde_hat) ? s.smoothness : std::max(rec.ltilde_hat, s.smoothness);
        }
        if (options.collect_step_trace) {
          const DeltaSgdTrace b = s.branches.value_or(DeltaSgdTrace{kNaN, kNaN, s.eta});
          result.step_trace.push_back({t, chosen[slot], s.step, b.branch1, b.branch2, b.eta});
        }
      }
    }
    if (eta_count > 0) {
      rec.eta_mean = eta_sum / static_cast<double>(eta_count);
    } else {
      rec.eta_mean = rec.eta_max = rec.eta_min = kNaN;
    }

    std::vector<ParamVector> params;
    std::vector<double> weights;
    params.reserve(chosen.size());
    for (std::size_t slot = 0; slot < chosen.size(); ++slot) {
      params.push_back(std::move(local[slot].x));
      weights.push_back(config.server_rule == ServerRule::fedavg_weighted
                            ? static_cast<double>(data.clients[chosen[slot]].size())
                            : 1.0);
    }
    prev_x = server.x;
    const bool evaluate = (t + 1) % config.eval_stride == 0 || t + 1 == config.rounds;
    rec.evaluated = evaluate;
    rec.train_loss = rec.test_loss = rec.test_acc = rec.grad_norm_sq = kNaN;
    try {
      ParamVector avg = fedavg_aggregate(params, weights);
      if (config.server_rule == ServerRule::fedadam) {
        server = fedadam_aggregate(server, avg, config.server_adam);
      } else {
        server.x = std::move(avg);
      }
      if (evaluate) {
        const LossGrad global = global_loss_and_grad(model, server.x, data);
        rec.train_loss = global.loss;
        rec.grad_norm_sq = vec_norm_sq(global.grad);
        if (data.test.size() > 0) {
          const Batch test = Batch::full(data.test);
          rec.test_loss = loss(model, server.x, test);
          rec.test_acc = model.is_classifier() ? accuracy(model, server.x, test) : kNaN;
        }
      }
    } catch (const InvalidNumber& e) {
      result.final_x = server.x;
      throw ExperimentDiverged(DivergenceError(t, chosen.front(), 0, e.what()), std::move(result));
    }

    if (config.record_wall_time) {
      rec.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
    }
    if (options.on_round) options.on_round(rec, server.x);
    result.records.push_back(std::move(rec));
  }
  result.final_x = server.x;
  return result;
}

}  // namespace dsgd
