#include "dsgd/fed/local_train.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "dsgd/analysis/smoothness.hpp"
#include "dsgd/models/proximal.hpp"

namespace dsgd {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

DivergenceError::DivergenceError(std::size_t round, std::size_t client, std::size_t step,
                                 const std::string& detail)
    : Error("diverged at round " + std::to_string(round) + ", client " + std::to_string(client) +
            ", local step " + std::to_string(step) + ": " + detail),
      round_(round),
      client_(client),
      step_(step) {}

std::size_t local_step_count(std::size_t n, std::size_t epochs, std::size_t batch_size) {
  if (batch_size == 0) throw ConfigError("batch_size must be >= 1");
  return epochs * ((n + batch_size - 1) / batch_size);
}

LocalTrainResult local_train(const ParamVector& x_t, const Model& model, const Dataset& client_data,
                             ClientOptimizer& opt, const LocalTrainSettings& settings,
                             SeededRng& rng) {
  const std::size_t n = client_data.size();
  if (n == 0) throw ConfigError("local_train: client holds no data");
  if (settings.epochs == 0) throw ConfigError("local_train: epochs must be >= 1");
  if (settings.batch_size == 0) throw ConfigError("local_train: batch_size must be >= 1");

  if (settings.prox_mu < 0.0) throw ConfigError("local_train: prox_mu must be >= 0");
  std::optional<ProximalWrapper> prox;
  if (settings.prox_mu != 0.0) prox.emplace(model, settings.prox_mu, x_t);

  LocalTrainResult out;
  out.x = x_t;
  out.trace.reserve(local_step_count(n, settings.epochs, settings.batch_size));

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  const bool full_batch = settings.batch_size >= n;
  std::size_t step = 0;
  ParamVector prev_x;
  ParamVector prev_g;

  try {
    for (std::size_t epoch = 0; epoch < settings.epochs; ++epoch) {
      if (!full_batch) {
        for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
      }
      for (std::size_t begin = 0; begin < n; begin += settings.batch_size) {
        const std::size_t end = std::min(n, begin + settings.batch_size);
        const Batch batch(client_data, std::vector<std::size_t>(order.begin() + static_cast<std::ptrdiff_t>(begin),
                                                                order.begin() + static_cast<std::ptrdiff_t>(end)));
        LossGrad lg = prox ? prox_loss_and_grad(*prox, out.x, batch) : loss_and_grad(model, out.x, batch);
        StepOutcome s = opt.step(out.x, lg.grad, lg.loss);
        LocalStepRecord rec{step, lg.loss, s.eta, s.skipped, s.branches, kNaN};
        if (step > 0) {
          if (auto r = smoothness_ratio(prev_x, out.x, prev_g, lg.grad)) rec.smoothness = *r;
        }
        out.trace.push_back(rec);
        prev_x = std::move(out.x);
        prev_g = std::move(lg.grad);
        out.x = std::move(s.x_next);
        ++step;
      }
    }
  } catch (const InvalidNumber& e) {
    throw DivergenceError(settings.round, settings.client, step, e.what());
  }
  return out;
}

}  // namespace dsgd
