#include "dsgd/analysis/assumptions.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "dsgd/analysis/smoothness.hpp"
#include "dsgd/core/error.hpp"

namespace dsgd {

namespace {

std::optional<double> opt_max(std::optional<double> a, std::optional<double> b) {
  if (!a) return b;
  if (!b) return a;
  return std::max(*a, *b);
}

}  // namespace

AssumptionEstimates estimate_assumption_constants(const Model& model, std::span<const Dataset> clients,
                                                  std::span<const ParamVector> probes,
                                                  const ProbeSettings& settings, const SeededRng& rng) {
  if (probes.empty()) throw ConfigError("assumption estimates: need at least one probe point");
  if (clients.empty()) throw ConfigError("assumption estimates: need at least one client");
  if (settings.batch_size == 0) throw ConfigError("assumption estimates: batch_size must be >= 1");

  const std::size_t m = clients.size();
  AssumptionEstimates est;
  est.probes = probes.size();

  // full gradients per (probe, client)
  std::vector<std::vector<ParamVector>> full(probes.size(), std::vector<ParamVector>(m));
  for (std::size_t j = 0; j < probes.size(); ++j) {
    ParamVector mean(probes[j].size());
    for (std::size_t i = 0; i < m; ++i) {
      full[j][i] = grad(model, probes[j], Batch::full(clients[i]));
      est.g_hat = std::max(est.g_hat, vec_norm(full[j][i]));
      for (std::size_t k = 0; k < mean.size(); ++k) mean[k] += full[j][i][k] / static_cast<double>(m);

      const std::size_t n = clients[i].size();
      if (settings.batch_size < n && settings.batch_draws > 0) {
        SeededRng draw_rng = rng.derive(stream_id({j, i}));
        double acc = 0.0;
        std::vector<std::size_t> pool(n);
        for (std::size_t r = 0; r < settings.batch_draws; ++r) {
          std::iota(pool.begin(), pool.end(), std::size_t{0});
          for (std::size_t s = 0; s < settings.batch_size; ++s) {
            std::swap(pool[s], pool[s + draw_rng.below(n - s)]);
          }
          const Batch b(clients[i], std::vector<std::size_t>(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(settings.batch_size)));
          const double dev = vec_dist(grad(model, probes[j], b), full[j][i]);
          acc += dev * dev;
        }
        est.sigma2_hat = std::max(est.sigma2_hat, acc / static_cast<double>(settings.batch_draws));
      }
    }
    const double mean_norm_sq = vec_norm_sq(mean);
    if (std::sqrt(mean_norm_sq) < settings.rho_min_grad_norm) {
      ++est.rho_probes_skipped;
    } else {
      for (std::size_t i = 0; i < m; ++i) {
        const double dev = vec_dist(full[j][i], mean);
        est.rho_hat = opt_max(est.rho_hat, dev * dev / mean_norm_sq);
      }
    }
  }

  for (std::size_t j = 1; j < probes.size(); ++j) {
    for (std::size_t i = 0; i < m; ++i) {
      est.ltilde_hat = opt_max(est.ltilde_hat, smoothness_ratio(probes[j - 1], probes[j], full[j - 1][i], full[j][i]));
    }
  }
  return est;
}

AssumptionEstimates merge_estimates(const AssumptionEstimates& a, const AssumptionEstimates& b) {
  AssumptionEstimates out;
  out.sigma2_hat = std::max(a.sigma2_hat, b.sigma2_hat);
  out.g_hat = std::max(a.g_hat, b.g_hat);
  out.rho_hat = opt_max(a.rho_hat, b.rho_hat);
  out.ltilde_hat = opt_max(a.ltilde_hat, b.ltilde_hat);
  out.probes = a.probes + b.probes;
  out.rho_probes_skipped = a.rho_probes_skipped + b.rho_probes_skipped;
  return out;
}

RateConstants rate_constants(const AssumptionEstimates& est, std::size_t batch_size,
                             std::optional<double> initial_gap) {
  if (batch_size == 0) throw ConfigError("rate constants: batch_size must be >= 1");
  RateConstants rc;
  const double noise = est.sigma2_hat / static_cast<double>(batch_size);
  rc.psi2 = noise + est.g_hat * est.g_hat;
  if (initial_gap) rc.psi1 = std::max(noise, *initial_gap);
  return rc;
}

}  // namespace dsgd
