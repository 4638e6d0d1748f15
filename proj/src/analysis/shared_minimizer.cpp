#include "dsgd/analysis/shared_minimizer.hpp"

#include <cmath>
#include <random>
#include <vector>

#include "dsgd/core/error.hpp"

namespace dsgd {

SharedMinimizerProblem shared_minimizer_softmax(std::size_t clients, std::size_t classes,
                                                std::size_t feature_dim, std::size_t points,
                                                double client_spread, SeededRng& rng) {
  if (clients == 0 || classes < 2 || feature_dim == 0 || points == 0) {
    throw ConfigError("shared minimizer: clients, points, feature_dim >= 1 and classes >= 2 required");
  }
  SharedMinimizerProblem p{Model::softmax_regression(feature_dim, classes), {}, {}};
  p.x_star = ParamVector(p.model.param_count());
  for (std::size_t c = 0; c < classes; ++c) {
    p.x_star[classes * feature_dim + c] = std::log(static_cast<double>(c + 1));
  }
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> a(feature_dim);
  for (std::size_t i = 0; i < clients; ++i) {
    Dataset d;
    d.feature_dim = feature_dim;
    d.num_classes = classes;
    const double scale = 1.0 + client_spread * static_cast<double>(i);
    for (std::size_t k = 0; k < points; ++k) {
      for (double& v : a) v = scale * normal(rng);
      for (std::size_t c = 0; c < classes; ++c) {
        for (std::size_t copy = 0; copy <= c; ++copy) d.push_back(a, static_cast<int>(c));
      }
    }
    p.data.clients.push_back(std::move(d));
  }
  p.data.test = p.data.clients.front();
  return p;
}

SharedMinimizerProblem shared_minimizer_linear(std::size_t clients, std::size_t feature_dim,
                                               std::size_t points, double client_spread,
                                               SeededRng& rng) {
  if (clients == 0 || feature_dim == 0 || points == 0) {
    throw ConfigError("shared minimizer: clients, points and feature_dim must be >= 1");
  }
  SharedMinimizerProblem p{Model::linear_regression(feature_dim), {}, {}};
  std::normal_distribution<double> normal(0.0, 1.0);
  p.x_star = ParamVector(feature_dim);
  for (double& v : p.x_star) v = normal(rng);
  std::vector<double> a(feature_dim);
  for (std::size_t i = 0; i < clients; ++i) {
    Dataset d;
    d.feature_dim = feature_dim;
    d.num_classes = 1;
    const double scale = 1.0 + client_spread * static_cast<double>(i);
    for (std::size_t k = 0; k < points; ++k) {
      double y = 0.0;
      for (std::size_t j = 0; j < feature_dim; ++j) {
        a[j] = scale * normal(rng);
        y += a[j] * p.x_star[j];
      }
      d.push_back(a, 0);
      d.targets.push_back(y);
    }
    p.data.clients.push_back(std::move(d));
  }
  p.data.test = p.data.clients.front();
  return p;
}

}  // namespace dsgd
