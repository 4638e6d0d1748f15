#pragma once

#include <cstddef>

#include "dsgd/core/rng.hpp"
#include "dsgd/fed/experiment.hpp"

namespace dsgd {

// A federated problem whose clients all share one known minimizer x*.
struct SharedMinimizerProblem {
  Model model;
  FederatedData data;
  ParamVector x_star;
};

// Softmax regression where every client's f_i is minimized at
// W = 0, b_c = log(c + 1). Each client draws `points` feature vectors (scaled
// by 1 + client_spread * i so clients differ in curvature) and, for every
// feature vector, stores c + 1 copies labelled c for each class c; the
// empirical label distribution at every point then equals softmax(b), so
// grad f_i(x*) = 0 for all i.
[[nodiscard]] SharedMinimizerProblem shared_minimizer_softmax(std::size_t clients, std::size_t classes,
                                                              std::size_t feature_dim, std::size_t points,
                                                              double client_spread, SeededRng& rng);

// Consistent linear least squares: targets are exactly <w*, a> for a random
// w*, so every client interpolates at w*.
[[nodiscard]] SharedMinimizerProblem shared_minimizer_linear(std::size_t clients, std::size_t feature_dim,
                                                             std::size_t points, double client_spread,
                                                             SeededRng& rng);

}  // namespace dsgd
