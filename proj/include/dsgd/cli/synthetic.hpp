#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "dsgd/models/dataset.hpp"

namespace dsgd::cli {

// Gaussian class clusters. Centroids are either given explicitly (classes x
// dim) or drawn as separation * N(0, I / dim), so their norms are close to
// `separation`. Every sample is centroid + spread * N(0, I), then the whole
// feature matrix is multiplied by feature_scale (which scales the
// objective's curvature by feature_scale^2).
struct SyntheticSpec {
  std::size_t classes = 10;
  std::size_t dim = 20;
  std::size_t per_class = 100;
  double spread = 1.0;
  double separation = 3.0;
  double feature_scale = 1.0;
  std::uint64_t seed = 0;
  std::vector<std::vector<double>> centroids;

  // Throws ConfigError on C < 2, d < 1, n < 1, negative spread or scale, or
  // centroids of the wrong shape.
  void validate() const;
  friend bool operator==(const SyntheticSpec&, const SyntheticSpec&) = default;
};

struct SplitDataset {
  Dataset train;
  Dataset test;
};

// Deterministic in the spec. Each class is split 80/20 into train/test
// (floor for train, at least one test sample when per_class >= 2), then each
// split is shuffled.
[[nodiscard]] SplitDataset generate_synthetic(const SyntheticSpec& spec);

}  // namespace dsgd::cli
