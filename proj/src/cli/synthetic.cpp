#include "dsgd/cli/synthetic.hpp"

#include <cmath>
#include <random>

#include "dsgd/core/error.hpp"
#include "dsgd/core/rng.hpp"

namespace dsgd::cli {

void SyntheticSpec::validate() const {
  if (classes < 2) throw ConfigError("synthetic: classes must be >= 2");
  if (dim < 1) throw ConfigError("synthetic: dim must be >= 1");
  if (per_class < 1) throw ConfigError("synthetic: per_class must be >= 1");
  if (!(spread >= 0.0)) throw ConfigError("synthetic: spread must be >= 0");
  if (!(separation >= 0.0)) throw ConfigError("synthetic: separation must be >= 0");
  if (!(feature_scale > 0.0)) throw ConfigError("synthetic: feature_scale must be > 0");
  if (!centroids.empty()) {
    if (centroids.size() != classes) throw ConfigError("synthetic: need one centroid per class");
    for (const auto& c : centroids) {
      if (c.size() != dim) throw ConfigError("synthetic: centroid length must equal dim");
    }
  }
}

SplitDataset generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  SeededRng rng(spec.seed, stream_id({0x5E7, 1}));
  std::normal_distribution<double> normal(0.0, 1.0);

  std::vector<std::vector<double>> centroids = spec.centroids;
  if (centroids.empty()) {
    const double s = spec.separation / std::sqrt(static_cast<double>(spec.dim));
    centroids.assign(spec.classes, std::vector<double>(spec.dim));
    for (auto& c : centroids) {
      for (double& v : c) v = s * normal(rng);
    }
  }

  SplitDataset out;
  for (Dataset* d : {&out.train, &out.test}) {
    d->feature_dim = spec.dim;
    d->num_classes = spec.classes;
  }
  std::size_t n_train = (spec.per_class * 4) / 5;
  if (spec.per_class >= 2 && n_train == spec.per_class) n_train = spec.per_class - 1;
  if (n_train == 0) n_train = spec.per_class;

  std::vector<double> row(spec.dim);
  for (std::size_t c = 0; c < spec.classes; ++c) {
    for (std::size_t k = 0; k < spec.per_class; ++k) {
      for (std::size_t j = 0; j < spec.dim; ++j) {
        const double noise = spec.spread > 0.0 ? spec.spread * normal(rng) : 0.0;
        row[j] = spec.feature_scale * (centroids[c][j] + noise);
      }
      (k < n_train ? out.train : out.test).push_back(row, static_cast<int>(c));
    }
  }

  for (Dataset* d : {&out.train, &out.test}) {
    std::vector<std::size_t> order(d->size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
    *d = d->subset(order);
  }
  return out;
}

}  // namespace dsgd::cli
