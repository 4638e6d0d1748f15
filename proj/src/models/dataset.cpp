#include "dsgd/models/dataset.hpp"

#include <numeric>
#include <string>

#include "dsgd/core/error.hpp"

namespace dsgd {

void Dataset::validate() const {
  if (feature_dim == 0) throw DimensionError("dataset: feature_dim must be >= 1");
  if (features.size() != labels.size() * feature_dim) {
    throw DimensionError("dataset: feature matrix has " + std::to_string(features.size()) +
                         " entries, expected " + std::to_string(labels.size() * feature_dim));
  }
  if (!targets.empty() && targets.size() != labels.size()) {
    throw DimensionError("dataset: targets and labels differ in length");
  }
  for (int y : labels) {
    if (y < 0 || static_cast<std::size_t>(y) >= num_classes) {
      throw DimensionError("dataset: label " + std::to_string(y) + " outside [0, " +
                           std::to_string(num_classes) + ")");
    }
  }
}

void Dataset::push_back(std::span<const double> r, int label) {
  if (r.size() != feature_dim) throw DimensionError("dataset: row has wrong feature count");
  features.insert(features.end(), r.begin(), r.end());
  labels.push_back(label);
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  Dataset out;
  out.feature_dim = feature_dim;
  out.num_classes = num_classes;
  out.features.reserve(indices.size() * feature_dim);
  out.labels.reserve(indices.size());
  for (std::size_t i : indices) {
    if (i >= size()) throw DimensionError("dataset subset: index out of range");
    out.push_back(row(i), labels[i]);
    if (!targets.empty()) out.targets.push_back(targets[i]);
  }
  return out;
}

Batch::Batch(const Dataset& data, std::vector<std::size_t> indices)
    : data_(&data), indices_(std::move(indices)) {
  if (indices_.empty()) throw DimensionError("batch: must hold at least one sample");
  for (std::size_t i : indices_) {
    if (i >= data.size()) throw DimensionError("batch: sample index out of range");
  }
}

Batch Batch::full(const Dataset& data) {
  std::vector<std::size_t> idx(data.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  return Batch(data, std::move(idx));
}

}  // namespace dsgd
