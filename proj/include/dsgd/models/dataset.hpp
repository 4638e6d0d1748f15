#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace dsgd {

// Row-major sample matrix with class labels. Regression tasks additionally
// carry real-valued targets; when `targets` is empty the label is used as the
// target.
struct Dataset {
  std::size_t feature_dim = 0;
  std::size_t num_classes = 0;
  std::vector<double> features;
  std::vector<int> labels;
  std::vector<double> targets;

  [[nodiscard]] std::size_t size() const noexcept { return labels.size(); }
  [[nodiscard]] std::span<const double> row(std::size_t i) const noexcept {
    return {features.data() + i * feature_dim, feature_dim};
  }
  [[nodiscard]] double target(std::size_t i) const noexcept {
    return targets.empty() ? static_cast<double>(labels[i]) : targets[i];
  }

  // Throws DimensionError on inconsistent sizes or out-of-range labels.
  void validate() const;

  void push_back(std::span<const double> row, int label);

  [[nodiscard]] Dataset subset(std::span<const std::size_t> indices) const;

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

// Non-owning view of a set of samples of a dataset. The dataset must outlive
// the batch.
class Batch {
 public:
  Batch(const Dataset& data, std::vector<std::size_t> indices);

  static Batch full(const Dataset& data);

  [[nodiscard]] const Dataset& data() const noexcept { return *data_; }
  [[nodiscard]] std::span<const std::size_t> indices() const noexcept { return indices_; }
  [[nodiscard]] std::size_t size() const noexcept { return indices_.size(); }

 private:
  const Dataset* data_;
  std::vector<std::size_t> indices_;
};

}  // namespace dsgd
