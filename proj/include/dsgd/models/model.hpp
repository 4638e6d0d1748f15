#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "dsgd/core/param_vector.hpp"
#include "dsgd/core/rng.hpp"
#include "dsgd/models/dataset.hpp"

namespace dsgd {

enum class ModelKind { linear_regression, softmax_regression, mlp };

[[nodiscard]] std::string_view to_string(ModelKind kind) noexcept;
// Throws ConfigError on an unknown name.
[[nodiscard]] ModelKind parse_model_kind(std::string_view name);

// Immutable description of a differentiable objective.
//
// Parameter layout (flattened, layer by layer, row-major, weights before
// biases):
//   linear-regression   w[F]                      (no intercept; append a
//                                                  constant feature for one)
//   softmax-regression  W[C x F], b[C]
//   mlp-1hidden         W1[H x F], b1[H], W2[C x H], b2[C], tanh hidden layer
class Model {
 public:
  static Model linear_regression(std::size_t feature_dim);
  static Model softmax_regression(std::size_t feature_dim, std::size_t num_classes);
  static Model mlp(std::size_t feature_dim, std::size_t hidden_dim, std::size_t num_classes);

  [[nodiscard]] ModelKind kind() const noexcept { return kind_; }
  [[nodiscard]] std::size_t feature_dim() const noexcept { return feature_dim_; }
  [[nodiscard]] std::optional<std::size_t> hidden_dim() const noexcept { return hidden_dim_; }
  // 1 for linear regression.
  [[nodiscard]] std::size_t num_classes() const noexcept { return num_classes_; }
  [[nodiscard]] std::size_t param_count() const noexcept { return param_count_; }
  [[nodiscard]] bool is_classifier() const noexcept { return kind_ != ModelKind::linear_regression; }

  // Zeros for the convex models; small uniform weights for the MLP so the
  // hidden units are not symmetric.
  [[nodiscard]] ParamVector initial_params(SeededRng& rng) const;

  friend bool operator==(const Model&, const Model&) = default;

 private:
  Model(ModelKind kind, std::size_t f, std::optional<std::size_t> h, std::size_t c);

  ModelKind kind_;
  std::size_t feature_dim_;
  std::optional<std::size_t> hidden_dim_;
  std::size_t num_classes_;
  std::size_t param_count_;
};

struct LossGrad {
  double loss = 0.0;
  ParamVector grad;
};

// Mean per-sample loss: half squared error for linear regression,
// cross-entropy otherwise.
[[nodiscard]] double loss(const Model& model, const ParamVector& x, const Batch& batch);
[[nodiscard]] ParamVector grad(const Model& model, const ParamVector& x, const Batch& batch);
[[nodiscard]] LossGrad loss_and_grad(const Model& model, const ParamVector& x, const Batch& batch);

// Predicted class (argmax, ties to the lowest index) for one feature row.
[[nodiscard]] int predict(const Model& model, const ParamVector& x, std::span<const double> row);

// Fraction of argmax-correct predictions; throws UnsupportedModel for
// linear regression.
[[nodiscard]] double accuracy(const Model& model, const ParamVector& x, const Batch& batch);

}  // namespace dsgd
