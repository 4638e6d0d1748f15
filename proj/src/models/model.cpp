#include "dsgd/models/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "dsgd/core/error.hpp"

namespace dsgd {

std::string_view to_string(ModelKind kind) noexcept {
  switch (kind) {
    case ModelKind::linear_regression: return "linear-regression";
    case ModelKind::softmax_regression: return "softmax-regression";
    case ModelKind::mlp: return "mlp-1hidden";
  }
  return "unknown";
}

ModelKind parse_model_kind(std::string_view name) {
  if (name == "linear-regression") return ModelKind::linear_regression;
  if (name == "softmax-regression") return ModelKind::softmax_regression;
  if (name == "mlp-1hidden" || name == "mlp") return ModelKind::mlp;
  throw ConfigError("unknown model kind '" + std::string(name) + "'");
}

Model::Model(ModelKind kind, std::size_t f, std::optional<std::size_t> h, std::size_t c)
    : kind_(kind), feature_dim_(f), hidden_dim_(h), num_classes_(c), param_count_(0) {
  if (f == 0) throw ConfigError("model: feature_dim must be >= 1");
  switch (kind) {
    case ModelKind::linear_regression:
      param_count_ = f;
      break;
    case ModelKind::softmax_regression:
      if (c < 2) throw ConfigError("model: softmax regression needs >= 2 classes");
      param_count_ = c * f + c;
      break;
    case ModelKind::mlp:
      if (c < 2) throw ConfigError("model: mlp needs >= 2 classes");
      if (!h || *h == 0) throw ConfigError("model: mlp needs hidden_dim >= 1");
      param_count_ = *h * f + *h + c * *h + c;
      break;
  }
}

Model Model::linear_regression(std::size_t feature_dim) {
  return Model(ModelKind::linear_regression, feature_dim, std::nullopt, 1);
}

Model Model::softmax_regression(std::size_t feature_dim, std::size_t num_classes) {
  return Model(ModelKind::softmax_regression, feature_dim, std::nullopt, num_classes);
}

Model Model::mlp(std::size_t feature_dim, std::size_t hidden_dim, std::size_t num_classes) {
  return Model(ModelKind::mlp, feature_dim, hidden_dim, num_classes);
}

ParamVector Model::initial_params(SeededRng& rng) const {
  ParamVector x(param_count_);
  if (kind_ != ModelKind::mlp) return x;
  const std::size_t h = *hidden_dim_;
  const double a1 = std::sqrt(6.0 / static_cast<double>(feature_dim_ + h));
  const double a2 = std::sqrt(6.0 / static_cast<double>(h + num_classes_));
  const std::size_t w1 = h * feature_dim_;
  const std::size_t w2_begin = w1 + h;
  const std::size_t w2_end = w2_begin + num_classes_ * h;
  for (std::size_t i = 0; i < w1; ++i) x[i] = (2.0 * rng.uniform() - 1.0) * a1;
  for (std::size_t i = w2_begin; i < w2_end; ++i) x[i] = (2.0 * rng.uniform() - 1.0) * a2;
  return x;
}

namespace {

void check_inputs(const Model& model, const ParamVector& x, const Batch& batch) {
  require_same_size(x.size(), model.param_count(), "model parameters");
  const Dataset& d = batch.data();
  require_same_size(d.feature_dim, model.feature_dim(), "batch feature dimension");
  if (model.is_classifier()) {
    for (std::size_t i : batch.indices()) {
      if (d.labels[i] < 0 || static_cast<std::size_t>(d.labels[i]) >= model.num_classes()) {
        throw DimensionError("label " + std::to_string(d.labels[i]) + " outside model classes");
      }
    }
  }
}

// In-place softmax; returns log-sum-exp of the input logits.
double softmax_inplace(std::span<double> z) {
  const double zmax = *std::max_element(z.begin(), z.end());
  double s = 0.0;
  for (double& v : z) {
    v = std::exp(v - zmax);
    s += v;
  }
  for (double& v : z) v /= s;
  return zmax + std::log(s);
}

// Shared forward/backward pass. `g` may be null when only the loss is needed.
double evaluate(const Model& model, const ParamVector& x, const Batch& batch, ParamVector* g) {
  check_inputs(model, x, batch);
  const Dataset& d = batch.data();
  const std::size_t f = model.feature_dim();
  const std::size_t c = model.num_classes();
  const double* p = x.data();
  double total = 0.0;
  if (g) *g = ParamVector(x.size());

  switch (model.kind()) {
    case ModelKind::linear_regression: {
      for (std::size_t i : batch.indices()) {
        const auto a = d.row(i);
        double pred = 0.0;
        for (std::size_t j = 0; j < f; ++j) pred += p[j] * a[j];
        const double r = pred - d.target(i);
        total += 0.5 * r * r;
        if (g) {
          for (std::size_t j = 0; j < f; ++j) (*g)[j] += r * a[j];
        }
      }
      break;
    }
    case ModelKind::softmax_regression: {
      const double* bias = p + c * f;
      std::vector<double> z(c);
      for (std::size_t i : batch.indices()) {
        const auto a = d.row(i);
        const auto y = static_cast<std::size_t>(d.labels[i]);
        for (std::size_t k = 0; k < c; ++k) {
          double s = bias[k];
          const double* w = p + k * f;
          for (std::size_t j = 0; j < f; ++j) s += w[j] * a[j];
          z[k] = s;
        }
        const double zy = z[y];
        total += softmax_inplace(z) - zy;
        if (g) {
          z[y] -= 1.0;
          double* gw = g->data();
          double* gb = gw + c * f;
          for (std::size_t k = 0; k < c; ++k) {
            const double dz = z[k];
            for (std::size_t j = 0; j < f; ++j) gw[k * f + j] += dz * a[j];
            gb[k] += dz;
          }
        }
      }
      break;
    }
    case ModelKind::mlp: {
      const std::size_t h = *model.hidden_dim();
      const double* w1 = p;
      const double* b1 = w1 + h * f;
      const double* w2 = b1 + h;
      const double* b2 = w2 + c * h;
      std::vector<double> hid(h), z(c), dh(h);
      for (std::size_t i : batch.indices()) {
        const auto a = d.row(i);
        const auto y = static_cast<std::size_t>(d.labels[i]);
        for (std::size_t u = 0; u < h; ++u) {
          double s = b1[u];
          for (std::size_t j = 0; j < f; ++j) s += w1[u * f + j] * a[j];
          hid[u] = std::tanh(s);
        }
        for (std::size_t k = 0; k < c; ++k) {
          double s = b2[k];
          for (std::size_t u = 0; u < h; ++u) s += w2[k * h + u] * hid[u];
          z[k] = s;
        }
        const double zy = z[y];
        total += softmax_inplace(z) - zy;
        if (g) {
          z[y] -= 1.0;
          double* gw1 = g->data();
          double* gb1 = gw1 + h * f;
          double* gw2 = gb1 + h;
          double* gb2 = gw2 + c * h;
          std::fill(dh.begin(), dh.end(), 0.0);
          for (std::size_t k = 0; k < c; ++k) {
            const double dz = z[k];
            for (std::size_t u = 0; u < h; ++u) {
              gw2[k * h + u] += dz * hid[u];
              dh[u] += w2[k * h + u] * dz;
            }
            gb2[k] += dz;
          }
          for (std::size_t u = 0; u < h; ++u) {
            const double dpre = dh[u] * (1.0 - hid[u] * hid[u]);
            for (std::size_t j = 0; j < f; ++j) gw1[u * f + j] += dpre * a[j];
            gb1[u] += dpre;
          }
        }
      }
      break;
    }
  }

  const auto n = static_cast<double>(batch.size());
  total /= n;
  require_finite(total, "model loss");
  if (g) {
    for (double& v : *g) v /= n;
    require_finite(g->span(), "model gradient");
  }
  return total;
}

}  // namespace

double loss(const Model& model, const ParamVector& x, const Batch& batch) {
  return evaluate(model, x, batch, nullptr);
}

ParamVector grad(const Model& model, const ParamVector& x, const Batch& batch) {
  ParamVector g;
  evaluate(model, x, batch, &g);
  return g;
}

LossGrad loss_and_grad(const Model& model, const ParamVector& x, const Batch& batch) {
  LossGrad out;
  out.loss = evaluate(model, x, batch, &out.grad);
  return out;
}

int predict(const Model& model, const ParamVector& x, std::span<const double> a) {
  if (!model.is_classifier()) throw UnsupportedModel("predict: linear regression has no classes");
  require_same_size(x.size(), model.param_count(), "model parameters");
  require_same_size(a.size(), model.feature_dim(), "feature row");
  const std::size_t f = model.feature_dim();
  const std::size_t c = model.num_classes();
  const double* p = x.data();
  std::vector<double> z(c);
  if (model.kind() == ModelKind::softmax_regression) {
    for (std::size_t k = 0; k < c; ++k) {
      double s = p[c * f + k];
      for (std::size_t j = 0; j < f; ++j) s += p[k * f + j] * a[j];
      z[k] = s;
    }
  } else {
    const std::size_t h = *model.hidden_dim();
    const double* w1 = p;
    const double* b1 = w1 + h * f;
    const double* w2 = b1 + h;
    const double* b2 = w2 + c * h;
    std::vector<double> hid(h);
    for (std::size_t u = 0; u < h; ++u) {
      double s = b1[u];
      for (std::size_t j = 0; j < f; ++j) s += w1[u * f + j] * a[j];
      hid[u] = std::tanh(s);
    }
    for (std::size_t k = 0; k < c; ++k) {
      double s = b2[k];
      for (std::size_t u = 0; u < h; ++u) s += w2[k * h + u] * hid[u];
      z[k] = s;
    }
  }
  // max_element returns the first maximum, which is the tie-break we want
  return static_cast<int>(std::max_element(z.begin(), z.end()) - z.begin());
}

double accuracy(const Model& model, const ParamVector& x, const Batch& batch) {
  if (!model.is_classifier()) throw UnsupportedModel("accuracy: linear regression is not a classifier");
  check_inputs(model, x, batch);
  const Dataset& d = batch.data();
  std::size_t correct = 0;
  for (std::size_t i : batch.indices()) {
    if (predict(model, x, d.row(i)) == d.labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(batch.size());
}

}  // namespace dsgd
