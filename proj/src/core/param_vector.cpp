#include "dsgd/core/param_vector.hpp"

#include <cmath>
#include <string>

#include "dsgd/core/error.hpp"

namespace dsgd {

bool all_finite(std::span<const double> a) noexcept {
  for (double v : a) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

void require_finite(std::span<const double> a, std::string_view what) {
  if (!all_finite(a)) throw InvalidNumber(std::string(what) + ": non-finite value");
}

void require_finite(double v, std::string_view what) {
  if (!std::isfinite(v)) throw InvalidNumber(std::string(what) + ": non-finite value");
}

void require_same_size(std::size_t a, std::size_t b, std::string_view what) {
  if (a != b) {
    throw DimensionError(std::string(what) + ": length " + std::to_string(a) +
                         " != " + std::to_string(b));
  }
}

double vec_dot(const ParamVector& a, const ParamVector& b) {
  require_same_size(a.size(), b.size(), "vec_dot");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  require_finite(s, "vec_dot");
  return s;
}

double vec_norm_sq(const ParamVector& a) {
  double s = 0.0;
  for (double v : a) s += v * v;
  require_finite(s, "vec_norm_sq");
  return s;
}

double vec_norm(const ParamVector& a) {
  require_finite(a.span(), "vec_norm");
  return std::sqrt(vec_norm_sq(a));
}

ParamVector vec_axpy(double alpha, const ParamVector& a, const ParamVector& b) {
  require_same_size(a.size(), b.size(), "vec_axpy");
  ParamVector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = alpha * a[i] + b[i];
  require_finite(out.span(), "vec_axpy");
  return out;
}

ParamVector vec_sub(const ParamVector& a, const ParamVector& b) {
  require_same_size(a.size(), b.size(), "vec_sub");
  ParamVector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  require_finite(out.span(), "vec_sub");
  return out;
}

ParamVector vec_scale(double alpha, const ParamVector& a) {
  ParamVector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = alpha * a[i];
  require_finite(out.span(), "vec_scale");
  return out;
}

double vec_dist(const ParamVector& a, const ParamVector& b) {
  require_same_size(a.size(), b.size(), "vec_dist");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  require_finite(s, "vec_dist");
  return std::sqrt(s);
}

}  // namespace dsgd
