#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string_view>
#include <vector>

namespace dsgd {

// Flat real-valued parameter / gradient vector. Every binary operation
// requires equal lengths; results are checked for NaN / infinity.
class ParamVector {
 public:
  ParamVector() = default;
  explicit ParamVector(std::size_t n, double fill = 0.0) : values_(n, fill) {}
  ParamVector(std::initializer_list<double> init) : values_(init) {}
  explicit ParamVector(std::vector<double> values) : values_(std::move(values)) {}

  [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }
  [[nodiscard]] bool empty() const noexcept { return values_.empty(); }

  double& operator[](std::size_t i) noexcept { return values_[i]; }
  double operator[](std::size_t i) const noexcept { return values_[i]; }

  [[nodiscard]] std::span<double> span() noexcept { return values_; }
  [[nodiscard]] std::span<const double> span() const noexcept { return values_; }
  [[nodiscard]] const std::vector<double>& values() const noexcept { return values_; }
  [[nodiscard]] double* data() noexcept { return values_.data(); }
  [[nodiscard]] const double* data() const noexcept { return values_.data(); }

  auto begin() noexcept { return values_.begin(); }
  auto end() noexcept { return values_.end(); }
  auto begin() const noexcept { return values_.begin(); }
  auto end() const noexcept { return values_.end(); }

  // Exact (bitwise on the double representation) equality.
  friend bool operator==(const ParamVector&, const ParamVector&) = default;

 private:
  std::vector<double> values_;
};

[[nodiscard]] bool all_finite(std::span<const double> a) noexcept;

// Throws InvalidNumber naming `what` if `a` holds a NaN or infinity.
void require_finite(std::span<const double> a, std::string_view what);
void require_finite(double v, std::string_view what);

// Throws DimensionError if the lengths differ.
void require_same_size(std::size_t a, std::size_t b, std::string_view what);

[[nodiscard]] double vec_dot(const ParamVector& a, const ParamVector& b);
[[nodiscard]] double vec_norm_sq(const ParamVector& a);
[[nodiscard]] double vec_norm(const ParamVector& a);

// alpha * a + b
[[nodiscard]] ParamVector vec_axpy(double alpha, const ParamVector& a, const ParamVector& b);
[[nodiscard]] ParamVector vec_sub(const ParamVector& a, const ParamVector& b);
[[nodiscard]] ParamVector vec_scale(double alpha, const ParamVector& a);
[[nodiscard]] double vec_dist(const ParamVector& a, const ParamVector& b);

}  // namespace dsgd
