#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace aeattack {

/// Shape-tagged row-major array of doubles. Signals (x, p, n, y), activations,
/// weights and gradients all travel as Tensors.
class Tensor {
 public:
  Tensor() = default;
  /// Zero-filled tensor of the given shape.
  explicit Tensor(std::vector<std::size_t> shape);
  /// Throws ConfigError when the shape product does not match data.size().
  Tensor(std::vector<std::size_t> shape, std::vector<double> data);

  /// Rank-1 tensor holding `values`.
  static Tensor vector(std::vector<double> values);
  static Tensor vector(std::initializer_list<double> values);
  static Tensor zeros(std::size_t length) { return Tensor({length}); }

  const std::vector<std::size_t>& shape() const noexcept { return shape_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }
  const std::vector<double>& storage() const noexcept { return data_; }

  double* data() noexcept { return data_.data(); }
  const double* data() const noexcept { return data_.data(); }

  double& operator[](std::size_t i) noexcept { return data_[i]; }
  double operator[](std::size_t i) const noexcept { return data_[i]; }

  /// Same data viewed under a different shape with equal element count.
  Tensor reshaped(std::vector<std::size_t> shape) const;

  bool all_finite() const noexcept;

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  std::vector<std::size_t> shape_;
  std::vector<double> data_;
};

std::size_t shape_product(std::span<const std::size_t> shape) noexcept;

double squared_norm(std::span<const double> v) noexcept;
double l2_norm(std::span<const double> v) noexcept;
double dot(std::span<const double> a, std::span<const double> b);

/// Elementwise a + b; ConfigError on length mismatch.
Tensor add(const Tensor& a, const Tensor& b);
Tensor scaled(const Tensor& a, double factor);

}  // namespace aeattack
