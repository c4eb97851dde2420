#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace drama::numerics {

using Shape = std::vector<std::size_t>;

enum class DType { kF64, kF32 };

/// Dense row-major tensor. Storage is always double; a kF32 tensor holds
/// values that have been rounded through float, which is how single
/// precision is emulated.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> data);

  static Tensor scalar(double v) { return Tensor({1}, std::vector<double>{v}); }
  static Tensor vector(std::initializer_list<double> v);
  static Tensor matrix(std::size_t rows, std::size_t cols, std::initializer_list<double> v);

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return data_.size(); }
  // A rank-1 tensor is treated as a single row.
  std::size_t rows() const;
  std::size_t cols() const;

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  std::vector<double>& storage() { return data_; }
  const std::vector<double>& storage() const { return data_; }

  double& operator[](std::size_t i) { return data_[i]; }
  const double& operator[](std::size_t i) const { return data_[i]; }
  double& at(std::size_t r, std::size_t c) { return data_[r * cols() + c]; }
  double at(std::size_t r, std::size_t c) const { return data_[r * cols() + c]; }
  double item() const;

  bool requires_grad() const { return requires_grad_; }
  Tensor& set_requires_grad(bool on = true) {
    requires_grad_ = on;
    return *this;
  }

  DType dtype() const { return dtype_; }
  /// Switches dtype; converting to kF32 rounds every element through float.
  Tensor& set_dtype(DType d);

  std::string shape_str() const;
  bool all_finite() const;

  friend bool operator==(const Tensor& a, const Tensor& b) {
    return a.shape_ == b.shape_ && a.data_ == b.data_;
  }

 private:
  Shape shape_;
  std::vector<double> data_;
  bool requires_grad_ = false;
  DType dtype_ = DType::kF64;
};

std::size_t element_count(const Shape& shape);
std::string shape_to_string(const Shape& shape);

}  // namespace drama::numerics
