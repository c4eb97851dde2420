#include "drama/numerics/tensor.h"

#include <cmath>
#include <functional>
#include <numeric>

#include "drama/util/error.h"

namespace drama::numerics {

std::size_t element_count(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string shape_to_string(const Shape& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ", ";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

Tensor::Tensor(Shape shape, double fill)
    : shape_(std::move(shape)), data_(element_count(shape_), fill) {}

Tensor::Tensor(Shape shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (data_.size() != element_count(shape_)) {
    throw ShapeError("tensor: " + std::to_string(data_.size()) + " elements do not fill shape " +
                     shape_to_string(shape_));
  }
}

Tensor Tensor::vector(std::initializer_list<double> v) {
  return Tensor({v.size()}, std::vector<double>(v));
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols, std::initializer_list<double> v) {
  return Tensor({rows, cols}, std::vector<double>(v));
}

std::size_t Tensor::rows() const {
  if (shape_.empty()) return 1;
  if (shape_.size() == 1) return 1;
  return element_count(shape_) / shape_.back();
}

std::size_t Tensor::cols() const { return shape_.empty() ? 1 : shape_.back(); }

double Tensor::item() const {
  if (data_.size() != 1) throw ShapeError("item() on tensor of shape " + shape_str());
  return data_[0];
}

Tensor& Tensor::set_dtype(DType d) {
  dtype_ = d;
  if (d == DType::kF32) {
    for (double& x : data_) x = static_cast<double>(static_cast<float>(x));
  }
  return *this;
}

std::string Tensor::shape_str() const { return shape_to_string(shape_); }

bool Tensor::all_finite() const {
  for (double x : data_) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

}  // namespace drama::numerics
