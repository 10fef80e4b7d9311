#pragma once

#include <cmath>
#include <cstddef>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "tgn/errors.hpp"

namespace tgn {

enum class Dtype { f32, f64 };

inline const char* dtype_name(Dtype d) { return d == Dtype::f32 ? "f32" : "f64"; }

/// Dense row-major tensor. Kept deliberately dumb: shape plus flat storage.
/// All numerical work happens in the kernel layer on raw pointers.
template <class S>
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<S> data;

  Tensor() = default;

  explicit Tensor(std::vector<std::size_t> shape_in, S fill = S(0))
      : shape(std::move(shape_in)),
        data(count(shape), fill) {}

  static Tensor from(std::vector<std::size_t> shape_in, std::vector<S> values) {
    Tensor t;
    t.shape = std::move(shape_in);
    if (count(t.shape) != values.size()) {
      throw DimensionError("tensor literal: " + std::to_string(values.size()) +
                           " values for shape " + shape_string(t.shape));
    }
    t.data = std::move(values);
    return t;
  }

  static std::size_t count(const std::vector<std::size_t>& shape) {
    std::size_t n = 1;
    for (std::size_t e : shape) n *= e;
    return n;
  }

  std::size_t numel() const { return data.size(); }
  std::size_t rank() const { return shape.size(); }
  bool empty() const { return data.empty() && shape.empty(); }

  std::size_t extent(std::size_t axis) const {
    require(axis < shape.size(), "axis " + std::to_string(axis) +
                                     " out of range for rank " +
                                     std::to_string(shape.size()));
    return shape[axis];
  }

  S& operator[](std::size_t i) { return data[i]; }
  const S& operator[](std::size_t i) const { return data[i]; }
  S* ptr() { return data.data(); }
  const S* ptr() const { return data.data(); }

  bool same_shape(const Tensor& other) const { return shape == other.shape; }

  bool all_finite() const {
    for (S v : data) {
      if (!std::isfinite(static_cast<double>(v))) return false;
    }
    return true;
  }

  static std::string shape_string(const std::vector<std::size_t>& shape) {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < shape.size(); ++i) {
      if (i) os << ',';
      os << shape[i];
    }
    os << ']';
    return os.str();
  }

  std::string shape_string() const { return shape_string(shape); }
};

template <class S>
constexpr Dtype dtype_of();
template <>
constexpr Dtype dtype_of<float>() { return Dtype::f32; }
template <>
constexpr Dtype dtype_of<double>() { return Dtype::f64; }

/// Elementwise max absolute difference; shapes must match.
template <class S>
double max_abs_diff(const Tensor<S>& a, const Tensor<S>& b) {
  require(a.same_shape(b), "max_abs_diff: shape mismatch " + a.shape_string() +
                               " vs " + b.shape_string());
  double worst = 0.0;
  for (std::size_t i = 0; i < a.numel(); ++i) {
    double d = std::abs(static_cast<double>(a[i]) - static_cast<double>(b[i]));
    if (d > worst) worst = d;
  }
  return worst;
}

template <class S, class T>
Tensor<T> tensor_cast(const Tensor<S>& a) {
  Tensor<T> out;
  out.shape = a.shape;
  out.data.resize(a.numel());
  for (std::size_t i = 0; i < a.numel(); ++i) out.data[i] = static_cast<T>(a[i]);
  return out;
}

}  // namespace tgn
