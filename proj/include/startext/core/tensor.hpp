#pragma once

#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "startext/core/error.hpp"

namespace startext {

// Dense row-major tensor, rank <= 4. Deliberately plain: kernels operate on
// raw spans, layers own their parameter tensors by value.
template <typename T>
struct TensorT {
  std::vector<int64_t> shape;
  std::vector<T> data;

  TensorT() = default;
  explicit TensorT(std::vector<int64_t> s) : shape(std::move(s)) {
    data.assign(static_cast<size_t>(numel_of(shape)), T(0));
  }
  TensorT(std::vector<int64_t> s, std::vector<T> d) : shape(std::move(s)), data(std::move(d)) {
    if (static_cast<int64_t>(data.size()) != numel_of(shape))
      throw ValidationError("tensor data size does not match shape");
  }

  static int64_t numel_of(const std::vector<int64_t>& s) {
    int64_t n = 1;
    for (int64_t d : s) n *= d;
    return n;
  }

  int64_t numel() const { return static_cast<int64_t>(data.size()); }
  int64_t dim(size_t i) const { return shape.at(i); }
  size_t rank() const { return shape.size(); }

  T* ptr() { return data.data(); }
  const T* ptr() const { return data.data(); }

  T& operator[](int64_t i) { return data[static_cast<size_t>(i)]; }
  const T& operator[](int64_t i) const { return data[static_cast<size_t>(i)]; }

  // Indexed access for the common ranks; unchecked beyond shape arithmetic.
  T& at(int64_t a, int64_t b) { return data[a * shape[1] + b]; }
  const T& at(int64_t a, int64_t b) const { return data[a * shape[1] + b]; }
  T& at(int64_t a, int64_t b, int64_t c) { return data[(a * shape[1] + b) * shape[2] + c]; }
  const T& at(int64_t a, int64_t b, int64_t c) const {
    return data[(a * shape[1] + b) * shape[2] + c];
  }
  T& at(int64_t a, int64_t b, int64_t c, int64_t d) {
    return data[((a * shape[1] + b) * shape[2] + c) * shape[3] + d];
  }
  const T& at(int64_t a, int64_t b, int64_t c, int64_t d) const {
    return data[((a * shape[1] + b) * shape[2] + c) * shape[3] + d];
  }

  void fill(T v) { std::fill(data.begin(), data.end(), v); }
  void zero() { fill(T(0)); }

  bool same_shape(const TensorT& o) const { return shape == o.shape; }

  std::string shape_str() const {
    std::string s = "(";
    for (size_t i = 0; i < shape.size(); ++i) s += (i ? "," : "") + std::to_string(shape[i]);
    return s + ")";
  }
};

using Tensor = TensorT<float>;
using DTensor = TensorT<double>;

}  // namespace startext
