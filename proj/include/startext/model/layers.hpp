#pragma once

#include <string>
#include <vector>

#include "startext/core/rng.hpp"
#include "startext/core/tensor.hpp"
#include "startext/kernels/kernels.hpp"

namespace startext {

// Named view of a parameter and its gradient, used by the optimizer and the
// checkpoint writer. Order is the model's deterministic construction order.
struct ParamRef {
  std::string name;
  Tensor* value;
  Tensor* grad;
};

class Conv2d {
 public:
  Conv2d() = default;
  Conv2d(int64_t in_ch, int64_t out_ch, int64_t kernel, int64_t stride, int64_t pad,
         CounterRng& rng);

  Tensor forward(const Tensor& x);  // x: [N,C,H,W]
  Tensor backward(const Tensor& dy);
  void collect(const std::string& prefix, std::vector<ParamRef>& out);

  Tensor w, b, dw, db;

 private:
  int64_t stride_ = 1, pad_ = 0;
  Tensor x_cache_;
};

class BatchNorm2d {
 public:
  BatchNorm2d() = default;
  explicit BatchNorm2d(int64_t channels);

  Tensor forward(const Tensor& x, bool training);
  Tensor backward(const Tensor& dy);
  void collect(const std::string& prefix, std::vector<ParamRef>& out);

  Tensor gamma, beta, running_mean, running_var, dgamma, dbeta;

 private:
  Tensor x_cache_, save_mean_, save_invstd_;
  float eps_ = 1e-5f;
  float momentum_ = 0.1f;
};

class Relu {
 public:
  Tensor forward(const Tensor& x);
  Tensor backward(const Tensor& dy);

 private:
  Tensor x_cache_;
};

class MaxPool2d {
 public:
  MaxPool2d() = default;
  MaxPool2d(int64_t kernel_h, int64_t kernel_w) : kh_(kernel_h), kw_(kernel_w) {}

  Tensor forward(const Tensor& x);
  Tensor backward(const Tensor& dy);

 private:
  int64_t kh_ = 2, kw_ = 2;
  kernels::PoolShape shape_{};
  TensorT<int32_t> argmax_;
};

// Fully connected on [rows, in] -> [rows, out]; weight is [out, in].
class Linear {
 public:
  Linear() = default;
  Linear(int64_t in_dim, int64_t out_dim, CounterRng& rng);

  Tensor forward(const Tensor& x);
  Tensor backward(const Tensor& dy);
  void collect(const std::string& prefix, std::vector<ParamRef>& out);

  Tensor w, b, dw, db;

 private:
  Tensor x_cache_;
};

// Single-direction LSTM over [T,N,I] -> [T,N,H].
class Lstm {
 public:
  Lstm() = default;
  Lstm(int64_t in_dim, int64_t hidden, bool reverse, CounterRng& rng);

  Tensor forward(const Tensor& x);
  Tensor backward(const Tensor& dh);
  void collect(const std::string& prefix, std::vector<ParamRef>& out);

  int64_t hidden() const { return hidden_; }
  Tensor wx, wh, b, dwx, dwh, db;

 private:
  int64_t in_dim_ = 0, hidden_ = 0;
  bool reverse_ = false;
  Tensor x_cache_, h_cache_, gates_cache_, cell_cache_;
};

}  // namespace startext
