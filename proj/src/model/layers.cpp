#include "startext/model/layers.hpp"

#include <cmath>

namespace startext {

namespace K = kernels;

namespace {

void he_normal(Tensor& t, int64_t fan_in, CounterRng& rng) {
  const double std = std::sqrt(2.0 / static_cast<double>(fan_in));
  for (auto& v : t.data) v = static_cast<float>(rng.normal() * std);
}

void uniform_init(Tensor& t, double limit, CounterRng& rng) {
  for (auto& v : t.data) v = static_cast<float>(rng.uniform(-limit, limit));
}

}  // namespace

Conv2d::Conv2d(int64_t in_ch, int64_t out_ch, int64_t kernel, int64_t stride, int64_t pad,
               CounterRng& rng)
    : w({out_ch, in_ch, kernel, kernel}),
      b({out_ch}),
      dw({out_ch, in_ch, kernel, kernel}),
      db({out_ch}),
      stride_(stride),
      pad_(pad) {
  he_normal(w, in_ch * kernel * kernel, rng);
}

Tensor Conv2d::forward(const Tensor& x) {
  x_cache_ = x;
  K::ConvShape s{x.dim(0), x.dim(1), x.dim(2), x.dim(3), w.dim(0), w.dim(2), w.dim(3),
                 stride_,  stride_,  pad_,     pad_};
  if (x.dim(1) != w.dim(1))
    throw ValidationError("conv input channels " + std::to_string(x.dim(1)) + " != " +
                          std::to_string(w.dim(1)));
  Tensor y({s.batch, s.out_channels, s.out_h(), s.out_w()});
  K::conv2d_forward(s, x.ptr(), w.ptr(), b.ptr(), y.ptr());
  return y;
}

Tensor Conv2d::backward(const Tensor& dy) {
  const Tensor& x = x_cache_;
  K::ConvShape s{x.dim(0), x.dim(1), x.dim(2), x.dim(3), w.dim(0), w.dim(2), w.dim(3),
                 stride_,  stride_,  pad_,     pad_};
  K::conv2d_backward_weights(s, x.ptr(), dy.ptr(), dw.ptr(), db.ptr());
  Tensor dx(x.shape);
  K::conv2d_backward_input(s, dy.ptr(), w.ptr(), dx.ptr());
  return dx;
}

void Conv2d::collect(const std::string& prefix, std::vector<ParamRef>& out) {
  out.push_back({prefix + ".w", &w, &dw});
  out.push_back({prefix + ".b", &b, &db});
}

BatchNorm2d::BatchNorm2d(int64_t channels)
    : gamma({channels}),
      beta({channels}),
      running_mean({channels}),
      running_var({channels}),
      dgamma({channels}),
      dbeta({channels}),
      save_mean_({channels}),
      save_invstd_({channels}) {
  gamma.fill(1.0f);
  running_var.fill(1.0f);
}

Tensor BatchNorm2d::forward(const Tensor& x, bool training) {
  Tensor y(x.shape);
  if (training) {
    x_cache_ = x;
    K::bn_forward_train(x.dim(0), x.dim(1), x.dim(2), x.dim(3), x.ptr(), gamma.ptr(), beta.ptr(),
                        eps_, momentum_, y.ptr(), save_mean_.ptr(), save_invstd_.ptr(),
                        running_mean.ptr(), running_var.ptr());
  } else {
    K::bn_forward_eval(x.dim(0), x.dim(1), x.dim(2), x.dim(3), x.ptr(), gamma.ptr(), beta.ptr(),
                       eps_, running_mean.ptr(), running_var.ptr(), y.ptr());
  }
  return y;
}

Tensor BatchNorm2d::backward(const Tensor& dy) {
  const Tensor& x = x_cache_;
  Tensor dx(x.shape);
  K::bn_backward(x.dim(0), x.dim(1), x.dim(2), x.dim(3), x.ptr(), dy.ptr(), gamma.ptr(),
                 save_mean_.ptr(), save_invstd_.ptr(), dx.ptr(), dgamma.ptr(), dbeta.ptr());
  return dx;
}

void BatchNorm2d::collect(const std::string& prefix, std::vector<ParamRef>& out) {
  out.push_back({prefix + ".gamma", &gamma, &dgamma});
  out.push_back({prefix + ".beta", &beta, &dbeta});
}

Tensor Relu::forward(const Tensor& x) {
  x_cache_ = x;
  Tensor y(x.shape);
  K::relu_forward(x.ptr(), y.ptr(), x.numel());
  return y;
}

Tensor Relu::backward(const Tensor& dy) {
  Tensor dx(x_cache_.shape);
  K::relu_backward(x_cache_.ptr(), dy.ptr(), dx.ptr(), dx.numel());
  return dx;
}

Tensor MaxPool2d::forward(const Tensor& x) {
  shape_ = K::PoolShape{x.dim(0), x.dim(1), x.dim(2), x.dim(3), kh_, kw_, kh_, kw_};
  Tensor y({shape_.batch, shape_.channels, shape_.out_h(), shape_.out_w()});
  argmax_ = TensorT<int32_t>(y.shape);
  K::maxpool_forward(shape_, x.ptr(), y.ptr(), argmax_.ptr());
  return y;
}

Tensor MaxPool2d::backward(const Tensor& dy) {
  Tensor dx({shape_.batch, shape_.channels, shape_.in_h, shape_.in_w});
  K::maxpool_backward(shape_, dy.ptr(), argmax_.ptr(), dx.ptr());
  return dx;
}

Linear::Linear(int64_t in_dim, int64_t out_dim, CounterRng& rng)
    : w({out_dim, in_dim}), b({out_dim}), dw({out_dim, in_dim}), db({out_dim}) {
  uniform_init(w, std::sqrt(6.0 / static_cast<double>(in_dim + out_dim)), rng);
}

Tensor Linear::forward(const Tensor& x) {
  x_cache_ = x;
  const int64_t rows = x.numel() / w.dim(1);
  Tensor y({rows, w.dim(0)});
  K::gemm_nt(x.ptr(), w.ptr(), y.ptr(), rows, w.dim(1), w.dim(0));
  K::add_rowwise(y.ptr(), b.ptr(), rows, w.dim(0));
  return y;
}

Tensor Linear::backward(const Tensor& dy) {
  const int64_t rows = x_cache_.numel() / w.dim(1);
  // dw += dy^T * x ; db += colsum(dy) ; dx = dy * w
  K::gemm_tn(dy.ptr(), x_cache_.ptr(), dw.ptr(), w.dim(0), rows, w.dim(1), true);
  for (int64_t r = 0; r < rows; ++r)
    for (int64_t j = 0; j < w.dim(0); ++j) db[j] += dy[r * w.dim(0) + j];
  Tensor dx(x_cache_.shape);
  K::gemm(dy.ptr(), w.ptr(), dx.ptr(), rows, w.dim(0), w.dim(1));
  return dx;
}

void Linear::collect(const std::string& prefix, std::vector<ParamRef>& out) {
  out.push_back({prefix + ".w", &w, &dw});
  out.push_back({prefix + ".b", &b, &db});
}

Lstm::Lstm(int64_t in_dim, int64_t hidden, bool reverse, CounterRng& rng)
    : wx({4 * hidden, in_dim}),
      wh({4 * hidden, hidden}),
      b({4 * hidden}),
      dwx({4 * hidden, in_dim}),
      dwh({4 * hidden, hidden}),
      db({4 * hidden}),
      in_dim_(in_dim),
      hidden_(hidden),
      reverse_(reverse) {
  const double limit = 1.0 / std::sqrt(static_cast<double>(hidden));
  uniform_init(wx, limit, rng);
  uniform_init(wh, limit, rng);
  // forget-gate bias starts open
  for (int64_t j = 0; j < hidden; ++j) b[hidden + j] = 1.0f;
}

Tensor Lstm::forward(const Tensor& x) {
  const int64_t steps = x.dim(0), batch = x.dim(1);
  x_cache_ = x;
  Tensor h({steps, batch, hidden_});
  gates_cache_ = Tensor({steps, batch, 4 * hidden_});
  cell_cache_ = Tensor({steps, batch, hidden_});
  K::lstm_forward(steps, batch, in_dim_, hidden_, x.ptr(), wx.ptr(), wh.ptr(), b.ptr(), reverse_,
                  h.ptr(), gates_cache_.ptr(), cell_cache_.ptr());
  h_cache_ = h;
  return h;
}

Tensor Lstm::backward(const Tensor& dh) {
  const int64_t steps = x_cache_.dim(0), batch = x_cache_.dim(1);
  Tensor dx(x_cache_.shape);
  K::lstm_backward(steps, batch, in_dim_, hidden_, x_cache_.ptr(), wx.ptr(), wh.ptr(),
                   h_cache_.ptr(), gates_cache_.ptr(), cell_cache_.ptr(), reverse_, dh.ptr(),
                   dx.ptr(), dwx.ptr(), dwh.ptr(), db.ptr());
  return dx;
}

void Lstm::collect(const std::string& prefix, std::vector<ParamRef>& out) {
  out.push_back({prefix + ".wx", &wx, &dwx});
  out.push_back({prefix + ".wh", &wh, &dwh});
  out.push_back({prefix + ".b", &b, &db});
}

}  // namespace startext
