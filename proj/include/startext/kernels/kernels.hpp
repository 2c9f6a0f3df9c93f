#pragma once

#include <cstdint>
#include <vector>

namespace startext::kernels {

// OpenMP-parallel numeric kernels. Every parallel loop ranges over
// independent output elements and each output element is accumulated in a
// fixed serial order, so results are bit-identical across runs and thread
// counts. Instantiated for float (training) and double (oracle tests).
// Serial reference implementations live in startext::kernels::serial.

// C[m,n] = A[m,k] * B[k,n]; accumulates into C when accumulate is set.
template <typename T>
void gemm(const T* a, const T* b, T* c, int64_t m, int64_t k, int64_t n, bool accumulate = false);

// C[m,n] = A[m,k] * B[n,k]^T
template <typename T>
void gemm_nt(const T* a, const T* b, T* c, int64_t m, int64_t k, int64_t n, bool accumulate = false);

// C[m,n] = A[k,m]^T * B[k,n]
template <typename T>
void gemm_tn(const T* a, const T* b, T* c, int64_t m, int64_t k, int64_t n, bool accumulate = false);

struct ConvShape {
  int64_t batch, in_channels, in_h, in_w;
  int64_t out_channels, kernel_h, kernel_w;
  int64_t stride_h = 1, stride_w = 1;
  int64_t pad_h = 0, pad_w = 0;

  int64_t out_h() const { return (in_h + 2 * pad_h - kernel_h) / stride_h + 1; }
  int64_t out_w() const { return (in_w + 2 * pad_w - kernel_w) / stride_w + 1; }
};

// x[N,C,H,W], w[O,C,kh,kw], bias[O] (may be null), y[N,O,Ho,Wo]
template <typename T>
void conv2d_forward(const ConvShape& s, const T* x, const T* w, const T* bias, T* y);
template <typename T>
void conv2d_backward_input(const ConvShape& s, const T* dy, const T* w, T* dx);
// Accumulates into dw/dbias (caller zeroes once per batch).
template <typename T>
void conv2d_backward_weights(const ConvShape& s, const T* x, const T* dy, T* dw, T* dbias);

struct PoolShape {
  int64_t batch, channels, in_h, in_w;
  int64_t kernel_h, kernel_w, stride_h, stride_w;
  int64_t out_h() const { return (in_h - kernel_h) / stride_h + 1; }
  int64_t out_w() const { return (in_w - kernel_w) / stride_w + 1; }
};

// Ties resolve to the first element in scan order (fixed).
template <typename T>
void maxpool_forward(const PoolShape& s, const T* x, T* y, int32_t* argmax);
template <typename T>
void maxpool_backward(const PoolShape& s, const T* dy, const int32_t* argmax, T* dx);

// Collapses H to 1 by averaging: x[N,C,H,W] -> y[N,C,1,W].
template <typename T>
void mean_over_height_forward(int64_t n, int64_t c, int64_t h, int64_t w, const T* x, T* y);
template <typename T>
void mean_over_height_backward(int64_t n, int64_t c, int64_t h, int64_t w, const T* dy, T* dx);

// Per-channel batch norm over (N,H,W).
template <typename T>
void bn_forward_train(int64_t n, int64_t c, int64_t h, int64_t w, const T* x, const T* gamma,
                      const T* beta, T eps, T momentum, T* y, T* save_mean, T* save_invstd,
                      T* running_mean, T* running_var);
template <typename T>
void bn_forward_eval(int64_t n, int64_t c, int64_t h, int64_t w, const T* x, const T* gamma,
                     const T* beta, T eps, const T* running_mean, const T* running_var, T* y);
template <typename T>
void bn_backward(int64_t n, int64_t c, int64_t h, int64_t w, const T* x, const T* dy,
                 const T* gamma, const T* save_mean, const T* save_invstd, T* dx, T* dgamma,
                 T* dbeta);

template <typename T>
void relu_forward(const T* x, T* y, int64_t n);
template <typename T>
void relu_backward(const T* x, const T* dy, T* dx, int64_t n);

template <typename T>
void add_rowwise(T* x, const T* bias, int64_t rows, int64_t cols);

// Row-wise softmax / log-softmax on [rows, cols].
template <typename T>
void softmax_rows(const T* x, T* y, int64_t rows, int64_t cols);
template <typename T>
void log_softmax_rows(const T* x, T* y, int64_t rows, int64_t cols);

// LSTM over x[T,N,I] -> h[T,N,H]. Weight layout: wx[4H,I], wh[4H,H], b[4H],
// gate order i,f,g,o. When reverse is set the sequence is processed from
// t=T-1 down (used for the backward direction of a BiLSTM); outputs stay
// indexed by original t. Caches are required for the backward pass:
// gates_cache[T,N,4H] (post-nonlinearity), cell_cache[T,N,H].
template <typename T>
void lstm_forward(int64_t steps, int64_t batch, int64_t in_dim, int64_t hidden, const T* x,
                  const T* wx, const T* wh, const T* b, bool reverse, T* h_out, T* gates_cache,
                  T* cell_cache);
// Accumulates into dwx/dwh/db; dx may be null.
template <typename T>
void lstm_backward(int64_t steps, int64_t batch, int64_t in_dim, int64_t hidden, const T* x,
                   const T* wx, const T* wh, const T* h_out, const T* gates_cache,
                   const T* cell_cache, bool reverse, const T* dh_out, T* dx, T* dwx, T* dwh,
                   T* db);

// Spatial transformer sampling. theta[n] is a row-major 2x3 matrix mapping
// normalized output coords to normalized input coords ([-1,1] frames,
// identity = {1,0,0, 0,1,0}). Out-of-bounds samples read as zero.
template <typename T>
void warp_affine_forward(int64_t n, int64_t c, int64_t in_h, int64_t in_w, int64_t out_h,
                         int64_t out_w, const T* x, const T* theta, T* y);
// dx and/or dtheta may be null. dx is accumulated (caller zeroes).
template <typename T>
void warp_affine_backward(int64_t n, int64_t c, int64_t in_h, int64_t in_w, int64_t out_h,
                          int64_t out_w, const T* x, const T* theta, const T* dy, T* dx,
                          T* dtheta);

// CTC negative log-likelihood for one sample. logits[T,K] are pre-softmax,
// blank is class 0, target holds labels in [1,K-1]. When dlogits is
// non-null it receives d(loss)/d(logits). Throws ValidationError when the
// target's minimum alignment length exceeds T.
template <typename T>
T ctc_loss(const T* logits, int64_t steps, int64_t num_classes, const std::vector<int>& target,
           T* dlogits);

// Minimum number of frames a CTC alignment of `target` needs
// (|target| + number of adjacent repeats).
int64_t ctc_min_length(const std::vector<int>& target);

}  // namespace startext::kernels

namespace startext::kernels::serial {

// Naive single-thread references used by tests and the benchmark target.
template <typename T>
void gemm(const T* a, const T* b, T* c, int64_t m, int64_t k, int64_t n, bool accumulate = false);
template <typename T>
void conv2d_forward(const ConvShape& s, const T* x, const T* w, const T* bias, T* y);
template <typename T>
void maxpool_forward(const PoolShape& s, const T* x, T* y, int32_t* argmax);
template <typename T>
void warp_affine_forward(int64_t n, int64_t c, int64_t in_h, int64_t in_w, int64_t out_h,
                         int64_t out_w, const T* x, const T* theta, T* y);
template <typename T>
void lstm_forward(int64_t steps, int64_t batch, int64_t in_dim, int64_t hidden, const T* x,
                  const T* wx, const T* wh, const T* b, bool reverse, T* h_out, T* gates_cache,
                  T* cell_cache);
template <typename T>
void softmax_rows(const T* x, T* y, int64_t rows, int64_t cols);

}  // namespace startext::kernels::serial
