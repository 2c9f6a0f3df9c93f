#include "startext/kernels/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "startext/core/error.hpp"

namespace startext::kernels {

namespace {

// Work-size guard so tiny tensors skip the OpenMP fork.
constexpr int64_t kParallelThreshold = 1 << 14;

template <typename T>
inline T sigmoid(T x) {
  return T(1) / (T(1) + std::exp(-x));
}

template <typename T>
inline T log_add(T a, T b) {
  if (a == -std::numeric_limits<T>::infinity()) return b;
  if (b == -std::numeric_limits<T>::infinity()) return a;
  T hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

}  // namespace

template <typename T>
void gemm(const T* a, const T* b, T* c, int64_t m, int64_t k, int64_t n, bool accumulate) {
  const int64_t work = m * n * k;
#pragma omp parallel for schedule(static) if (work > kParallelThreshold)
  for (int64_t i = 0; i < m; ++i) {
    T* crow = c + i * n;
    if (!accumulate) std::fill(crow, crow + n, T(0));
    const T* arow = a + i * k;
    for (int64_t p = 0; p < k; ++p) {
      const T av = arow[p];
      if (av == T(0)) continue;
      const T* brow = b + p * n;
      for (int64_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

template <typename T>
void gemm_nt(const T* a, const T* b, T* c, int64_t m, int64_t k, int64_t n, bool accumulate) {
  const int64_t work = m * n * k;
#pragma omp parallel for schedule(static) if (work > kParallelThreshold)
  for (int64_t i = 0; i < m; ++i) {
    const T* arow = a + i * k;
    T* crow = c + i * n;
    for (int64_t j = 0; j < n; ++j) {
      const T* brow = b + j * k;
      T acc = accumulate ? crow[j] : T(0);
      for (int64_t p = 0; p < k; ++p) acc += arow[p] * brow[p];
      crow[j] = acc;
    }
  }
}

template <typename T>
void gemm_tn(const T* a, const T* b, T* c, int64_t m, int64_t k, int64_t n, bool accumulate) {
  const int64_t work = m * n * k;
#pragma omp parallel for schedule(static) if (work > kParallelThreshold)
  for (int64_t i = 0; i < m; ++i) {
    T* crow = c + i * n;
    if (!accumulate) std::fill(crow, crow + n, T(0));
    for (int64_t p = 0; p < k; ++p) {
      const T av = a[p * m + i];
      if (av == T(0)) continue;
      const T* brow = b + p * n;
      for (int64_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

template <typename T>
void conv2d_forward(const ConvShape& s, const T* x, const T* w, const T* bias, T* y) {
  const int64_t ho = s.out_h(), wo = s.out_w();
  const int64_t planes = s.batch * s.out_channels;
#pragma omp parallel for schedule(static) if (planes * ho * wo * s.in_channels > kParallelThreshold)
  for (int64_t plane = 0; plane < planes; ++plane) {
    const int64_t n = plane / s.out_channels;
    const int64_t o = plane % s.out_channels;
    T* yp = y + plane * ho * wo;
    const T b0 = bias ? bias[o] : T(0);
    std::fill(yp, yp + ho * wo, b0);
    for (int64_t c = 0; c < s.in_channels; ++c) {
      const T* xp = x + (n * s.in_channels + c) * s.in_h * s.in_w;
      const T* wp = w + ((o * s.in_channels + c) * s.kernel_h) * s.kernel_w;
      for (int64_t kh = 0; kh < s.kernel_h; ++kh) {
        for (int64_t kw = 0; kw < s.kernel_w; ++kw) {
          const T wv = wp[kh * s.kernel_w + kw];
          if (wv == T(0)) continue;
          // valid output-column range for this kernel column
          int64_t j0 = 0;
          while (j0 < wo && j0 * s.stride_w - s.pad_w + kw < 0) ++j0;
          int64_t j1 = wo;
          while (j1 > j0 && (j1 - 1) * s.stride_w - s.pad_w + kw >= s.in_w) --j1;
          for (int64_t i = 0; i < ho; ++i) {
            const int64_t ih = i * s.stride_h - s.pad_h + kh;
            if (ih < 0 || ih >= s.in_h) continue;
            const T* xrow = xp + ih * s.in_w - s.pad_w + kw;
            T* yrow = yp + i * wo;
            for (int64_t j = j0; j < j1; ++j) yrow[j] += wv * xrow[j * s.stride_w];
          }
        }
      }
    }
  }
}

template <typename T>
void conv2d_backward_input(const ConvShape& s, const T* dy, const T* w, T* dx) {
  const int64_t ho = s.out_h(), wo = s.out_w();
  const int64_t planes = s.batch * s.in_channels;
#pragma omp parallel for schedule(static) if (planes * ho * wo * s.out_channels > kParallelThreshold)
  for (int64_t plane = 0; plane < planes; ++plane) {
    const int64_t n = plane / s.in_channels;
    const int64_t c = plane % s.in_channels;
    T* dxp = dx + plane * s.in_h * s.in_w;
    std::fill(dxp, dxp + s.in_h * s.in_w, T(0));
    for (int64_t o = 0; o < s.out_channels; ++o) {
      const T* dyp = dy + (n * s.out_channels + o) * ho * wo;
      const T* wp = w + ((o * s.in_channels + c) * s.kernel_h) * s.kernel_w;
      for (int64_t kh = 0; kh < s.kernel_h; ++kh) {
        for (int64_t kw = 0; kw < s.kernel_w; ++kw) {
          const T wv = wp[kh * s.kernel_w + kw];
          if (wv == T(0)) continue;
          int64_t j0 = 0;
          while (j0 < wo && j0 * s.stride_w - s.pad_w + kw < 0) ++j0;
          int64_t j1 = wo;
          while (j1 > j0 && (j1 - 1) * s.stride_w - s.pad_w + kw >= s.in_w) --j1;
          for (int64_t i = 0; i < ho; ++i) {
            const int64_t ih = i * s.stride_h - s.pad_h + kh;
            if (ih < 0 || ih >= s.in_h) continue;
            T* dxrow = dxp + ih * s.in_w - s.pad_w + kw;
            const T* dyrow = dyp + i * wo;
            for (int64_t j = j0; j < j1; ++j) dxrow[j * s.stride_w] += wv * dyrow[j];
          }
        }
      }
    }
  }
}

template <typename T>
void conv2d_backward_weights(const ConvShape& s, const T* x, const T* dy, T* dw, T* dbias) {
  const int64_t ho = s.out_h(), wo = s.out_w();
  const int64_t blocks = s.out_channels * s.in_channels;
#pragma omp parallel for schedule(static) if (blocks * ho * wo > kParallelThreshold)
  for (int64_t block = 0; block < blocks; ++block) {
    const int64_t o = block / s.in_channels;
    const int64_t c = block % s.in_channels;
    T* dwp = dw + block * s.kernel_h * s.kernel_w;
    for (int64_t kh = 0; kh < s.kernel_h; ++kh) {
      for (int64_t kw = 0; kw < s.kernel_w; ++kw) {
        T acc = T(0);
        for (int64_t n = 0; n < s.batch; ++n) {
          const T* xp = x + (n * s.in_channels + c) * s.in_h * s.in_w;
          const T* dyp = dy + (n * s.out_channels + o) * ho * wo;
          int64_t j0 = 0;
          while (j0 < wo && j0 * s.stride_w - s.pad_w + kw < 0) ++j0;
          int64_t j1 = wo;
          while (j1 > j0 && (j1 - 1) * s.stride_w - s.pad_w + kw >= s.in_w) --j1;
          for (int64_t i = 0; i < ho; ++i) {
            const int64_t ih = i * s.stride_h - s.pad_h + kh;
            if (ih < 0 || ih >= s.in_h) continue;
            const T* xrow = xp + ih * s.in_w - s.pad_w + kw;
            const T* dyrow = dyp + i * wo;
            for (int64_t j = j0; j < j1; ++j) acc += xrow[j * s.stride_w] * dyrow[j];
          }
        }
        dwp[kh * s.kernel_w + kw] += acc;
      }
    }
  }
  if (dbias) {
#pragma omp parallel for schedule(static) if (s.out_channels * s.batch * ho * wo > kParallelThreshold)
    for (int64_t o = 0; o < s.out_channels; ++o) {
      T acc = T(0);
      for (int64_t n = 0; n < s.batch; ++n) {
        const T* dyp = dy + (n * s.out_channels + o) * ho * wo;
        for (int64_t i = 0; i < ho * wo; ++i) acc += dyp[i];
      }
      dbias[o] += acc;
    }
  }
}

template <typename T>
void maxpool_forward(const PoolShape& s, const T* x, T* y, int32_t* argmax) {
  const int64_t ho = s.out_h(), wo = s.out_w();
  const int64_t planes = s.batch * s.channels;
#pragma omp parallel for schedule(static) if (planes * ho * wo > kParallelThreshold)
  for (int64_t plane = 0; plane < planes; ++plane) {
    const T* xp = x + plane * s.in_h * s.in_w;
    T* yp = y + plane * ho * wo;
    int32_t* ap = argmax + plane * ho * wo;
    for (int64_t i = 0; i < ho; ++i) {
      for (int64_t j = 0; j < wo; ++j) {
        const int64_t h0 = i * s.stride_h, w0 = j * s.stride_w;
        T best = xp[h0 * s.in_w + w0];
        int32_t besti = static_cast<int32_t>(h0 * s.in_w + w0);
        for (int64_t kh = 0; kh < s.kernel_h; ++kh) {
          for (int64_t kw = 0; kw < s.kernel_w; ++kw) {
            const int64_t idx = (h0 + kh) * s.in_w + (w0 + kw);
            if (xp[idx] > best) {
              best = xp[idx];
              besti = static_cast<int32_t>(idx);
            }
          }
        }
        yp[i * wo + j] = best;
        ap[i * wo + j] = besti;
      }
    }
  }
}

template <typename T>
void maxpool_backward(const PoolShape& s, const T* dy, const int32_t* argmax, T* dx) {
  const int64_t ho = s.out_h(), wo = s.out_w();
  const int64_t planes = s.batch * s.channels;
#pragma omp parallel for schedule(static) if (planes * ho * wo > kParallelThreshold)
  for (int64_t plane = 0; plane < planes; ++plane) {
    T* dxp = dx + plane * s.in_h * s.in_w;
    std::fill(dxp, dxp + s.in_h * s.in_w, T(0));
    const T* dyp = dy + plane * ho * wo;
    const int32_t* ap = argmax + plane * ho * wo;
    for (int64_t i = 0; i < ho * wo; ++i) dxp[ap[i]] += dyp[i];
  }
}

template <typename T>
void mean_over_height_forward(int64_t n, int64_t c, int64_t h, int64_t w, const T* x, T* y) {
  const int64_t planes = n * c;
  const T inv = T(1) / static_cast<T>(h);
#pragma omp parallel for schedule(static) if (planes * h * w > kParallelThreshold)
  for (int64_t plane = 0; plane < planes; ++plane) {
    const T* xp = x + plane * h * w;
    T* yp = y + plane * w;
    for (int64_t j = 0; j < w; ++j) {
      T acc = T(0);
      for (int64_t i = 0; i < h; ++i) acc += xp[i * w + j];
      yp[j] = acc * inv;
    }
  }
}

template <typename T>
void mean_over_height_backward(int64_t n, int64_t c, int64_t h, int64_t w, const T* dy, T* dx) {
  const int64_t planes = n * c;
  const T inv = T(1) / static_cast<T>(h);
#pragma omp parallel for schedule(static) if (planes * h * w > kParallelThreshold)
  for (int64_t plane = 0; plane < planes; ++plane) {
    const T* dyp = dy + plane * w;
    T* dxp = dx + plane * h * w;
    for (int64_t i = 0; i < h; ++i)
      for (int64_t j = 0; j < w; ++j) dxp[i * w + j] = dyp[j] * inv;
  }
}

template <typename T>
void bn_forward_train(int64_t n, int64_t c, int64_t h, int64_t w, const T* x, const T* gamma,
                      const T* beta, T eps, T momentum, T* y, T* save_mean, T* save_invstd,
                      T* running_mean, T* running_var) {
  const int64_t spatial = h * w;
  const int64_t count = n * spatial;
#pragma omp parallel for schedule(static) if (c * count > kParallelThreshold)
  for (int64_t ch = 0; ch < c; ++ch) {
    T sum = T(0), sumsq = T(0);
    for (int64_t b = 0; b < n; ++b) {
      const T* xp = x + (b * c + ch) * spatial;
      for (int64_t i = 0; i < spatial; ++i) {
        sum += xp[i];
        sumsq += xp[i] * xp[i];
      }
    }
    const T mean = sum / static_cast<T>(count);
    T var = sumsq / static_cast<T>(count) - mean * mean;
    if (var < T(0)) var = T(0);
    const T invstd = T(1) / std::sqrt(var + eps);
    save_mean[ch] = mean;
    save_invstd[ch] = invstd;
    running_mean[ch] = (T(1) - momentum) * running_mean[ch] + momentum * mean;
    running_var[ch] = (T(1) - momentum) * running_var[ch] + momentum * var;
    const T g = gamma[ch], bta = beta[ch];
    for (int64_t b = 0; b < n; ++b) {
      const T* xp = x + (b * c + ch) * spatial;
      T* yp = y + (b * c + ch) * spatial;
      for (int64_t i = 0; i < spatial; ++i) yp[i] = g * (xp[i] - mean) * invstd + bta;
    }
  }
}

template <typename T>
void bn_forward_eval(int64_t n, int64_t c, int64_t h, int64_t w, const T* x, const T* gamma,
                     const T* beta, T eps, const T* running_mean, const T* running_var, T* y) {
  const int64_t spatial = h * w;
#pragma omp parallel for schedule(static) if (n * c * spatial > kParallelThreshold)
  for (int64_t plane = 0; plane < n * c; ++plane) {
    const int64_t ch = plane % c;
    const T invstd = T(1) / std::sqrt(running_var[ch] + eps);
    const T g = gamma[ch], bta = beta[ch], mean = running_mean[ch];
    const T* xp = x + plane * spatial;
    T* yp = y + plane * spatial;
    for (int64_t i = 0; i < spatial; ++i) yp[i] = g * (xp[i] - mean) * invstd + bta;
  }
}

template <typename T>
void bn_backward(int64_t n, int64_t c, int64_t h, int64_t w, const T* x, const T* dy,
                 const T* gamma, const T* save_mean, const T* save_invstd, T* dx, T* dgamma,
                 T* dbeta) {
  const int64_t spatial = h * w;
  const int64_t count = n * spatial;
#pragma omp parallel for schedule(static) if (c * count > kParallelThreshold)
  for (int64_t ch = 0; ch < c; ++ch) {
    const T mean = save_mean[ch], invstd = save_invstd[ch], g = gamma[ch];
    T sum_dy = T(0), sum_dy_xhat = T(0);
    for (int64_t b = 0; b < n; ++b) {
      const T* xp = x + (b * c + ch) * spatial;
      const T* dyp = dy + (b * c + ch) * spatial;
      for (int64_t i = 0; i < spatial; ++i) {
        sum_dy += dyp[i];
        sum_dy_xhat += dyp[i] * (xp[i] - mean) * invstd;
      }
    }
    dgamma[ch] += sum_dy_xhat;
    dbeta[ch] += sum_dy;
    const T inv_count = T(1) / static_cast<T>(count);
    for (int64_t b = 0; b < n; ++b) {
      const T* xp = x + (b * c + ch) * spatial;
      const T* dyp = dy + (b * c + ch) * spatial;
      T* dxp = dx + (b * c + ch) * spatial;
      for (int64_t i = 0; i < spatial; ++i) {
        const T xhat = (xp[i] - mean) * invstd;
        dxp[i] = g * invstd * (dyp[i] - inv_count * (sum_dy + xhat * sum_dy_xhat));
      }
    }
  }
}

template <typename T>
void relu_forward(const T* x, T* y, int64_t n) {
#pragma omp parallel for schedule(static) if (n > kParallelThreshold)
  for (int64_t i = 0; i < n; ++i) y[i] = x[i] > T(0) ? x[i] : T(0);
}

template <typename T>
void relu_backward(const T* x, const T* dy, T* dx, int64_t n) {
#pragma omp parallel for schedule(static) if (n > kParallelThreshold)
  for (int64_t i = 0; i < n; ++i) dx[i] = x[i] > T(0) ? dy[i] : T(0);
}

template <typename T>
void add_rowwise(T* x, const T* bias, int64_t rows, int64_t cols) {
#pragma omp parallel for schedule(static) if (rows * cols > kParallelThreshold)
  for (int64_t i = 0; i < rows; ++i) {
    T* row = x + i * cols;
    for (int64_t j = 0; j < cols; ++j) row[j] += bias[j];
  }
}

template <typename T>
void softmax_rows(const T* x, T* y, int64_t rows, int64_t cols) {
#pragma omp parallel for schedule(static) if (rows * cols > kParallelThreshold)
  for (int64_t i = 0; i < rows; ++i) {
    const T* xr = x + i * cols;
    T* yr = y + i * cols;
    T mx = xr[0];
    for (int64_t j = 1; j < cols; ++j) mx = std::max(mx, xr[j]);
    T sum = T(0);
    for (int64_t j = 0; j < cols; ++j) {
      yr[j] = std::exp(xr[j] - mx);
      sum += yr[j];
    }
    const T inv = T(1) / sum;
    for (int64_t j = 0; j < cols; ++j) yr[j] *= inv;
  }
}

template <typename T>
void log_softmax_rows(const T* x, T* y, int64_t rows, int64_t cols) {
#pragma omp parallel for schedule(static) if (rows * cols > kParallelThreshold)
  for (int64_t i = 0; i < rows; ++i) {
    const T* xr = x + i * cols;
    T* yr = y + i * cols;
    T mx = xr[0];
    for (int64_t j = 1; j < cols; ++j) mx = std::max(mx, xr[j]);
    T sum = T(0);
    for (int64_t j = 0; j < cols; ++j) sum += std::exp(xr[j] - mx);
    const T lse = mx + std::log(sum);
    for (int64_t j = 0; j < cols; ++j) yr[j] = xr[j] - lse;
  }
}

template <typename T>
void lstm_forward(int64_t steps, int64_t batch, int64_t in_dim, int64_t hidden, const T* x,
                  const T* wx, const T* wh, const T* b, bool reverse, T* h_out, T* gates_cache,
                  T* cell_cache) {
  const int64_t g4 = 4 * hidden;
  std::vector<T> h_prev(batch * hidden, T(0));
  std::vector<T> c_prev(batch * hidden, T(0));
  std::vector<T> gates(batch * g4);
  for (int64_t step = 0; step < steps; ++step) {
    const int64_t t = reverse ? steps - 1 - step : step;
    const T* xt = x + t * batch * in_dim;
    // gates = x_t * wx^T + h_prev * wh^T + b
    gemm_nt(xt, wx, gates.data(), batch, in_dim, g4, false);
    gemm_nt(h_prev.data(), wh, gates.data(), batch, hidden, g4, true);
    add_rowwise(gates.data(), b, batch, g4);
    T* gc = gates_cache + t * batch * g4;
    T* cc = cell_cache + t * batch * hidden;
    T* ht = h_out + t * batch * hidden;
#pragma omp parallel for schedule(static) if (batch * hidden > kParallelThreshold)
    for (int64_t bi = 0; bi < batch; ++bi) {
      const T* grow = gates.data() + bi * g4;
      T* gcrow = gc + bi * g4;
      for (int64_t j = 0; j < hidden; ++j) {
        const T ig = sigmoid(grow[j]);
        const T fg = sigmoid(grow[hidden + j]);
        const T gg = std::tanh(grow[2 * hidden + j]);
        const T og = sigmoid(grow[3 * hidden + j]);
        const T cv = fg * c_prev[bi * hidden + j] + ig * gg;
        gcrow[j] = ig;
        gcrow[hidden + j] = fg;
        gcrow[2 * hidden + j] = gg;
        gcrow[3 * hidden + j] = og;
        cc[bi * hidden + j] = cv;
        ht[bi * hidden + j] = og * std::tanh(cv);
      }
    }
    std::copy(ht, ht + batch * hidden, h_prev.begin());
    std::copy(cc, cc + batch * hidden, c_prev.begin());
  }
}

template <typename T>
void lstm_backward(int64_t steps, int64_t batch, int64_t in_dim, int64_t hidden, const T* x,
                   const T* wx, const T* wh, const T* h_out, const T* gates_cache,
                   const T* cell_cache, bool reverse, const T* dh_out, T* dx, T* dwx, T* dwh,
                   T* db) {
  const int64_t g4 = 4 * hidden;
  std::vector<T> dh(batch * hidden, T(0));
  std::vector<T> dc(batch * hidden, T(0));
  std::vector<T> dgates(batch * g4);
  for (int64_t step = steps - 1; step >= 0; --step) {
    const int64_t t = reverse ? steps - 1 - step : step;
    const int64_t t_prev = reverse ? t + 1 : t - 1;
    const bool has_prev = step > 0;
    const T* gc = gates_cache + t * batch * g4;
    const T* cc = cell_cache + t * batch * hidden;
    const T* cc_prev = has_prev ? cell_cache + t_prev * batch * hidden : nullptr;
    const T* dh_t = dh_out + t * batch * hidden;
#pragma omp parallel for schedule(static) if (batch * hidden > kParallelThreshold)
    for (int64_t bi = 0; bi < batch; ++bi) {
      const T* gcrow = gc + bi * g4;
      T* dgrow = dgates.data() + bi * g4;
      for (int64_t j = 0; j < hidden; ++j) {
        const T ig = gcrow[j], fg = gcrow[hidden + j], gg = gcrow[2 * hidden + j],
                og = gcrow[3 * hidden + j];
        const T cv = cc[bi * hidden + j];
        const T tc = std::tanh(cv);
        const T dht = dh_t[bi * hidden + j] + dh[bi * hidden + j];
        T dcv = dc[bi * hidden + j] + dht * og * (T(1) - tc * tc);
        const T c_pv = has_prev ? cc_prev[bi * hidden + j] : T(0);
        // pre-activation gate gradients
        dgrow[j] = dcv * gg * ig * (T(1) - ig);
        dgrow[hidden + j] = dcv * c_pv * fg * (T(1) - fg);
        dgrow[2 * hidden + j] = dcv * ig * (T(1) - gg * gg);
        dgrow[3 * hidden + j] = dht * tc * og * (T(1) - og);
        dc[bi * hidden + j] = dcv * fg;
      }
    }
    const T* xt = x + t * batch * in_dim;
    const T* h_prev = has_prev ? h_out + t_prev * batch * hidden : nullptr;
    // dwx += dgates^T * x_t ; dwh += dgates^T * h_prev ; db += colsum(dgates)
    gemm_tn(dgates.data(), xt, dwx, g4, batch, in_dim, true);
    if (has_prev) gemm_tn(dgates.data(), h_prev, dwh, g4, batch, hidden, true);
    for (int64_t bi = 0; bi < batch; ++bi)
      for (int64_t j = 0; j < g4; ++j) db[j] += dgates[bi * g4 + j];
    if (dx) gemm(dgates.data(), wx, dx + t * batch * in_dim, batch, g4, in_dim, false);
    // dh_prev = dgates * wh
    gemm(dgates.data(), wh, dh.data(), batch, g4, hidden, false);
    if (!has_prev) break;
  }
}

template <typename T>
void warp_affine_forward(int64_t n, int64_t c, int64_t in_h, int64_t in_w, int64_t out_h,
                         int64_t out_w, const T* x, const T* theta, T* y) {
#pragma omp parallel for schedule(static) if (n * c * out_h * out_w > kParallelThreshold)
  for (int64_t row = 0; row < n * out_h; ++row) {
    const int64_t b = row / out_h;
    const int64_t i = row % out_h;
    const T* th = theta + b * 6;
    // source coordinates computed in double so the identity transform
    // reproduces grid points exactly
    const double yn = out_h > 1 ? 2.0 * i / (out_h - 1) - 1.0 : 0.0;
    for (int64_t j = 0; j < out_w; ++j) {
      const double xn = out_w > 1 ? 2.0 * j / (out_w - 1) - 1.0 : 0.0;
      const double xs_n = double(th[0]) * xn + double(th[1]) * yn + double(th[2]);
      const double ys_n = double(th[3]) * xn + double(th[4]) * yn + double(th[5]);
      const double xs = (xs_n + 1.0) * (in_w - 1) / 2.0;
      const double ys = (ys_n + 1.0) * (in_h - 1) / 2.0;
      const int64_t x0 = static_cast<int64_t>(std::floor(xs));
      const int64_t y0 = static_cast<int64_t>(std::floor(ys));
      const double fx = xs - x0, fy = ys - y0;
      for (int64_t ch = 0; ch < c; ++ch) {
        const T* xp = x + (b * c + ch) * in_h * in_w;
        auto at = [&](int64_t yy, int64_t xx) -> double {
          return (yy >= 0 && yy < in_h && xx >= 0 && xx < in_w) ? double(xp[yy * in_w + xx]) : 0.0;
        };
        const double v = at(y0, x0) * (1 - fx) * (1 - fy) + at(y0, x0 + 1) * fx * (1 - fy) +
                         at(y0 + 1, x0) * (1 - fx) * fy + at(y0 + 1, x0 + 1) * fx * fy;
        y[((b * c + ch) * out_h + i) * out_w + j] = static_cast<T>(v);
      }
    }
  }
}

template <typename T>
void warp_affine_backward(int64_t n, int64_t c, int64_t in_h, int64_t in_w, int64_t out_h,
                          int64_t out_w, const T* x, const T* theta, const T* dy, T* dx,
                          T* dtheta) {
#pragma omp parallel for schedule(static) if (n > 1)
  for (int64_t b = 0; b < n; ++b) {
    const T* th = theta + b * 6;
    double dth[6] = {0, 0, 0, 0, 0, 0};
    for (int64_t i = 0; i < out_h; ++i) {
      const double yn = out_h > 1 ? 2.0 * i / (out_h - 1) - 1.0 : 0.0;
      for (int64_t j = 0; j < out_w; ++j) {
        const double xn = out_w > 1 ? 2.0 * j / (out_w - 1) - 1.0 : 0.0;
        const double xs_n = double(th[0]) * xn + double(th[1]) * yn + double(th[2]);
        const double ys_n = double(th[3]) * xn + double(th[4]) * yn + double(th[5]);
        const double xs = (xs_n + 1.0) * (in_w - 1) / 2.0;
        const double ys = (ys_n + 1.0) * (in_h - 1) / 2.0;
        const int64_t x0 = static_cast<int64_t>(std::floor(xs));
        const int64_t y0 = static_cast<int64_t>(std::floor(ys));
        const double fx = xs - x0, fy = ys - y0;
        double d_xs = 0, d_ys = 0;
        for (int64_t ch = 0; ch < c; ++ch) {
          const T* xp = x + (b * c + ch) * in_h * in_w;
          T* dxp = dx ? dx + (b * c + ch) * in_h * in_w : nullptr;
          const double g = double(dy[((b * c + ch) * out_h + i) * out_w + j]);
          auto in_bounds = [&](int64_t yy, int64_t xx) {
            return yy >= 0 && yy < in_h && xx >= 0 && xx < in_w;
          };
          auto at = [&](int64_t yy, int64_t xx) -> double {
            return in_bounds(yy, xx) ? double(xp[yy * in_w + xx]) : 0.0;
          };
          const double v00 = at(y0, x0), v01 = at(y0, x0 + 1);
          const double v10 = at(y0 + 1, x0), v11 = at(y0 + 1, x0 + 1);
          d_xs += g * ((v01 - v00) * (1 - fy) + (v11 - v10) * fy);
          d_ys += g * ((v10 - v00) * (1 - fx) + (v11 - v01) * fx);
          if (dxp) {
            if (in_bounds(y0, x0)) dxp[y0 * in_w + x0] += static_cast<T>(g * (1 - fx) * (1 - fy));
            if (in_bounds(y0, x0 + 1)) dxp[y0 * in_w + x0 + 1] += static_cast<T>(g * fx * (1 - fy));
            if (in_bounds(y0 + 1, x0)) dxp[(y0 + 1) * in_w + x0] += static_cast<T>(g * (1 - fx) * fy);
            if (in_bounds(y0 + 1, x0 + 1)) dxp[(y0 + 1) * in_w + x0 + 1] += static_cast<T>(g * fx * fy);
          }
        }
        const double d_xs_n = d_xs * (in_w - 1) / 2.0;
        const double d_ys_n = d_ys * (in_h - 1) / 2.0;
        dth[0] += d_xs_n * xn;
        dth[1] += d_xs_n * yn;
        dth[2] += d_xs_n;
        dth[3] += d_ys_n * xn;
        dth[4] += d_ys_n * yn;
        dth[5] += d_ys_n;
      }
    }
    if (dtheta)
      for (int k = 0; k < 6; ++k) dtheta[b * 6 + k] += static_cast<T>(dth[k]);
  }
}

int64_t ctc_min_length(const std::vector<int>& target) {
  int64_t len = static_cast<int64_t>(target.size());
  for (size_t i = 1; i < target.size(); ++i)
    if (target[i] == target[i - 1]) ++len;
  return len;
}

template <typename T>
T ctc_loss(const T* logits, int64_t steps, int64_t num_classes, const std::vector<int>& target,
           T* dlogits) {
  constexpr T kNegInf = -std::numeric_limits<T>::infinity();
  const int64_t L = static_cast<int64_t>(target.size());
  if (ctc_min_length(target) > steps) {
    throw ValidationError("CTC target needs " + std::to_string(ctc_min_length(target)) +
                          " frames but only " + std::to_string(steps) + " are available");
  }
  for (int v : target) {
    if (v < 1 || v >= num_classes)
      throw ValidationError("CTC target label out of range: " + std::to_string(v));
  }
  const int64_t S = 2 * L + 1;
  auto lab = [&](int64_t s) -> int { return (s % 2) ? target[(s - 1) / 2] : 0; };

  std::vector<T> logp(steps * num_classes);
  log_softmax_rows(logits, logp.data(), steps, num_classes);
  auto lp = [&](int64_t t, int cls) -> T { return logp[t * num_classes + cls]; };

  // alpha includes the emission at t; beta excludes it, so
  // P(y) = sum_s alpha_t(s) * beta_t(s) at every t.
  std::vector<T> alpha(steps * S, kNegInf), beta(steps * S, kNegInf);
  alpha[0 * S + 0] = lp(0, lab(0));
  if (S > 1) alpha[0 * S + 1] = lp(0, lab(1));
  for (int64_t t = 1; t < steps; ++t) {
    for (int64_t s = 0; s < S; ++s) {
      T a = alpha[(t - 1) * S + s];
      if (s >= 1) a = log_add(a, alpha[(t - 1) * S + s - 1]);
      if (s >= 2 && lab(s) != 0 && lab(s) != lab(s - 2))
        a = log_add(a, alpha[(t - 1) * S + s - 2]);
      alpha[t * S + s] = a + lp(t, lab(s));
    }
  }
  T log_p = alpha[(steps - 1) * S + S - 1];
  if (S > 1) log_p = log_add(log_p, alpha[(steps - 1) * S + S - 2]);
  if (!(log_p > kNegInf))
    throw RuntimeFailure("CTC loss is infinite: no alignment has nonzero probability");

  if (dlogits) {
    beta[(steps - 1) * S + S - 1] = T(0);
    if (S > 1) beta[(steps - 1) * S + S - 2] = T(0);
    for (int64_t t = steps - 2; t >= 0; --t) {
      for (int64_t s = 0; s < S; ++s) {
        T v = beta[(t + 1) * S + s] + lp(t + 1, lab(s));
        if (s + 1 < S) v = log_add(v, beta[(t + 1) * S + s + 1] + lp(t + 1, lab(s + 1)));
        if (s + 2 < S && lab(s + 2) != 0 && lab(s + 2) != lab(s))
          v = log_add(v, beta[(t + 1) * S + s + 2] + lp(t + 1, lab(s + 2)));
        beta[t * S + s] = v;
      }
    }
    for (int64_t t = 0; t < steps; ++t) {
      std::vector<T> post(num_classes, kNegInf);
      for (int64_t s = 0; s < S; ++s) {
        const T g = alpha[t * S + s] + beta[t * S + s];
        post[lab(s)] = log_add(post[lab(s)], g);
      }
      for (int64_t k = 0; k < num_classes; ++k) {
        const T soft = std::exp(logp[t * num_classes + k]);
        const T q = post[k] > kNegInf ? std::exp(post[k] - log_p) : T(0);
        dlogits[t * num_classes + k] = soft - q;
      }
    }
  }
  return -log_p;
}

// ---------------------------------------------------------------------------

template void gemm<float>(const float*, const float*, float*, int64_t, int64_t, int64_t, bool);
template void gemm<double>(const double*, const double*, double*, int64_t, int64_t, int64_t, bool);
template void gemm_nt<float>(const float*, const float*, float*, int64_t, int64_t, int64_t, bool);
template void gemm_nt<double>(const double*, const double*, double*, int64_t, int64_t, int64_t, bool);
template void gemm_tn<float>(const float*, const float*, float*, int64_t, int64_t, int64_t, bool);
template void gemm_tn<double>(const double*, const double*, double*, int64_t, int64_t, int64_t, bool);
template void conv2d_forward<float>(const ConvShape&, const float*, const float*, const float*, float*);
template void conv2d_forward<double>(const ConvShape&, const double*, const double*, const double*, double*);
template void conv2d_backward_input<float>(const ConvShape&, const float*, const float*, float*);
template void conv2d_backward_input<double>(const ConvShape&, const double*, const double*, double*);
template void conv2d_backward_weights<float>(const ConvShape&, const float*, const float*, float*, float*);
template void conv2d_backward_weights<double>(const ConvShape&, const double*, const double*, double*, double*);
template void maxpool_forward<float>(const PoolShape&, const float*, float*, int32_t*);
template void maxpool_forward<double>(const PoolShape&, const double*, double*, int32_t*);
template void maxpool_backward<float>(const PoolShape&, const float*, const int32_t*, float*);
template void maxpool_backward<double>(const PoolShape&, const double*, const int32_t*, double*);
template void mean_over_height_forward<float>(int64_t, int64_t, int64_t, int64_t, const float*, float*);
template void mean_over_height_forward<double>(int64_t, int64_t, int64_t, int64_t, const double*, double*);
template void mean_over_height_backward<float>(int64_t, int64_t, int64_t, int64_t, const float*, float*);
template void mean_over_height_backward<double>(int64_t, int64_t, int64_t, int64_t, const double*, double*);
template void bn_forward_train<float>(int64_t, int64_t, int64_t, int64_t, const float*, const float*, const float*, float, float, float*, float*, float*, float*, float*);
template void bn_forward_train<double>(int64_t, int64_t, int64_t, int64_t, const double*, const double*, const double*, double, double, double*, double*, double*, double*, double*);
template void bn_forward_eval<float>(int64_t, int64_t, int64_t, int64_t, const float*, const float*, const float*, float, const float*, const float*, float*);
template void bn_forward_eval<double>(int64_t, int64_t, int64_t, int64_t, const double*, const double*, const double*, double, const double*, const double*, double*);
template void bn_backward<float>(int64_t, int64_t, int64_t, int64_t, const float*, const float*, const float*, const float*, const float*, float*, float*, float*);
template void bn_backward<double>(int64_t, int64_t, int64_t, int64_t, const double*, const double*, const double*, const double*, const double*, double*, double*, double*);
template void relu_forward<float>(const float*, float*, int64_t);
template void relu_forward<double>(const double*, double*, int64_t);
template void relu_backward<float>(const float*, const float*, float*, int64_t);
template void relu_backward<double>(const double*, const double*, double*, int64_t);
template void add_rowwise<float>(float*, const float*, int64_t, int64_t);
template void add_rowwise<double>(double*, const double*, int64_t, int64_t);
template void softmax_rows<float>(const float*, float*, int64_t, int64_t);
template void softmax_rows<double>(const double*, double*, int64_t, int64_t);
template void log_softmax_rows<float>(const float*, float*, int64_t, int64_t);
template void log_softmax_rows<double>(const double*, double*, int64_t, int64_t);
template void lstm_forward<float>(int64_t, int64_t, int64_t, int64_t, const float*, const float*, const float*, const float*, bool, float*, float*, float*);
template void lstm_forward<double>(int64_t, int64_t, int64_t, int64_t, const double*, const double*, const double*, const double*, bool, double*, double*, double*);
template void lstm_backward<float>(int64_t, int64_t, int64_t, int64_t, const float*, const float*, const float*, const float*, const float*, const float*, bool, const float*, float*, float*, float*, float*);
template void lstm_backward<double>(int64_t, int64_t, int64_t, int64_t, const double*, const double*, const double*, const double*, const double*, const double*, bool, const double*, double*, double*, double*, double*);
template void warp_affine_forward<float>(int64_t, int64_t, int64_t, int64_t, int64_t, int64_t, const float*, const float*, float*);
template void warp_affine_forward<double>(int64_t, int64_t, int64_t, int64_t, int64_t, int64_t, const double*, const double*, double*);
template void warp_affine_backward<float>(int64_t, int64_t, int64_t, int64_t, int64_t, int64_t, const float*, const float*, const float*, float*, float*);
template void warp_affine_backward<double>(int64_t, int64_t, int64_t, int64_t, int64_t, int64_t, const double*, const double*, const double*, double*, double*);
template float ctc_loss<float>(const float*, int64_t, int64_t, const std::vector<int>&, float*);
template double ctc_loss<double>(const double*, int64_t, int64_t, const std::vector<int>&, double*);

}  // namespace startext::kernels
