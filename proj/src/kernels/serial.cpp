#include <algorithm>
#include <cmath>
#include <vector>

#include "startext/kernels/kernels.hpp"

// Naive single-thread reference kernels. Written independently of the
// parallel versions (different loop structure) so the two act as
// cross-checks in tests and as the baseline in the benchmark target.

namespace startext::kernels::serial {

template <typename T>
void gemm(const T* a, const T* b, T* c, int64_t m, int64_t k, int64_t n, bool accumulate) {
  for (int64_t i = 0; i < m; ++i) {
    for (int64_t j = 0; j < n; ++j) {
      T acc = accumulate ? c[i * n + j] : T(0);
      for (int64_t p = 0; p < k; ++p) acc += a[i * k + p] * b[p * n + j];
      c[i * n + j] = acc;
    }
  }
}

template <typename T>
void conv2d_forward(const ConvShape& s, const T* x, const T* w, const T* bias, T* y) {
  const int64_t ho = s.out_h(), wo = s.out_w();
  for (int64_t n = 0; n < s.batch; ++n) {
    for (int64_t o = 0; o < s.out_channels; ++o) {
      for (int64_t i = 0; i < ho; ++i) {
        for (int64_t j = 0; j < wo; ++j) {
          T acc = bias ? bias[o] : T(0);
          for (int64_t c = 0; c < s.in_channels; ++c) {
            for (int64_t kh = 0; kh < s.kernel_h; ++kh) {
              for (int64_t kw = 0; kw < s.kernel_w; ++kw) {
                const int64_t ih = i * s.stride_h - s.pad_h + kh;
                const int64_t iw = j * s.stride_w - s.pad_w + kw;
                if (ih < 0 || ih >= s.in_h || iw < 0 || iw >= s.in_w) continue;
                acc += x[((n * s.in_channels + c) * s.in_h + ih) * s.in_w + iw] *
                       w[((o * s.in_channels + c) * s.kernel_h + kh) * s.kernel_w + kw];
              }
            }
          }
          y[((n * s.out_channels + o) * ho + i) * wo + j] = acc;
        }
      }
    }
  }
}

template <typename T>
void maxpool_forward(const PoolShape& s, const T* x, T* y, int32_t* argmax) {
  const int64_t ho = s.out_h(), wo = s.out_w();
  for (int64_t plane = 0; plane < s.batch * s.channels; ++plane) {
    const T* xp = x + plane * s.in_h * s.in_w;
    for (int64_t i = 0; i < ho; ++i) {
      for (int64_t j = 0; j < wo; ++j) {
        T best = -std::numeric_limits<T>::infinity();
        int32_t besti = 0;
        for (int64_t kh = 0; kh < s.kernel_h; ++kh) {
          for (int64_t kw = 0; kw < s.kernel_w; ++kw) {
            const int64_t idx = (i * s.stride_h + kh) * s.in_w + (j * s.stride_w + kw);
            if (xp[idx] > best) {
              best = xp[idx];
              besti = static_cast<int32_t>(idx);
            }
          }
        }
        y[plane * ho * wo + i * wo + j] = best;
        argmax[plane * ho * wo + i * wo + j] = besti;
      }
    }
  }
}

template <typename T>
void warp_affine_forward(int64_t n, int64_t c, int64_t in_h, int64_t in_w, int64_t out_h,
                         int64_t out_w, const T* x, const T* theta, T* y) {
  for (int64_t b = 0; b < n; ++b) {
    const T* th = theta + b * 6;
    for (int64_t ch = 0; ch < c; ++ch) {
      const T* xp = x + (b * c + ch) * in_h * in_w;
      for (int64_t i = 0; i < out_h; ++i) {
        for (int64_t j = 0; j < out_w; ++j) {
          const double yn = out_h > 1 ? 2.0 * i / (out_h - 1) - 1.0 : 0.0;
          const double xn = out_w > 1 ? 2.0 * j / (out_w - 1) - 1.0 : 0.0;
          const double xs = (double(th[0]) * xn + double(th[1]) * yn + double(th[2]) + 1.0) *
                            (in_w - 1) / 2.0;
          const double ys = (double(th[3]) * xn + double(th[4]) * yn + double(th[5]) + 1.0) *
                            (in_h - 1) / 2.0;
          const int64_t x0 = static_cast<int64_t>(std::floor(xs));
          const int64_t y0 = static_cast<int64_t>(std::floor(ys));
          const double fx = xs - x0, fy = ys - y0;
          double v = 0;
          for (int dy2 = 0; dy2 <= 1; ++dy2) {
            for (int dx2 = 0; dx2 <= 1; ++dx2) {
              const int64_t yy = y0 + dy2, xx = x0 + dx2;
              if (yy < 0 || yy >= in_h || xx < 0 || xx >= in_w) continue;
              const double wgt = (dx2 ? fx : 1 - fx) * (dy2 ? fy : 1 - fy);
              v += wgt * double(xp[yy * in_w + xx]);
            }
          }
          y[((b * c + ch) * out_h + i) * out_w + j] = static_cast<T>(v);
        }
      }
    }
  }
}

template <typename T>
void lstm_forward(int64_t steps, int64_t batch, int64_t in_dim, int64_t hidden, const T* x,
                  const T* wx, const T* wh, const T* b, bool reverse, T* h_out, T* gates_cache,
                  T* cell_cache) {
  auto sig = [](T v) { return T(1) / (T(1) + std::exp(-v)); };
  std::vector<T> h_prev(batch * hidden, T(0)), c_prev(batch * hidden, T(0));
  for (int64_t step = 0; step < steps; ++step) {
    const int64_t t = reverse ? steps - 1 - step : step;
    for (int64_t bi = 0; bi < batch; ++bi) {
      const T* xt = x + (t * batch + bi) * in_dim;
      for (int64_t j = 0; j < hidden; ++j) {
        T pre[4];
        for (int g = 0; g < 4; ++g) {
          T acc = b[g * hidden + j];
          const T* wxr = wx + (g * hidden + j) * in_dim;
          for (int64_t p = 0; p < in_dim; ++p) acc += wxr[p] * xt[p];
          const T* whr = wh + (g * hidden + j) * hidden;
          for (int64_t p = 0; p < hidden; ++p) acc += whr[p] * h_prev[bi * hidden + p];
          pre[g] = acc;
        }
        const T ig = sig(pre[0]), fg = sig(pre[1]), gg = std::tanh(pre[2]), og = sig(pre[3]);
        const T cv = fg * c_prev[bi * hidden + j] + ig * gg;
        T* gc = gates_cache + (t * batch + bi) * 4 * hidden;
        gc[j] = ig;
        gc[hidden + j] = fg;
        gc[2 * hidden + j] = gg;
        gc[3 * hidden + j] = og;
        cell_cache[(t * batch + bi) * hidden + j] = cv;
        h_out[(t * batch + bi) * hidden + j] = og * std::tanh(cv);
      }
    }
    std::copy(h_out + t * batch * hidden, h_out + (t + 1) * batch * hidden, h_prev.begin());
    std::copy(cell_cache + t * batch * hidden, cell_cache + (t + 1) * batch * hidden,
              c_prev.begin());
  }
}

template <typename T>
void softmax_rows(const T* x, T* y, int64_t rows, int64_t cols) {
  for (int64_t i = 0; i < rows; ++i) {
    T mx = x[i * cols];
    for (int64_t j = 1; j < cols; ++j) mx = std::max(mx, x[i * cols + j]);
    T sum = 0;
    for (int64_t j = 0; j < cols; ++j) sum += std::exp(x[i * cols + j] - mx);
    for (int64_t j = 0; j < cols; ++j) y[i * cols + j] = std::exp(x[i * cols + j] - mx) / sum;
  }
}

template void gemm<float>(const float*, const float*, float*, int64_t, int64_t, int64_t, bool);
template void gemm<double>(const double*, const double*, double*, int64_t, int64_t, int64_t, bool);
template void conv2d_forward<float>(const ConvShape&, const float*, const float*, const float*, float*);
template void conv2d_forward<double>(const ConvShape&, const double*, const double*, const double*, double*);
template void maxpool_forward<float>(const PoolShape&, const float*, float*, int32_t*);
template void maxpool_forward<double>(const PoolShape&, const double*, double*, int32_t*);
template void warp_affine_forward<float>(int64_t, int64_t, int64_t, int64_t, int64_t, int64_t, const float*, const float*, float*);
template void warp_affine_forward<double>(int64_t, int64_t, int64_t, int64_t, int64_t, int64_t, const double*, const double*, double*);
template void lstm_forward<float>(int64_t, int64_t, int64_t, int64_t, const float*, const float*, const float*, const float*, bool, float*, float*, float*);
template void lstm_forward<double>(int64_t, int64_t, int64_t, int64_t, const double*, const double*, const double*, const double*, bool, double*, double*, double*);
template void softmax_rows<float>(const float*, float*, int64_t, int64_t);
template void softmax_rows<double>(const double*, double*, int64_t, int64_t);

}  // namespace startext::kernels::serial
