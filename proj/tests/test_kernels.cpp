#include <cmath>
#include <vector>

#include "doctest.h"
#include "startext/core/rng.hpp"
#include "startext/kernels/kernels.hpp"

using namespace startext;
namespace K = startext::kernels;

namespace {

std::vector<double> random_vec(CounterRng& rng, size_t n, double scale = 1.0) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.normal() * scale;
  return v;
}

// |a-b| <= rel*max(|a|,|b|) + abs_floor, elementwise
void check_close(const std::vector<double>& a, const std::vector<double>& b, double rel,
                 double abs_floor) {
  REQUIRE(a.size() == b.size());
  for (size_t i = 0; i < a.size(); ++i) {
    const double tol = rel * std::max(std::abs(a[i]), std::abs(b[i])) + abs_floor;
    CHECK(std::abs(a[i] - b[i]) <= tol);
  }
}

}  // namespace

TEST_SUITE("kernels") {

TEST_CASE("gemm variants agree with serial reference") {
  CounterRng rng(1);
  const int64_t m = 17, k = 23, n = 13;
  auto a = random_vec(rng, m * k);
  auto b = random_vec(rng, k * n);
  std::vector<double> c_par(m * n), c_ref(m * n);
  K::gemm(a.data(), b.data(), c_par.data(), m, k, n);
  K::serial::gemm(a.data(), b.data(), c_ref.data(), m, k, n);
  check_close(c_par, c_ref, 1e-12, 1e-14);

  // gemm_nt(A, B) == A * B^T: compare via explicit transpose
  auto bt = random_vec(rng, n * k);
  std::vector<double> b2(k * n);
  for (int64_t i = 0; i < n; ++i)
    for (int64_t j = 0; j < k; ++j) b2[j * n + i] = bt[i * k + j];
  std::vector<double> c1(m * n), c2(m * n);
  K::gemm_nt(a.data(), bt.data(), c1.data(), m, k, n);
  K::serial::gemm(a.data(), b2.data(), c2.data(), m, k, n);
  check_close(c1, c2, 1e-12, 1e-14);

  // gemm_tn(A, B) == A^T * B
  auto at = random_vec(rng, k * m);
  std::vector<double> a2(m * k);
  for (int64_t i = 0; i < k; ++i)
    for (int64_t j = 0; j < m; ++j) a2[j * k + i] = at[i * m + j];
  K::gemm_tn(at.data(), b.data(), c1.data(), m, k, n);
  K::serial::gemm(a2.data(), b.data(), c2.data(), m, k, n);
  check_close(c1, c2, 1e-12, 1e-14);
}

TEST_CASE("conv2d forward agrees with serial reference") {
  CounterRng rng(2);
  for (int cfg = 0; cfg < 4; ++cfg) {
    K::ConvShape s;
    s.batch = 2;
    s.in_channels = 3;
    s.in_h = 9;
    s.in_w = 11;
    s.out_channels = 4;
    s.kernel_h = 3;
    s.kernel_w = 3;
    s.stride_h = (cfg & 1) ? 2 : 1;
    s.stride_w = (cfg & 1) ? 2 : 1;
    s.pad_h = (cfg & 2) ? 1 : 0;
    s.pad_w = (cfg & 2) ? 1 : 0;
    auto x = random_vec(rng, s.batch * s.in_channels * s.in_h * s.in_w);
    auto w = random_vec(rng, s.out_channels * s.in_channels * s.kernel_h * s.kernel_w);
    auto b = random_vec(rng, s.out_channels);
    std::vector<double> y1(s.batch * s.out_channels * s.out_h() * s.out_w());
    std::vector<double> y2(y1.size());
    K::conv2d_forward(s, x.data(), w.data(), b.data(), y1.data());
    K::serial::conv2d_forward(s, x.data(), w.data(), b.data(), y2.data());
    check_close(y1, y2, 1e-12, 1e-14);
  }
}

TEST_CASE("conv2d backward matches finite differences") {
  CounterRng rng(3);
  K::ConvShape s;
  s.batch = 2;
  s.in_channels = 2;
  s.in_h = 5;
  s.in_w = 6;
  s.out_channels = 3;
  s.kernel_h = 3;
  s.kernel_w = 3;
  s.stride_h = 2;
  s.stride_w = 1;
  s.pad_h = 1;
  s.pad_w = 1;
  const int64_t nx = s.batch * s.in_channels * s.in_h * s.in_w;
  const int64_t nw = s.out_channels * s.in_channels * s.kernel_h * s.kernel_w;
  const int64_t ny = s.batch * s.out_channels * s.out_h() * s.out_w();
  auto x = random_vec(rng, nx);
  auto w = random_vec(rng, nw);
  auto bias = random_vec(rng, s.out_channels);
  auto dy = random_vec(rng, ny);

  auto loss = [&](const std::vector<double>& xv, const std::vector<double>& wv,
                  const std::vector<double>& bv) {
    std::vector<double> y(ny);
    K::conv2d_forward(s, xv.data(), wv.data(), bv.data(), y.data());
    double l = 0;
    for (int64_t i = 0; i < ny; ++i) l += y[i] * dy[i];
    return l;
  };

  std::vector<double> dx(nx), dw(nw, 0.0), db(s.out_channels, 0.0);
  K::conv2d_backward_input(s, dy.data(), w.data(), dx.data());
  K::conv2d_backward_weights(s, x.data(), dy.data(), dw.data(), db.data());

  const double h = 1e-5;
  for (int64_t i = 0; i < nx; i += 7) {
    auto xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    const double fd = (loss(xp, w, bias) - loss(xm, w, bias)) / (2 * h);
    CHECK(std::abs(fd - dx[i]) <= 1e-6 * std::max({1.0, std::abs(fd), std::abs(dx[i])}));
  }
  for (int64_t i = 0; i < nw; i += 5) {
    auto wp = w, wm = w;
    wp[i] += h;
    wm[i] -= h;
    const double fd = (loss(x, wp, bias) - loss(x, wm, bias)) / (2 * h);
    CHECK(std::abs(fd - dw[i]) <= 1e-6 * std::max({1.0, std::abs(fd), std::abs(dw[i])}));
  }
  for (int64_t i = 0; i < s.out_channels; ++i) {
    auto bp = bias, bm = bias;
    bp[i] += h;
    bm[i] -= h;
    const double fd = (loss(x, w, bp) - loss(x, w, bm)) / (2 * h);
    CHECK(std::abs(fd - db[i]) <= 1e-6 * std::max({1.0, std::abs(fd), std::abs(db[i])}));
  }
}

TEST_CASE("maxpool forward/backward") {
  CounterRng rng(4);
  K::PoolShape s{2, 3, 8, 10, 2, 2, 2, 2};
  const int64_t nx = s.batch * s.channels * s.in_h * s.in_w;
  const int64_t ny = s.batch * s.channels * s.out_h() * s.out_w();
  auto x = random_vec(rng, nx, 10.0);  // spread values so FD cannot flip a max
  std::vector<double> y1(ny), y2(ny);
  std::vector<int32_t> a1(ny), a2(ny);
  K::maxpool_forward(s, x.data(), y1.data(), a1.data());
  K::serial::maxpool_forward(s, x.data(), y2.data(), a2.data());
  check_close(y1, y2, 0, 0);
  for (int64_t i = 0; i < ny; ++i) CHECK(a1[i] == a2[i]);

  auto dy = random_vec(rng, ny);
  std::vector<double> dx(nx);
  K::maxpool_backward(s, dy.data(), a1.data(), dx.data());
  const double h = 1e-5;
  auto loss = [&](const std::vector<double>& xv) {
    std::vector<double> y(ny);
    std::vector<int32_t> a(ny);
    K::maxpool_forward(s, xv.data(), y.data(), a.data());
    double l = 0;
    for (int64_t i = 0; i < ny; ++i) l += y[i] * dy[i];
    return l;
  };
  for (int64_t i = 0; i < nx; i += 11) {
    auto xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    const double fd = (loss(xp) - loss(xm)) / (2 * h);
    CHECK(std::abs(fd - dx[i]) <= 1e-6 * std::max({1.0, std::abs(fd), std::abs(dx[i])}));
  }
}

TEST_CASE("batchnorm backward matches finite differences") {
  CounterRng rng(5);
  const int64_t n = 3, c = 4, h = 2, w = 5;
  const int64_t nx = n * c * h * w;
  auto x = random_vec(rng, nx);
  auto gamma = random_vec(rng, c);
  auto beta = random_vec(rng, c);
  auto dy = random_vec(rng, nx);
  const double eps = 1e-5;

  auto forward = [&](const std::vector<double>& xv, const std::vector<double>& gv,
                     const std::vector<double>& bv) {
    std::vector<double> y(nx), sm(c), si(c), rm(c, 0.0), rv(c, 1.0);
    K::bn_forward_train(n, c, h, w, xv.data(), gv.data(), bv.data(), eps, 0.1, y.data(),
                        sm.data(), si.data(), rm.data(), rv.data());
    double l = 0;
    for (int64_t i = 0; i < nx; ++i) l += y[i] * dy[i];
    return l;
  };

  std::vector<double> y(nx), sm(c), si(c), rm(c, 0.0), rv(c, 1.0);
  K::bn_forward_train(n, c, h, w, x.data(), gamma.data(), beta.data(), eps, 0.1, y.data(),
                      sm.data(), si.data(), rm.data(), rv.data());
  std::vector<double> dx(nx), dgamma(c, 0.0), dbeta(c, 0.0);
  K::bn_backward(n, c, h, w, x.data(), dy.data(), gamma.data(), sm.data(), si.data(), dx.data(),
                 dgamma.data(), dbeta.data());

  const double step = 1e-5;
  for (int64_t i = 0; i < nx; i += 9) {
    auto xp = x, xm = x;
    xp[i] += step;
    xm[i] -= step;
    const double fd = (forward(xp, gamma, beta) - forward(xm, gamma, beta)) / (2 * step);
    CHECK(std::abs(fd - dx[i]) <= 1e-5 * std::max({1.0, std::abs(fd), std::abs(dx[i])}));
  }
  for (int64_t i = 0; i < c; ++i) {
    auto gp = gamma, gm = gamma;
    gp[i] += step;
    gm[i] -= step;
    const double fd = (forward(x, gp, beta) - forward(x, gm, beta)) / (2 * step);
    CHECK(std::abs(fd - dgamma[i]) <= 1e-5 * std::max({1.0, std::abs(fd), std::abs(dgamma[i])}));
  }

  // all-zero input stays finite (variance clamps at zero, eps guards)
  std::vector<double> zeros(nx, 0.0);
  K::bn_forward_train(n, c, h, w, zeros.data(), gamma.data(), beta.data(), eps, 0.1, y.data(),
                      sm.data(), si.data(), rm.data(), rv.data());
  for (double v : y) CHECK(std::isfinite(v));
}

TEST_CASE("lstm forward agrees with serial reference") {
  CounterRng rng(6);
  const int64_t steps = 7, batch = 3, in_dim = 5, hidden = 4;
  auto x = random_vec(rng, steps * batch * in_dim);
  auto wx = random_vec(rng, 4 * hidden * in_dim, 0.5);
  auto wh = random_vec(rng, 4 * hidden * hidden, 0.5);
  auto b = random_vec(rng, 4 * hidden, 0.1);
  for (bool reverse : {false, true}) {
    std::vector<double> h1(steps * batch * hidden), h2(h1.size());
    std::vector<double> g1(steps * batch * 4 * hidden), g2(g1.size());
    std::vector<double> c1(steps * batch * hidden), c2(c1.size());
    K::lstm_forward(steps, batch, in_dim, hidden, x.data(), wx.data(), wh.data(), b.data(),
                    reverse, h1.data(), g1.data(), c1.data());
    K::serial::lstm_forward(steps, batch, in_dim, hidden, x.data(), wx.data(), wh.data(), b.data(),
                            reverse, h2.data(), g2.data(), c2.data());
    check_close(h1, h2, 1e-10, 1e-12);
  }
}

TEST_CASE("lstm backward matches finite differences") {
  CounterRng rng(7);
  const int64_t steps = 4, batch = 2, in_dim = 3, hidden = 3;
  const int64_t nx = steps * batch * in_dim;
  auto x = random_vec(rng, nx);
  auto wx = random_vec(rng, 4 * hidden * in_dim, 0.5);
  auto wh = random_vec(rng, 4 * hidden * hidden, 0.5);
  auto b = random_vec(rng, 4 * hidden, 0.1);
  auto dh = random_vec(rng, steps * batch * hidden);

  for (bool reverse : {false, true}) {
    auto loss = [&](const std::vector<double>& xv, const std::vector<double>& wxv,
                    const std::vector<double>& whv, const std::vector<double>& bv) {
      std::vector<double> h(steps * batch * hidden), g(steps * batch * 4 * hidden),
          c(steps * batch * hidden);
      K::lstm_forward(steps, batch, in_dim, hidden, xv.data(), wxv.data(), whv.data(), bv.data(),
                      reverse, h.data(), g.data(), c.data());
      double l = 0;
      for (size_t i = 0; i < h.size(); ++i) l += h[i] * dh[i];
      return l;
    };

    std::vector<double> h(steps * batch * hidden), g(steps * batch * 4 * hidden),
        c(steps * batch * hidden);
    K::lstm_forward(steps, batch, in_dim, hidden, x.data(), wx.data(), wh.data(), b.data(),
                    reverse, h.data(), g.data(), c.data());
    std::vector<double> dx(nx), dwx(wx.size(), 0.0), dwh(wh.size(), 0.0), db(b.size(), 0.0);
    K::lstm_backward(steps, batch, in_dim, hidden, x.data(), wx.data(), wh.data(), h.data(),
                     g.data(), c.data(), reverse, dh.data(), dx.data(), dwx.data(), dwh.data(),
                     db.data());

    const double step = 1e-5;
    auto fd_check = [&](std::vector<double>& param, const std::vector<double>& grad,
                        int64_t stride) {
      for (size_t i = 0; i < param.size(); i += stride) {
        const double keep = param[i];
        param[i] = keep + step;
        const double lp = loss(x, wx, wh, b);
        param[i] = keep - step;
        const double lm = loss(x, wx, wh, b);
        param[i] = keep;
        const double fd = (lp - lm) / (2 * step);
        CHECK(std::abs(fd - grad[i]) <= 1e-5 * std::max({1.0, std::abs(fd), std::abs(grad[i])}));
      }
    };
    fd_check(wx, dwx, 5);
    fd_check(wh, dwh, 7);
    fd_check(b, db, 3);
    for (int64_t i = 0; i < nx; i += 4) {
      auto xp = x, xm = x;
      xp[i] += step;
      xm[i] -= step;
      const double fd = (loss(xp, wx, wh, b) - loss(xm, wx, wh, b)) / (2 * step);
      CHECK(std::abs(fd - dx[i]) <= 1e-5 * std::max({1.0, std::abs(fd), std::abs(dx[i])}));
    }
  }
}

TEST_CASE("softmax rows are normalized") {
  CounterRng rng(8);
  const int64_t rows = 40, cols = 17;
  auto x = random_vec(rng, rows * cols, 3.0);
  std::vector<double> y(rows * cols), yref(rows * cols);
  K::softmax_rows(x.data(), y.data(), rows, cols);
  K::serial::softmax_rows(x.data(), yref.data(), rows, cols);
  check_close(y, yref, 1e-12, 1e-15);
  for (int64_t i = 0; i < rows; ++i) {
    double sum = 0;
    for (int64_t j = 0; j < cols; ++j) sum += y[i * cols + j];
    CHECK(std::abs(sum - 1.0) < 1e-6);
  }
  std::vector<double> ly(rows * cols);
  K::log_softmax_rows(x.data(), ly.data(), rows, cols);
  for (int64_t i = 0; i < rows * cols; ++i)
    CHECK(std::abs(std::exp(ly[i]) - y[i]) < 1e-12);
}

TEST_CASE("mean_over_height gradients") {
  CounterRng rng(9);
  const int64_t n = 2, c = 3, h = 4, w = 5;
  auto x = random_vec(rng, n * c * h * w);
  std::vector<double> y(n * c * w);
  K::mean_over_height_forward(n, c, h, w, x.data(), y.data());
  CHECK(y[0] == doctest::Approx((x[0] + x[w] + x[2 * w] + x[3 * w]) / 4.0));
  auto dy = random_vec(rng, n * c * w);
  std::vector<double> dx(n * c * h * w);
  K::mean_over_height_backward(n, c, h, w, dy.data(), dx.data());
  CHECK(dx[0] == doctest::Approx(dy[0] / 4.0));
  CHECK(dx[3 * w] == doctest::Approx(dy[0] / 4.0));
}

}  // TEST_SUITE
