#include "ser/kernels.hpp"

#include <algorithm>
#include <cstring>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace ser::kernels {

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

int same_out(int dim, int s) { return (dim + s - 1) / s; }

int same_pad_before(int dim, int k, int s) {
  const int total = std::max(0, (same_out(dim, s) - 1) * s + k - dim);
  return total / 2;
}

namespace {

constexpr int kStrip = 256;  // output columns accumulated in L1 per pass

// Row-range cores are noinline so the serial and threaded entry points run
// the same machine code; per-element reduction order never depends on the
// thread count.

[[gnu::noinline]] void gemm_rows(const double* a, const double* b, double* c, i64 r0, i64 r1,
                                 int n, int k) {
  for (i64 m = r0; m < r1; ++m) {
    const double* arow = a + m * k;
    double* crow = c + m * n;
    for (int n0 = 0; n0 < n; n0 += kStrip) {
      const int nn = std::min(kStrip, n - n0);
      double acc[kStrip];
      std::memcpy(acc, crow + n0, sizeof(double) * static_cast<size_t>(nn));
      for (int kk = 0; kk < k; ++kk) {
        const double av = arow[kk];
        const double* brow = b + i64(kk) * n + n0;
        for (int j = 0; j < nn; ++j) acc[j] += av * brow[j];
      }
      std::memcpy(crow + n0, acc, sizeof(double) * static_cast<size_t>(nn));
    }
  }
}

[[gnu::noinline]] void gemm_at_rows(const double* a, const double* b, double* c, i64 r0, i64 r1,
                                    int m, int n, int k) {
  for (i64 mm = r0; mm < r1; ++mm) {
    double* crow = c + mm * n;
    for (int n0 = 0; n0 < n; n0 += kStrip) {
      const int nn = std::min(kStrip, n - n0);
      double acc[kStrip];
      std::memcpy(acc, crow + n0, sizeof(double) * static_cast<size_t>(nn));
      for (int kk = 0; kk < k; ++kk) {
        const double av = a[i64(kk) * m + mm];
        const double* brow = b + i64(kk) * n + n0;
        for (int j = 0; j < nn; ++j) acc[j] += av * brow[j];
      }
      std::memcpy(crow + n0, acc, sizeof(double) * static_cast<size_t>(nn));
    }
  }
}

[[gnu::noinline]] void conv_positions(const double* x, int h, int w, int cin, const double* kmat,
                                      int kh, int kw, int cout, const double* bias, int sh, int sw,
                                      double* y, i64 p0, i64 p1, double* patch) {
  const int wo = same_out(w, sw);
  const int pt = same_pad_before(h, kh, sh), pl = same_pad_before(w, kw, sw);
  const int kdim = kh * kw * cin;
  for (i64 p = p0; p < p1; ++p) {
    const int oh = static_cast<int>(p / wo), ow = static_cast<int>(p % wo);
    double* prow = patch;
    for (int ikh = 0; ikh < kh; ++ikh) {
      const int ih = oh * sh - pt + ikh;
      for (int ikw = 0; ikw < kw; ++ikw, prow += cin) {
        const int iw = ow * sw - pl + ikw;
        if (ih >= 0 && ih < h && iw >= 0 && iw < w)
          std::memcpy(prow, x + (i64(ih) * w + iw) * cin, sizeof(double) * static_cast<size_t>(cin));
        else
          std::memset(prow, 0, sizeof(double) * static_cast<size_t>(cin));
      }
    }
    double* yrow = y + p * cout;
    for (int n0 = 0; n0 < cout; n0 += kStrip) {
      const int nn = std::min(kStrip, cout - n0);
      double acc[kStrip];
      std::memset(acc, 0, sizeof(double) * static_cast<size_t>(nn));
      for (int kk = 0; kk < kdim; ++kk) {
        const double av = patch[kk];
        const double* brow = kmat + i64(kk) * cout + n0;
        for (int j = 0; j < nn; ++j) acc[j] += av * brow[j];
      }
      if (bias)
        for (int j = 0; j < nn; ++j) acc[j] += bias[n0 + j];
      std::memcpy(yrow + n0, acc, sizeof(double) * static_cast<size_t>(nn));
    }
  }
}

[[gnu::noinline]] void conv_grad_input_positions(const double* dy, int h, int w, int cin,
                                                 const double* kflip, int kh, int kw, int cout,
                                                 int sh, int sw, double* dx, i64 p0, i64 p1,
                                                 double* patch) {
  const int ho = same_out(h, sh), wo = same_out(w, sw);
  const int pt = same_pad_before(h, kh, sh), pl = same_pad_before(w, kw, sw);
  const int kdim = kh * kw * cout;
  for (i64 p = p0; p < p1; ++p) {
    const int ih = static_cast<int>(p / w), iw = static_cast<int>(p % w);
    double* prow = patch;
    for (int ikh = 0; ikh < kh; ++ikh) {
      const int hnum = ih + pt - ikh;
      const int oh = hnum / sh;
      const bool hok = hnum >= 0 && hnum % sh == 0 && oh < ho;
      for (int ikw = 0; ikw < kw; ++ikw, prow += cout) {
        const int wnum = iw + pl - ikw;
        const int ow = wnum / sw;
        if (hok && wnum >= 0 && wnum % sw == 0 && ow < wo)
          std::memcpy(prow, dy + (i64(oh) * wo + ow) * cout,
                      sizeof(double) * static_cast<size_t>(cout));
        else
          std::memset(prow, 0, sizeof(double) * static_cast<size_t>(cout));
      }
    }
    double* dxrow = dx + p * cin;
    for (int n0 = 0; n0 < cin; n0 += kStrip) {
      const int nn = std::min(kStrip, cin - n0);
      double acc[kStrip];
      std::memset(acc, 0, sizeof(double) * static_cast<size_t>(nn));
      for (int kk = 0; kk < kdim; ++kk) {
        const double av = patch[kk];
        const double* brow = kflip + i64(kk) * cin + n0;
        for (int j = 0; j < nn; ++j) acc[j] += av * brow[j];
      }
      std::memcpy(dxrow + n0, acc, sizeof(double) * static_cast<size_t>(nn));
    }
  }
}

[[gnu::noinline]] void conv_grad_kernel_rows(const double* x, const double* dy, int h, int w,
                                             int cin, int kh, int kw, int cout, int sh, int sw,
                                             double* dk, i64 r0, i64 r1) {
  const int ho = same_out(h, sh), wo = same_out(w, sw);
  const int pt = same_pad_before(h, kh, sh), pl = same_pad_before(w, kw, sw);
  for (i64 r = r0; r < r1; ++r) {
    const int ikh = static_cast<int>(r / (i64(kw) * cin));
    const int rem = static_cast<int>(r % (i64(kw) * cin));
    const int ikw = rem / cin, ci = rem % cin;
    double* dkrow = dk + r * cout;
    for (int n0 = 0; n0 < cout; n0 += kStrip) {
      const int nn = std::min(kStrip, cout - n0);
      double acc[kStrip];
      std::memcpy(acc, dkrow + n0, sizeof(double) * static_cast<size_t>(nn));
      for (int oh = 0; oh < ho; ++oh) {
        const int ih = oh * sh - pt + ikh;
        if (ih < 0 || ih >= h) continue;
        for (int ow = 0; ow < wo; ++ow) {
          const int iw = ow * sw - pl + ikw;
          if (iw < 0 || iw >= w) continue;
          const double av = x[(i64(ih) * w + iw) * cin + ci];
          const double* brow = dy + (i64(oh) * wo + ow) * cout + n0;
          for (int j = 0; j < nn; ++j) acc[j] += av * brow[j];
        }
      }
      std::memcpy(dkrow + n0, acc, sizeof(double) * static_cast<size_t>(nn));
    }
  }
}

[[gnu::noinline]] void maxpool_rows(const double* x, int h, int w, int c, int ph, int pw,
                                    double* y, i64* argmax, i64 r0, i64 r1) {
  const int wo = w / pw;
  for (i64 r = r0; r < r1; ++r) {
    const int oh = static_cast<int>(r / wo), ow = static_cast<int>(r % wo);
    double* yrow = y + r * c;
    i64* arow = argmax + r * c;
    for (int ch = 0; ch < c; ++ch) {
      double best = -1.0;
      i64 besti = -1;
      bool first = true;
      for (int ih = oh * ph; ih < (oh + 1) * ph; ++ih) {
        for (int iw = ow * pw; iw < (ow + 1) * pw; ++iw) {
          const i64 idx = (i64(ih) * w + iw) * c + ch;
          const double v = x[idx];
          if (first || v > best) {
            best = v;
            besti = idx;
            first = false;
          }
        }
      }
      yrow[ch] = best;
      arow[ch] = besti;
    }
  }
}

}  // namespace

void gemm_accum(const double* a, const double* b, double* c, int m, int n, int k) {
  parallel_range(m, [&](i64 r0, i64 r1) { gemm_rows(a, b, c, r0, r1, n, k); });
}

void gemm_at_accum(const double* a, const double* b, double* c, int m, int n, int k) {
  parallel_range(m, [&](i64 r0, i64 r1) { gemm_at_rows(a, b, c, r0, r1, m, n, k); });
}

void conv2d_same(const double* x, int h, int w, int cin, const double* kmat, int kh, int kw,
                 int cout, const double* bias, int sh, int sw, double* y) {
  const i64 positions = i64(same_out(h, sh)) * same_out(w, sw);
  parallel_range(positions, [&](i64 p0, i64 p1) {
    std::vector<double> patch(static_cast<size_t>(kh) * kw * cin);
    conv_positions(x, h, w, cin, kmat, kh, kw, cout, bias, sh, sw, y, p0, p1, patch.data());
  });
}

void conv2d_same_grad_input(const double* dy, int h, int w, int cin, const double* kflip, int kh,
                            int kw, int cout, int sh, int sw, double* dx) {
  parallel_range(i64(h) * w, [&](i64 p0, i64 p1) {
    std::vector<double> patch(static_cast<size_t>(kh) * kw * cout);
    conv_grad_input_positions(dy, h, w, cin, kflip, kh, kw, cout, sh, sw, dx, p0, p1, patch.data());
  });
}

void conv2d_same_grad_kernel(const double* x, const double* dy, int h, int w, int cin, int kh,
                             int kw, int cout, int sh, int sw, double* dk) {
  parallel_range(i64(kh) * kw * cin, [&](i64 r0, i64 r1) {
    conv_grad_kernel_rows(x, dy, h, w, cin, kh, kw, cout, sh, sw, dk, r0, r1);
  });
}

void maxpool(const double* x, int h, int w, int c, int ph, int pw, double* y, i64* argmax) {
  const i64 cells = i64(h / ph) * (w / pw);
  parallel_range(cells, [&](i64 r0, i64 r1) { maxpool_rows(x, h, w, c, ph, pw, y, argmax, r0, r1); });
}

void maxpool_grad(const double* dy, const i64* argmax, i64 out_count, double* dx) {
  parallel_range(out_count, [&](i64 r0, i64 r1) {
    for (i64 i = r0; i < r1; ++i) dx[argmax[i]] += dy[i];
  });
}

namespace ref {

void gemm_accum(const double* a, const double* b, double* c, int m, int n, int k) {
  for (int mm = 0; mm < m; ++mm)
    for (int nn = 0; nn < n; ++nn) {
      double s = 0.0;
      for (int kk = 0; kk < k; ++kk) s += a[i64(mm) * k + kk] * b[i64(kk) * n + nn];
      c[i64(mm) * n + nn] += s;
    }
}

void conv2d_same(const double* x, int h, int w, int cin, const double* kmat, int kh, int kw,
                 int cout, const double* bias, int sh, int sw, double* y) {
  const int ho = same_out(h, sh), wo = same_out(w, sw);
  const int pt = same_pad_before(h, kh, sh), pl = same_pad_before(w, kw, sw);
  for (int oh = 0; oh < ho; ++oh)
    for (int ow = 0; ow < wo; ++ow)
      for (int co = 0; co < cout; ++co) {
        double s = 0.0;
        for (int ikh = 0; ikh < kh; ++ikh)
          for (int ikw = 0; ikw < kw; ++ikw)
            for (int ci = 0; ci < cin; ++ci) {
              const int ih = oh * sh - pt + ikh, iw = ow * sw - pl + ikw;
              if (ih < 0 || ih >= h || iw < 0 || iw >= w) continue;
              s += x[(i64(ih) * w + iw) * cin + ci] *
                   kmat[(i64(ikh) * kw + ikw) * cin * cout + i64(ci) * cout + co];
            }
        if (bias) s += bias[co];
        y[(i64(oh) * wo + ow) * cout + co] = s;
      }
}

void conv2d_same_grad_input(const double* dy, int h, int w, int cin, const double* kflip, int kh,
                            int kw, int cout, int sh, int sw, double* dx) {
  const int ho = same_out(h, sh), wo = same_out(w, sw);
  const int pt = same_pad_before(h, kh, sh), pl = same_pad_before(w, kw, sw);
  for (int ih = 0; ih < h; ++ih)
    for (int iw = 0; iw < w; ++iw)
      for (int ci = 0; ci < cin; ++ci) {
        double s = 0.0;
        for (int ikh = 0; ikh < kh; ++ikh)
          for (int ikw = 0; ikw < kw; ++ikw)
            for (int co = 0; co < cout; ++co) {
              const int hnum = ih + pt - ikh, wnum = iw + pl - ikw;
              if (hnum < 0 || hnum % sh != 0 || wnum < 0 || wnum % sw != 0) continue;
              const int oh = hnum / sh, ow = wnum / sw;
              if (oh >= ho || ow >= wo) continue;
              s += dy[(i64(oh) * wo + ow) * cout + co] *
                   kflip[(i64(ikh) * kw + ikw) * cout * cin + i64(co) * cin + ci];
            }
        dx[(i64(ih) * w + iw) * cin + ci] = s;
      }
}

void conv2d_same_grad_kernel(const double* x, const double* dy, int h, int w, int cin, int kh,
                             int kw, int cout, int sh, int sw, double* dk) {
  const int ho = same_out(h, sh), wo = same_out(w, sw);
  const int pt = same_pad_before(h, kh, sh), pl = same_pad_before(w, kw, sw);
  for (int oh = 0; oh < ho; ++oh)
    for (int ow = 0; ow < wo; ++ow)
      for (int ikh = 0; ikh < kh; ++ikh)
        for (int ikw = 0; ikw < kw; ++ikw) {
          const int ih = oh * sh - pt + ikh, iw = ow * sw - pl + ikw;
          if (ih < 0 || ih >= h || iw < 0 || iw >= w) continue;
          for (int ci = 0; ci < cin; ++ci) {
            const double xv = x[(i64(ih) * w + iw) * cin + ci];
            for (int co = 0; co < cout; ++co)
              dk[(i64(ikh) * kw + ikw) * cin * cout + i64(ci) * cout + co] +=
                  xv * dy[(i64(oh) * wo + ow) * cout + co];
          }
        }
}

void maxpool(const double* x, int h, int w, int c, int ph, int pw, double* y, i64* argmax) {
  const int ho = h / ph, wo = w / pw;
  for (int oh = 0; oh < ho; ++oh)
    for (int ow = 0; ow < wo; ++ow)
      for (int ch = 0; ch < c; ++ch) {
        i64 besti = (i64(oh) * ph * w + i64(ow) * pw) * c + ch;
        double best = x[besti];
        for (int ih = oh * ph; ih < (oh + 1) * ph; ++ih)
          for (int iw = ow * pw; iw < (ow + 1) * pw; ++iw) {
            const i64 idx = (i64(ih) * w + iw) * c + ch;
            if (x[idx] > best) {
              best = x[idx];
              besti = idx;
            }
          }
        y[(i64(oh) * wo + ow) * c + ch] = best;
        argmax[(i64(oh) * wo + ow) * c + ch] = besti;
      }
}

}  // namespace ref

}  // namespace ser::kernels
