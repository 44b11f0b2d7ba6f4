#pragma once

#include "ser/tensor.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif
#include <algorithm>

namespace ser::kernels {

// Hot loops of the toolkit. Every kernel parallelizes over independent
// output rows/cells; each output element is reduced serially in a fixed
// order, so results are identical for any thread count. The serial
// reference implementations in kernels::ref are naive re-statements of the
// same math, kept for testing and benchmarking.

int max_threads();

/// Splits [0, count) contiguously across the OpenMP team and calls
/// fn(begin, end) once per thread. Work per index must be independent.
template <class F>
void parallel_range(i64 count, F&& fn) {
#ifdef _OPENMP
#pragma omp parallel
  {
    const int nt = omp_get_num_threads();
    const int id = omp_get_thread_num();
    const i64 chunk = (count + nt - 1) / nt;
    const i64 b = std::min<i64>(i64(id) * chunk, count);
    const i64 e = std::min<i64>(b + chunk, count);
    if (b < e) fn(b, e);
  }
#else
  fn(0, count);
#endif
}

/// C[M x N] += A[M x K] * B[K x N], all row-major.
void gemm_accum(const double* a, const double* b, double* c, int m, int n, int k);

/// C[M x N] += A^T[K x M] * B[K x N]  (A stored [K x M]).
void gemm_at_accum(const double* a, const double* b, double* c, int m, int n, int k);

/// 2D correlation with "same"-style padding, NHWC single image.
/// x [H x W x Cin], kmat [kh*kw*Cin x Cout] (kh-major rows), y [Ho x Wo x Cout]
/// Ho = ceil(H/sh), Wo = ceil(W/sw); bias may be null.
void conv2d_same(const double* x, int h, int w, int cin, const double* kmat, int kh, int kw,
                 int cout, const double* bias, int sh, int sw, double* y);

/// Gradient w.r.t. the conv input. kflip [kh*kw*Cout x Cin] holds
/// kmat rearranged as kflip[((kh*KW)+kw)*Cout + co][ci] = kmat[((kh*KW)+kw)*Cin + ci][co].
void conv2d_same_grad_input(const double* dy, int h, int w, int cin, const double* kflip, int kh,
                            int kw, int cout, int sh, int sw, double* dx);

/// Gradient w.r.t. the kernel matrix; accumulates into dk [kh*kw*Cin x Cout].
void conv2d_same_grad_kernel(const double* x, const double* dy, int h, int w, int cin, int kh,
                             int kw, int cout, int sh, int sw, double* dk);

/// Non-overlapping max pooling, NHWC single image; H % ph == 0, W % pw == 0.
/// argmax stores the flat input index of each window maximum (first in
/// row-major scan order on ties).
void maxpool(const double* x, int h, int w, int c, int ph, int pw, double* y, i64* argmax);

/// Routes dy back through saved argmax positions; dx must be zeroed by caller.
void maxpool_grad(const double* dy, const i64* argmax, i64 out_count, double* dx);

/// Paddings used by conv2d_same: total = max(0, (ceil(d/s)-1)*s + k - d).
int same_pad_before(int dim, int k, int s);
int same_out(int dim, int s);

namespace ref {

void gemm_accum(const double* a, const double* b, double* c, int m, int n, int k);

/// Direct quadruple-loop convolution, used as the correctness oracle.
void conv2d_same(const double* x, int h, int w, int cin, const double* kmat, int kh, int kw,
                 int cout, const double* bias, int sh, int sw, double* y);

void conv2d_same_grad_input(const double* dy, int h, int w, int cin, const double* kflip, int kh,
                            int kw, int cout, int sh, int sw, double* dx);

void conv2d_same_grad_kernel(const double* x, const double* dy, int h, int w, int cin, int kh,
                             int kw, int cout, int sh, int sw, double* dk);

void maxpool(const double* x, int h, int w, int c, int ph, int pw, double* y, i64* argmax);

}  // namespace ref

}  // namespace ser::kernels
