// Times the OpenMP kernels against the serial reference implementations on
// the shapes this toolkit actually runs (the four LFLB stages and the
// recurrent-layer GEMMs). Build and run: ./bench_kernels [reps]

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <string>
#include <vector>

#include "ser/kernels.hpp"
#include "ser/tensor.hpp"

using namespace ser;
namespace k = ser::kernels;
using clk = std::chrono::steady_clock;

namespace {

double seconds_for(int reps, const std::function<void()>& fn) {
  fn();  // warm
  auto t0 = clk::now();
  for (int r = 0; r < reps; ++r) fn();
  return std::chrono::duration<double>(clk::now() - t0).count() / reps;
}

std::vector<double> filled(i64 n, double v) { return std::vector<double>(static_cast<size_t>(n), v); }

void report(const std::string& name, double flops, double t_ref, double t_omp) {
  std::printf("%-28s ref %8.3f ms %7.2f GF/s | omp %8.3f ms %7.2f GF/s | speedup %.2fx\n",
              name.c_str(), t_ref * 1e3, flops / t_ref / 1e9, t_omp * 1e3, flops / t_omp / 1e9,
              t_ref / t_omp);
}

}  // namespace

int main(int argc, char** argv) {
  const int reps = argc > 1 ? std::atoi(argv[1]) : 3;
  std::printf("threads: %d, reps: %d\n", k::max_threads(), reps);

  struct ConvShape {
    const char* name;
    int h, w, cin, cout;
  };
  const ConvShape shapes[] = {
      {"conv3x3 64x1280x1->64", 64, 1280, 1, 64},
      {"conv3x3 32x640x64->64", 32, 640, 64, 64},
      {"conv3x3 16x320x64->128", 16, 320, 64, 128},
      {"conv3x3 4x80x128->128", 4, 80, 128, 128},
  };
  for (const auto& s : shapes) {
    auto x = filled(i64(s.h) * s.w * s.cin, 0.5);
    auto km = filled(i64(9) * s.cin * s.cout, 0.01);
    auto bias = filled(s.cout, 0.0);
    auto y = filled(i64(s.h) * s.w * s.cout, 0.0);
    const double flops = 2.0 * s.h * s.w * s.cout * 9.0 * s.cin;
    double t_ref = seconds_for(reps, [&] {
      k::ref::conv2d_same(x.data(), s.h, s.w, s.cin, km.data(), 3, 3, s.cout, bias.data(), 1, 1,
                          y.data());
    });
    double t_omp = seconds_for(reps, [&] {
      k::conv2d_same(x.data(), s.h, s.w, s.cin, km.data(), 3, 3, s.cout, bias.data(), 1, 1,
                     y.data());
    });
    report(s.name, flops, t_ref, t_omp);
  }

  {
    const int m = 20480, kk = 576, n = 64;  // LFLB2 as an im2col GEMM
    auto a = filled(i64(m) * kk, 0.5);
    auto b = filled(i64(kk) * n, 0.25);
    auto c = filled(i64(m) * n, 0.0);
    const double flops = 2.0 * m * n * kk;
    double t_ref = seconds_for(reps, [&] { k::ref::gemm_accum(a.data(), b.data(), c.data(), m, n, kk); });
    double t_omp = seconds_for(reps, [&] { k::gemm_accum(a.data(), b.data(), c.data(), m, n, kk); });
    report("gemm 20480x576x64", flops, t_ref, t_omp);
  }
  {
    const int m = 16, kk = 128, n = 512;  // recurrent step, batch 16
    auto a = filled(i64(m) * kk, 0.5);
    auto b = filled(i64(kk) * n, 0.25);
    auto c = filled(i64(m) * n, 0.0);
    const double flops = 2.0 * m * n * kk;
    double t_ref = seconds_for(reps, [&] { k::ref::gemm_accum(a.data(), b.data(), c.data(), m, n, kk); });
    double t_omp = seconds_for(reps, [&] { k::gemm_accum(a.data(), b.data(), c.data(), m, n, kk); });
    report("gemm 16x128x512", flops, t_ref, t_omp);
  }
  return 0;
}
