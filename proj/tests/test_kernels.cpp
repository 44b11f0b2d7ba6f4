#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <vector>

#include "ser/kernels.hpp"
#include "ser/tensor.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

using namespace ser;
namespace k = ser::kernels;

namespace {

std::vector<double> random_vec(i64 n, Rng& rng) {
  std::vector<double> v(static_cast<size_t>(n));
  for (auto& x : v) x = rng.uniform(-1.0, 1.0);
  return v;
}

// kflip[((kh*KW)+kw)*Cout + co][ci] = kmat[((kh*KW)+kw)*Cin + ci][co]
std::vector<double> flip_kernel(const std::vector<double>& kmat, int kh, int kw, int cin, int cout) {
  std::vector<double> kflip(kmat.size());
  for (int t = 0; t < kh * kw; ++t)
    for (int ci = 0; ci < cin; ++ci)
      for (int co = 0; co < cout; ++co)
        kflip[(i64(t) * cout + co) * cin + ci] = kmat[(i64(t) * cin + ci) * cout + co];
  return kflip;
}

}  // namespace

TEST_CASE("gemm matches naive reference exactly") {
  Rng rng(11);
  for (auto [m, n, kk] : {std::tuple{1, 1, 1}, {3, 5, 7}, {17, 64, 33}, {40, 13, 96}}) {
    auto a = random_vec(i64(m) * kk, rng);
    auto b = random_vec(i64(kk) * n, rng);
    auto c1 = random_vec(i64(m) * n, rng);
    auto c2 = c1;
    k::gemm_accum(a.data(), b.data(), c1.data(), m, n, kk);
    k::ref::gemm_accum(a.data(), b.data(), c2.data(), m, n, kk);
    for (size_t i = 0; i < c1.size(); ++i) CHECK(c1[i] == doctest::Approx(c2[i]).epsilon(1e-13));
  }
}

TEST_CASE("gemm_at equals gemm on explicitly transposed input") {
  Rng rng(12);
  const int m = 9, n = 21, kk = 14;
  auto at = random_vec(i64(kk) * m, rng);  // A^T stored [K x M]
  std::vector<double> a(at.size());
  for (int i = 0; i < kk; ++i)
    for (int j = 0; j < m; ++j) a[i64(j) * kk + i] = at[i64(i) * m + j];
  auto b = random_vec(i64(kk) * n, rng);
  std::vector<double> c1(i64(m) * n, 0.0), c2 = c1;
  k::gemm_at_accum(at.data(), b.data(), c1.data(), m, n, kk);
  k::ref::gemm_accum(a.data(), b.data(), c2.data(), m, n, kk);
  for (size_t i = 0; i < c1.size(); ++i) CHECK(c1[i] == doctest::Approx(c2[i]).epsilon(1e-13));
}

TEST_CASE("conv2d_same matches direct reference") {
  Rng rng(13);
  struct Case {
    int h, w, cin, kh, kw, cout, sh, sw;
  };
  for (auto cs : {Case{8, 10, 3, 3, 3, 5, 1, 1}, Case{7, 7, 2, 3, 3, 4, 2, 2},
                  Case{12, 6, 1, 5, 3, 2, 1, 1}, Case{4, 4, 6, 1, 1, 3, 1, 1}}) {
    auto x = random_vec(i64(cs.h) * cs.w * cs.cin, rng);
    auto km = random_vec(i64(cs.kh) * cs.kw * cs.cin * cs.cout, rng);
    auto bias = random_vec(cs.cout, rng);
    const int ho = k::same_out(cs.h, cs.sh), wo = k::same_out(cs.w, cs.sw);
    std::vector<double> y1(i64(ho) * wo * cs.cout), y2 = y1;
    k::conv2d_same(x.data(), cs.h, cs.w, cs.cin, km.data(), cs.kh, cs.kw, cs.cout, bias.data(),
                   cs.sh, cs.sw, y1.data());
    k::ref::conv2d_same(x.data(), cs.h, cs.w, cs.cin, km.data(), cs.kh, cs.kw, cs.cout, bias.data(),
                        cs.sh, cs.sw, y2.data());
    for (size_t i = 0; i < y1.size(); ++i) CHECK(y1[i] == doctest::Approx(y2[i]).epsilon(1e-13));

    // gradients against reference too
    auto dy = random_vec(i64(ho) * wo * cs.cout, rng);
    auto kf = flip_kernel(km, cs.kh, cs.kw, cs.cin, cs.cout);
    std::vector<double> dx1(x.size()), dx2(x.size());
    k::conv2d_same_grad_input(dy.data(), cs.h, cs.w, cs.cin, kf.data(), cs.kh, cs.kw, cs.cout,
                              cs.sh, cs.sw, dx1.data());
    k::ref::conv2d_same_grad_input(dy.data(), cs.h, cs.w, cs.cin, kf.data(), cs.kh, cs.kw, cs.cout,
                                   cs.sh, cs.sw, dx2.data());
    for (size_t i = 0; i < dx1.size(); ++i) CHECK(dx1[i] == doctest::Approx(dx2[i]).epsilon(1e-13));

    std::vector<double> dk1(km.size(), 0.0), dk2(km.size(), 0.0);
    k::conv2d_same_grad_kernel(x.data(), dy.data(), cs.h, cs.w, cs.cin, cs.kh, cs.kw, cs.cout,
                               cs.sh, cs.sw, dk1.data());
    k::ref::conv2d_same_grad_kernel(x.data(), dy.data(), cs.h, cs.w, cs.cin, cs.kh, cs.kw, cs.cout,
                                    cs.sh, cs.sw, dk2.data());
    for (size_t i = 0; i < dk1.size(); ++i) CHECK(dk1[i] == doctest::Approx(dk2[i]).epsilon(1e-13));
  }
}

TEST_CASE("conv2d identity kernel reproduces input") {
  Rng rng(14);
  const int h = 6, w = 9;
  auto x = random_vec(i64(h) * w, rng);
  std::vector<double> km = {1.0};  // 1x1 kernel, value 1, 1 channel
  std::vector<double> y(x.size());
  k::conv2d_same(x.data(), h, w, 1, km.data(), 1, 1, 1, nullptr, 1, 1, y.data());
  for (size_t i = 0; i < x.size(); ++i) CHECK(y[i] == x[i]);
}

TEST_CASE("conv2d all-ones 3x3 on constant input: 9c interior, 4c corners") {
  const int h = 5, w = 7;
  const double cval = 0.37;
  std::vector<double> x(i64(h) * w, cval);
  std::vector<double> km(9, 1.0);
  std::vector<double> y(x.size());
  k::conv2d_same(x.data(), h, w, 1, km.data(), 3, 3, 1, nullptr, 1, 1, y.data());
  CHECK(y[i64(2) * w + 3] == doctest::Approx(9 * cval));
  CHECK(y[0] == doctest::Approx(4 * cval));
  CHECK(y[i64(h - 1) * w + (w - 1)] == doctest::Approx(4 * cval));
  CHECK(y[3] == doctest::Approx(6 * cval));  // top edge
}

TEST_CASE("maxpool matches reference and routes gradient to argmax") {
  Rng rng(15);
  const int h = 8, w = 12, c = 5, ph = 2, pw = 4;
  auto x = random_vec(i64(h) * w * c, rng);
  const i64 outn = i64(h / ph) * (w / pw) * c;
  std::vector<double> y1(outn), y2(outn);
  std::vector<i64> a1(outn), a2(outn);
  k::maxpool(x.data(), h, w, c, ph, pw, y1.data(), a1.data());
  k::ref::maxpool(x.data(), h, w, c, ph, pw, y2.data(), a2.data());
  CHECK(y1 == y2);
  CHECK(a1 == a2);

  auto dy = random_vec(outn, rng);
  std::vector<double> dx(x.size(), 0.0);
  k::maxpool_grad(dy.data(), a1.data(), outn, dx.data());
  double sumdx = 0, sumdy = 0;
  for (double v : dx) sumdx += v;
  for (double v : dy) sumdy += v;
  CHECK(sumdx == doctest::Approx(sumdy));
}

TEST_CASE("maxpool window 2x2 of [[1,2],[3,4]] is 4") {
  std::vector<double> x = {1, 2, 3, 4};
  std::vector<double> y(1);
  std::vector<i64> am(1);
  k::maxpool(x.data(), 2, 2, 1, 2, 2, y.data(), am.data());
  CHECK(y[0] == 4.0);
  CHECK(am[0] == 3);
}

TEST_CASE("maxpool ties break toward first row-major position") {
  std::vector<double> x(16, 2.5);
  std::vector<double> y(4);
  std::vector<i64> am(4);
  k::maxpool(x.data(), 4, 4, 1, 2, 2, y.data(), am.data());
  CHECK(y[0] == 2.5);
  CHECK(am[0] == 0);       // window (0..1, 0..1) -> flat 0
  CHECK(am[1] == 2);       // window (0..1, 2..3) -> flat 2
  CHECK(am[2] == 8);       // window (2..3, 0..1) -> flat 8
}

#ifdef _OPENMP
TEST_CASE("results are identical for any thread count") {
  Rng rng(16);
  const int h = 19, w = 23, cin = 7, cout = 9;
  auto x = random_vec(i64(h) * w * cin, rng);
  auto km = random_vec(i64(3) * 3 * cin * cout, rng);
  auto bias = random_vec(cout, rng);
  std::vector<double> y1(i64(h) * w * cout), y2(i64(h) * w * cout);

  const int saved = omp_get_max_threads();
  omp_set_num_threads(1);
  k::conv2d_same(x.data(), h, w, cin, km.data(), 3, 3, cout, bias.data(), 1, 1, y1.data());
  omp_set_num_threads(saved);
  k::conv2d_same(x.data(), h, w, cin, km.data(), 3, 3, cout, bias.data(), 1, 1, y2.data());
  CHECK(y1 == y2);  // bitwise

  auto a = random_vec(i64(31) * 17, rng);
  auto b = random_vec(i64(17) * 29, rng);
  std::vector<double> c1(i64(31) * 29, 0.0), c2 = c1;
  omp_set_num_threads(1);
  k::gemm_accum(a.data(), b.data(), c1.data(), 31, 29, 17);
  omp_set_num_threads(saved);
  k::gemm_accum(a.data(), b.data(), c2.data(), 31, 29, 17);
  CHECK(c1 == c2);  // bitwise
}
#endif
