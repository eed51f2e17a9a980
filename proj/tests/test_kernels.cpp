#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <set>

#include "dcrec/error.hpp"
#include "dcrec/kernels.hpp"
#include "dcrec/linalg.hpp"
#include "dcrec/rng.hpp"

using namespace dcrec;

namespace {

Matrix random(std::size_t r, std::size_t c, std::uint64_t seed) {
  Lcg64 rng(seed);
  Matrix m(r, c);
  for (auto& x : m.flat()) x = rng.normal();
  return m;
}

Matrix naive_matmul(const Matrix& a, const Matrix& b) {
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) {
      long double s = 0;
      for (std::size_t k = 0; k < a.cols(); ++k) s += static_cast<long double>(a(i, k)) * b(k, j);
      c(i, j) = static_cast<double>(s);
    }
  return c;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
  double m = 0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a.flat()[k] - b.flat()[k]));
  return m;
}

}  // namespace

TEST_CASE("Lcg64 trace") {
  Lcg64 rng(0);
  CHECK(rng.next_u64() == Lcg64::kIncrement);
  CHECK(rng.next_u64() == Lcg64::kIncrement * Lcg64::kMultiplier + Lcg64::kIncrement);
  Lcg64 a(99), b(99);
  for (int k = 0; k < 100; ++k) {
    const double u = a.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    CHECK(b.below(7) < 7);
  }
  std::uint64_t coords[] = {1, 2};
  std::uint64_t other[] = {2, 1};
  CHECK(mix_seed(5, coords) == mix_seed(5, coords));
  CHECK(mix_seed(5, coords) != mix_seed(5, other));
  CHECK(fnv1a("") == 14695981039346656037ULL);
  CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cULL);
}

TEST_CASE("Lcg64 normal has unit moments") {
  Lcg64 rng(1);
  double s = 0, s2 = 0;
  const int n = 200000;
  for (int k = 0; k < n; ++k) {
    const double x = rng.normal();
    s += x;
    s2 += x * x;
  }
  CHECK(std::abs(s / n) < 0.01);
  CHECK(std::abs(s2 / n - 1.0) < 0.02);
}

TEST_CASE("matmul variants match the naive product") {
  const Matrix a = random(17, 9, 1), b = random(9, 13, 2);
  const Matrix want = naive_matmul(a, b);
  CHECK(max_abs_diff(kernels::matmul(a, b), want) <= 1e-12);
  CHECK(max_abs_diff(kernels::matmul_tn(a.transposed(), b), want) <= 1e-12);
  CHECK(max_abs_diff(kernels::matmul_nt(a, b.transposed()), want) <= 1e-12);
  CHECK_THROWS_AS(kernels::matmul(a, a), ShapeError);
}

TEST_CASE("parallel kernels are bitwise equal to the serial reference") {
  const Matrix a = random(40, 31, 3), b = random(31, 22, 4);
  CHECK(kernels::matmul(a, b) == kernels::serial::matmul(a, b));
  const Matrix c = random(40, 22, 5);
  CHECK(kernels::matmul_tn(a, c) == kernels::serial::matmul_tn(a, c));
  const Matrix d = random(22, 31, 6);
  CHECK(kernels::matmul_nt(a, d) == kernels::serial::matmul_nt(a, d));

  const Matrix input = random(30, 7, 7);
  const Matrix k = random(5, 3 * 7, 8);
  const std::vector<double> bias = {0.1, -0.2, 0.3, 0.0, 1.0};
  const Matrix out = kernels::conv1d(input, k, bias, 3, 1, 30);
  CHECK(out == kernels::serial::conv1d(input, k, bias, 3, 1, 30));

  const Matrix g = random(30, 5, 9);
  Matrix gk1(5, 21), gk2(5, 21), gi1(30, 7), gi2(30, 7);
  std::vector<double> gb1(5), gb2(5);
  kernels::conv1d_backward_params(input, g, 3, 1, gk1, gb1);
  kernels::serial::conv1d_backward_params(input, g, 3, 1, gk2, gb2);
  CHECK(gk1 == gk2);
  CHECK(gb1 == gb2);
  kernels::conv1d_backward_input(k, g, 3, 1, gi1);
  kernels::serial::conv1d_backward_input(k, g, 3, 1, gi2);
  CHECK(gi1 == gi2);

  const Matrix pts = random(60, 11, 10);
  CHECK(kernels::pairwise_sq_dist(pts) == kernels::serial::pairwise_sq_dist(pts));
}

TEST_CASE("conv1d backward matches finite differences") {
  const Matrix input = random(6, 2, 11);
  Matrix k = random(2, 3 * 2, 12);
  const std::vector<double> bias = {0.5, -0.5};
  const Matrix g = random(6, 2, 13);
  auto loss = [&](const Matrix& in, const Matrix& kk) {
    const Matrix o = kernels::conv1d(in, kk, bias, 3, 1, 6);
    double s = 0;
    for (std::size_t q = 0; q < o.size(); ++q) s += o.flat()[q] * g.flat()[q];
    return s;
  };
  Matrix gk(2, 6), gi(6, 2);
  std::vector<double> gb(2);
  kernels::conv1d_backward_params(input, g, 3, 1, gk, gb);
  kernels::conv1d_backward_input(k, g, 3, 1, gi);
  const double eps = 1e-6;
  for (std::size_t q = 0; q < k.size(); ++q) {
    Matrix kp = k, km = k;
    kp.flat()[q] += eps;
    km.flat()[q] -= eps;
    CHECK(gk.flat()[q] == doctest::Approx((loss(input, kp) - loss(input, km)) / (2 * eps)).epsilon(1e-6));
  }
  for (std::size_t q = 0; q < input.size(); ++q) {
    Matrix ip = input, im = input;
    ip.flat()[q] += eps;
    im.flat()[q] -= eps;
    CHECK(gi.flat()[q] == doctest::Approx((loss(ip, k) - loss(im, k)) / (2 * eps)).epsilon(1e-6));
  }
  double gsum0 = 0;
  for (std::size_t t = 0; t < 6; ++t) gsum0 += g(t, 0);
  CHECK(gb[0] == doctest::Approx(gsum0));
}

TEST_CASE("pairwise_sq_dist") {
  Matrix p(3, 2);
  p(1, 0) = 3;
  p(1, 1) = 4;
  p(2, 0) = 1;
  const Matrix d = kernels::pairwise_sq_dist(p);
  CHECK(d(0, 1) == 25.0);
  CHECK(d(1, 0) == 25.0);
  CHECK(d(1, 2) == 20.0);
  CHECK(d(2, 2) == 0.0);
}

TEST_CASE("thin_q gives orthonormal columns spanning the input") {
  Matrix a = random(20, 5, 14);
  for (std::size_t r = 0; r < 20; ++r) a(r, 4) = a(r, 0) + a(r, 1);  // rank deficient
  const Matrix q = linalg::thin_q(a);
  const Matrix qtq = kernels::matmul_tn(q, q);
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 5; ++j) CHECK(std::abs(qtq(i, j) - (i == j ? 1.0 : 0.0)) <= 1e-12);
  const Matrix proj = kernels::matmul(q, kernels::matmul_tn(q, a));
  CHECK(max_abs_diff(proj, a) <= 1e-12);
}

TEST_CASE("jacobi_svd matches Eigen") {
  const Matrix a = random(30, 8, 15);
  const auto s = linalg::jacobi_svd(a);
  Eigen::MatrixXd e(30, 8);
  for (std::size_t r = 0; r < 30; ++r)
    for (std::size_t c = 0; c < 8; ++c) e(r, c) = a(r, c);
  const Eigen::JacobiSVD<Eigen::MatrixXd> ref(e);
  for (std::size_t k = 0; k < 8; ++k) {
    CHECK(std::abs(s.sigma[k] - ref.singularValues()(static_cast<Eigen::Index>(k))) <= 1e-12);
    if (k) CHECK(s.sigma[k] <= s.sigma[k - 1]);
  }
  Matrix us = s.u;
  for (std::size_t r = 0; r < 30; ++r)
    for (std::size_t k = 0; k < 8; ++k) us(r, k) *= s.sigma[k];
  CHECK(max_abs_diff(kernels::matmul_nt(us, s.v), a) <= 1e-12);
}

TEST_CASE("cholesky_solve") {
  Matrix a(2, 2);
  a(0, 0) = 4;
  a(0, 1) = a(1, 0) = 2;
  a(1, 1) = 3;
  const auto x = linalg::cholesky_solve(a, {2, 1}, 0.0);
  CHECK(x[0] == doctest::Approx(0.5));
  CHECK(x[1] == doctest::Approx(0.0));
  Matrix neg(1, 1, -1.0);
  CHECK_THROWS_AS(linalg::cholesky_solve(neg, {1}, 0.0), NumericError);
  Matrix zero(1, 1, 0.0);
  CHECK(linalg::cholesky_solve(zero, {2}, 0.5)[0] == doctest::Approx(4.0));
}
