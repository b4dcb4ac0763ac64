#include <cmath>
#include <limits>
#include <vector>

#include "doctest.h"
#include "otqq/kernels.hpp"
#include "otqq/rng.hpp"

using namespace otqq;
using kernels::KernelTable;

namespace {

constexpr double kTol = 1e-12;
const double kNegInf = -std::numeric_limits<double>::infinity();

std::vector<double> normals(std::size_t n, SeededRng& rng, double scale = 1.0) {
  std::vector<double> v(n);
  for (double& x : v) x = scale * rng.normal();
  return v;
}

bool close(double a, double b, double tol = kTol) {
  if (std::isinf(a) || std::isinf(b)) return a == b;
  return std::abs(a - b) <= tol * (1.0 + std::abs(a) + std::abs(b));
}

// Lengths around every vector width and remainder.
const std::size_t kLengths[] = {0, 1, 2, 3, 4, 5, 7, 8, 9, 15, 16, 17, 31, 33, 100, 1001};

const KernelTable* simd() { return kernels::avx2(); }

}  // namespace

TEST_CASE("active table is one of the known tables") {
  const std::string name = kernels::active().name;
  CHECK((name == "scalar" || name == "avx2"));
  CHECK(std::string(kernels::scalar().name) == "scalar");
}

TEST_CASE("scalar reference kernels on small inputs") {
  const KernelTable& s = kernels::scalar();
  const double u[2] = {1.0, 2.0};
  const double xs[6] = {1.0, 4.0, 0.0, 2.0, 6.0, 0.0};  // points (1,2), (4,6), (0,0)
  double out[3];
  s.half_sq_dist(u, xs, 3, 2, out);
  CHECK(out[0] == 0.0);
  CHECK(out[1] == 12.5);
  CHECK(out[2] == 2.5);
  const double off[2] = {0.0, 0.0}, cost[2] = {0.0, 0.0};
  CHECK(close(s.lse_affine(off, cost, 1.0, 2), std::log(2.0)));
  CHECK(s.lse_affine(off, cost, 1.0, 0) == kNegInf);
  const double dead[2] = {kNegInf, kNegInf};
  CHECK(s.lse_affine(dead, cost, 1.0, 2) == kNegInf);
  const double a[3] = {1, 2, 3}, b[3] = {4, 5, 6};
  CHECK(s.dot(a, b, 3) == 32.0);
  double y[3] = {1, 1, 1};
  s.axpy(2.0, a, y, 3);
  CHECK(y[2] == 7.0);
  double ws[2], inv = 0.0;
  CHECK(s.inverse_distance_sums(u, xs, 3, 2, 1e-12, ws, &inv) == 1);
  CHECK(close(inv, 1.0 / 5.0 + 1.0 / std::sqrt(5.0)));
}

TEST_CASE("AVX2 kernels agree with the scalar reference") {
  const KernelTable* v = simd();
  if (v == nullptr) {
    MESSAGE("AVX2 not available; equivalence test skipped");
    return;
  }
  const KernelTable& s = kernels::scalar();
  SeededRng rng(42, 0);
  for (std::size_t m : kLengths) {
    for (std::size_t d : {1, 2, 3, 5}) {
      CAPTURE(m);
      CAPTURE(d);
      const auto xs = normals(m * d, rng, 2.0);
      const auto u = normals(d, rng);
      std::vector<double> o1(m), o2(m);
      s.half_sq_dist(u.data(), xs.data(), m, d, o1.data());
      v->half_sq_dist(u.data(), xs.data(), m, d, o2.data());
      for (std::size_t j = 0; j < m; ++j) REQUIRE(close(o1[j], o2[j]));

      auto off = normals(m, rng, 3.0);
      if (m > 3) off[2] = kNegInf;
      const double scale = 1.0 / (0.01 + rng.uniform());
      CHECK(close(s.lse_affine(off.data(), o1.data(), scale, m), v->lse_affine(off.data(), o1.data(), scale, m)));

      std::vector<double> scratch1(m), scratch2(m), mean1(d), mean2(d);
      const double l1 = s.softmax_mean(off.data(), o1.data(), scale, xs.data(), m, d, scratch1.data(), mean1.data());
      const double l2 = v->softmax_mean(off.data(), o1.data(), scale, xs.data(), m, d, scratch2.data(), mean2.data());
      CHECK(close(l1, l2));
      if (m > 0)
        for (std::size_t k = 0; k < d; ++k) CHECK(close(mean1[k], mean2[k], 1e-11));

      std::vector<double> w1(m), w2(m);
      CHECK(close(s.softmax_weights(off.data(), o1.data(), scale, m, w1.data()),
                  v->softmax_weights(off.data(), o1.data(), scale, m, w2.data())));
      for (std::size_t j = 0; j < m; ++j) REQUIRE(close(w1[j], w2[j]));

      CHECK(close(s.dot(off.data() + (m > 3 ? 3 : 0), o1.data(), m > 3 ? m - 3 : 0),
                  v->dot(off.data() + (m > 3 ? 3 : 0), o1.data(), m > 3 ? m - 3 : 0), 1e-11));

      std::vector<double> y1 = o1, y2 = o1;
      s.axpy(-0.7, xs.data(), y1.data(), m);
      v->axpy(-0.7, xs.data(), y2.data(), m);
      for (std::size_t j = 0; j < m; ++j) REQUIRE(close(y1[j], y2[j]));

      std::vector<double> at = u;
      if (m > 1)
        for (std::size_t k = 0; k < d; ++k) at[k] = xs[k * m + 1];  // coincide with a data point
      std::vector<double> s1(d), s2(d);
      double i1 = 0.0, i2 = 0.0;
      const std::size_t c1 = s.inverse_distance_sums(at.data(), xs.data(), m, d, 1e-12, s1.data(), &i1);
      const std::size_t c2 = v->inverse_distance_sums(at.data(), xs.data(), m, d, 1e-12, s2.data(), &i2);
      CHECK(c1 == c2);
      CHECK(close(i1, i2, 1e-11));
      for (std::size_t k = 0; k < d; ++k) CHECK(close(s1[k], s2[k], 1e-11));
    }
  }
}

TEST_CASE("AVX2 log-sum-exp handles all -inf and extreme ranges") {
  const KernelTable* v = simd();
  if (v == nullptr) return;
  const KernelTable& s = kernels::scalar();
  for (std::size_t m : kLengths) {
    std::vector<double> off(m, kNegInf), cost(m, 1.0);
    CHECK(v->lse_affine(off.data(), cost.data(), 1.0, m) == kNegInf);
    for (std::size_t j = 0; j < m; ++j) off[j] = 700.0 + j;  // exp overflows without the shift
    CHECK(close(s.lse_affine(off.data(), cost.data(), 1e4, m), v->lse_affine(off.data(), cost.data(), 1e4, m)));
    if (m > 0) CHECK(std::isfinite(v->lse_affine(off.data(), cost.data(), 1e4, m)));
  }
}
