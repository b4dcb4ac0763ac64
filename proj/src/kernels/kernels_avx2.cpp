// AVX2/FMA variants of the kernels in kernels_scalar.cpp. This translation
// unit is compiled with -mavx2 -mfma and must only be entered after a runtime
// CPU check (see dispatch.cpp).

#include <immintrin.h>

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "otqq/kernels.hpp"

namespace otqq::kernels {

namespace {

struct Lane {
  __m256d v;
};

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

inline double hmax(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_max_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_max_sd(s, _mm_unpackhi_pd(s, s)));
}

// exp(x) with ~1 ulp accuracy on [-708, 709]; 0 below -708, NaN propagates.
// Range reduction x = n ln2 + r with |r| <= ln2/2, degree-12 Taylor polynomial
// for exp(r), then scaling by 2^n through the exponent field.
inline __m256d exp_pd(__m256d x) {
  const __m256d lo = _mm256_set1_pd(-708.0);
  const __m256d hi = _mm256_set1_pd(709.0);
  const __m256d underflow = _mm256_cmp_pd(x, lo, _CMP_LT_OQ);
  x = _mm256_min_pd(hi, x);
  x = _mm256_max_pd(lo, x);

  const __m256d n = _mm256_round_pd(_mm256_mul_pd(x, _mm256_set1_pd(1.4426950408889634)),
                                    _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_fnmadd_pd(n, _mm256_set1_pd(6.93147180369123816490e-01), x);
  r = _mm256_fnmadd_pd(n, _mm256_set1_pd(1.90821492927058770002e-10), r);

  __m256d p = _mm256_set1_pd(1.0 / 479001600.0);
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 39916800.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 3628800.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 362880.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 40320.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 5040.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 720.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 120.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 24.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 6.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(0.5));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0));

  // n + 1023 lands in the low mantissa bits after adding 2^52 + 2^51.
  const __m256d biased = _mm256_add_pd(n, _mm256_set1_pd(1023.0 + 6755399441055744.0));
  const __m256i bits = _mm256_slli_epi64(_mm256_castpd_si256(biased), 52);
  const __m256d result = _mm256_mul_pd(p, _mm256_castsi256_pd(bits));
  return _mm256_andnot_pd(underflow, result);
}

void half_sq_dist(const double* u, const double* xs, std::size_t m, std::size_t d, double* out) {
  const __m256d half = _mm256_set1_pd(0.5);
  std::size_t j = 0;
  for (; j + 4 <= m; j += 4) {
    __m256d acc = _mm256_setzero_pd();
    for (std::size_t k = 0; k < d; ++k) {
      const __m256d diff = _mm256_sub_pd(_mm256_set1_pd(u[k]), _mm256_loadu_pd(xs + k * m + j));
      acc = _mm256_fmadd_pd(diff, diff, acc);
    }
    _mm256_storeu_pd(out + j, _mm256_mul_pd(half, acc));
  }
  for (; j < m; ++j) {
    double acc = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
      const double diff = u[k] - xs[k * m + j];
      acc += diff * diff;
    }
    out[j] = 0.5 * acc;
  }
}

double lse_affine(const double* offset, const double* cost, double scale, std::size_t m) {
  const double ninf = -std::numeric_limits<double>::infinity();
  const __m256d vscale = _mm256_set1_pd(scale);
  __m256d vmax = _mm256_set1_pd(ninf);
  std::size_t j = 0;
  for (; j + 4 <= m; j += 4) {
    const __m256d v = _mm256_fnmadd_pd(vscale, _mm256_loadu_pd(cost + j), _mm256_loadu_pd(offset + j));
    vmax = _mm256_max_pd(vmax, v);
  }
  double mx = hmax(vmax);
  for (std::size_t t = j; t < m; ++t) {
    const double v = offset[t] - scale * cost[t];
    if (v > mx) mx = v;
  }
  if (mx == ninf) return mx;

  const __m256d vmx = _mm256_set1_pd(mx);
  __m256d acc = _mm256_setzero_pd();
  j = 0;
  for (; j + 4 <= m; j += 4) {
    const __m256d v = _mm256_fnmadd_pd(vscale, _mm256_loadu_pd(cost + j), _mm256_loadu_pd(offset + j));
    acc = _mm256_add_pd(acc, exp_pd(_mm256_sub_pd(v, vmx)));
  }
  double s = hsum(acc);
  for (; j < m; ++j) s += std::exp(offset[j] - scale * cost[j] - mx);
  return mx + std::log(s);
}

double softmax_mean(const double* offset, const double* cost, double scale, const double* xs, std::size_t m,
                    std::size_t d, double* scratch, double* mean_out) {
  const double ninf = -std::numeric_limits<double>::infinity();
  const __m256d vscale = _mm256_set1_pd(scale);
  __m256d vmax = _mm256_set1_pd(ninf);
  std::size_t j = 0;
  for (; j + 4 <= m; j += 4) {
    const __m256d v = _mm256_fnmadd_pd(vscale, _mm256_loadu_pd(cost + j), _mm256_loadu_pd(offset + j));
    _mm256_storeu_pd(scratch + j, v);
    vmax = _mm256_max_pd(vmax, v);
  }
  double mx = hmax(vmax);
  for (; j < m; ++j) {
    scratch[j] = offset[j] - scale * cost[j];
    if (scratch[j] > mx) mx = scratch[j];
  }
  for (std::size_t k = 0; k < d; ++k) mean_out[k] = 0.0;
  if (mx == ninf) return mx;

  const __m256d vmx = _mm256_set1_pd(mx);
  __m256d acc = _mm256_setzero_pd();
  j = 0;
  for (; j + 4 <= m; j += 4) {
    const __m256d e = exp_pd(_mm256_sub_pd(_mm256_loadu_pd(scratch + j), vmx));
    _mm256_storeu_pd(scratch + j, e);
    acc = _mm256_add_pd(acc, e);
  }
  double s = hsum(acc);
  for (; j < m; ++j) {
    scratch[j] = std::exp(scratch[j] - mx);
    s += scratch[j];
  }
  for (std::size_t k = 0; k < d; ++k) {
    const double* col = xs + k * m;
    __m256d vk = _mm256_setzero_pd();
    std::size_t t = 0;
    for (; t + 4 <= m; t += 4) vk = _mm256_fmadd_pd(_mm256_loadu_pd(scratch + t), _mm256_loadu_pd(col + t), vk);
    double a = hsum(vk);
    for (; t < m; ++t) a += scratch[t] * col[t];
    mean_out[k] = a / s;
  }
  return mx + std::log(s);
}

double softmax_weights(const double* offset, const double* cost, double scale, std::size_t m, double* out) {
  const double ninf = -std::numeric_limits<double>::infinity();
  const __m256d vscale = _mm256_set1_pd(scale);
  __m256d vmax = _mm256_set1_pd(ninf);
  std::size_t j = 0;
  for (; j + 4 <= m; j += 4) {
    const __m256d v = _mm256_fnmadd_pd(vscale, _mm256_loadu_pd(cost + j), _mm256_loadu_pd(offset + j));
    _mm256_storeu_pd(out + j, v);
    vmax = _mm256_max_pd(vmax, v);
  }
  double mx = hmax(vmax);
  for (; j < m; ++j) {
    out[j] = offset[j] - scale * cost[j];
    if (out[j] > mx) mx = out[j];
  }
  if (mx == ninf) {
    for (j = 0; j < m; ++j) out[j] = 0.0;
    return mx;
  }

  const __m256d vmx = _mm256_set1_pd(mx);
  __m256d acc = _mm256_setzero_pd();
  j = 0;
  for (; j + 4 <= m; j += 4) {
    const __m256d e = exp_pd(_mm256_sub_pd(_mm256_loadu_pd(out + j), vmx));
    _mm256_storeu_pd(out + j, e);
    acc = _mm256_add_pd(acc, e);
  }
  double s = hsum(acc);
  for (; j < m; ++j) {
    out[j] = std::exp(out[j] - mx);
    s += out[j];
  }
  const double inv = 1.0 / s;
  const __m256d vinv = _mm256_set1_pd(inv);
  j = 0;
  for (; j + 4 <= m; j += 4) _mm256_storeu_pd(out + j, _mm256_mul_pd(vinv, _mm256_loadu_pd(out + j)));
  for (; j < m; ++j) out[j] *= inv;
  return mx + std::log(s);
}

double dot(const double* a, const double* b, std::size_t m) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t j = 0;
  for (; j + 8 <= m; j += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + j), _mm256_loadu_pd(b + j), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + j + 4), _mm256_loadu_pd(b + j + 4), acc1);
  }
  for (; j + 4 <= m; j += 4) acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + j), _mm256_loadu_pd(b + j), acc0);
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; j < m; ++j) s += a[j] * b[j];
  return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t m) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t j = 0;
  for (; j + 4 <= m; j += 4)
    _mm256_storeu_pd(y + j, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + j), _mm256_loadu_pd(y + j)));
  for (; j < m; ++j) y[j] += alpha * x[j];
}

std::size_t inverse_distance_sums(const double* y, const double* xs, std::size_t m, std::size_t d,
                                  double min_dist, double* weighted_sum, double* inv_sum) {
  std::vector<Lane> acc(d, Lane{_mm256_setzero_pd()});
  __m256d vinv = _mm256_setzero_pd();
  const __m256d vmin = _mm256_set1_pd(min_dist);
  const __m256d one = _mm256_set1_pd(1.0);
  std::size_t coincident = 0;
  std::size_t j = 0;
  for (; j + 4 <= m; j += 4) {
    __m256d r2 = _mm256_setzero_pd();
    for (std::size_t k = 0; k < d; ++k) {
      const __m256d diff = _mm256_sub_pd(_mm256_set1_pd(y[k]), _mm256_loadu_pd(xs + k * m + j));
      r2 = _mm256_fmadd_pd(diff, diff, r2);
    }
    const __m256d r = _mm256_sqrt_pd(r2);
    const __m256d keep = _mm256_cmp_pd(r, vmin, _CMP_GT_OQ);
    coincident += 4 - static_cast<std::size_t>(__builtin_popcount(static_cast<unsigned>(_mm256_movemask_pd(keep))));
    const __m256d w = _mm256_and_pd(keep, _mm256_div_pd(one, r));
    vinv = _mm256_add_pd(vinv, w);
    for (std::size_t k = 0; k < d; ++k) acc[k].v = _mm256_fmadd_pd(w, _mm256_loadu_pd(xs + k * m + j), acc[k].v);
  }
  double total = hsum(vinv);
  for (std::size_t k = 0; k < d; ++k) weighted_sum[k] = hsum(acc[k].v);
  for (; j < m; ++j) {
    double r2 = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
      const double diff = y[k] - xs[k * m + j];
      r2 += diff * diff;
    }
    const double r = std::sqrt(r2);
    if (!(r > min_dist)) {
      ++coincident;
      continue;
    }
    const double w = 1.0 / r;
    total += w;
    for (std::size_t k = 0; k < d; ++k) weighted_sum[k] += w * xs[k * m + j];
  }
  *inv_sum = total;
  return coincident;
}

constexpr KernelTable kAvx2{
    "avx2", half_sq_dist, lse_affine, softmax_mean, softmax_weights, dot, axpy, inverse_distance_sums,
};

}  // namespace

namespace detail {
const KernelTable& avx2_table() { return kAvx2; }
}  // namespace detail

}  // namespace otqq::kernels
