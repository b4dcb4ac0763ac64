#include <cmath>
#include <limits>
#include <vector>

#include "otqq/kernels.hpp"

namespace otqq::kernels {

namespace {

void half_sq_dist(const double* u, const double* xs, std::size_t m, std::size_t d, double* out) {
  for (std::size_t j = 0; j < m; ++j) out[j] = 0.0;
  for (std::size_t k = 0; k < d; ++k) {
    const double* col = xs + k * m;
    const double uk = u[k];
    for (std::size_t j = 0; j < m; ++j) {
      const double diff = uk - col[j];
      out[j] += diff * diff;
    }
  }
  for (std::size_t j = 0; j < m; ++j) out[j] *= 0.5;
}

double lse_affine(const double* offset, const double* cost, double scale, std::size_t m) {
  double mx = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < m; ++j) {
    const double v = offset[j] - scale * cost[j];
    if (v > mx) mx = v;
  }
  if (mx == -std::numeric_limits<double>::infinity()) return mx;
  double s = 0.0;
  for (std::size_t j = 0; j < m; ++j) s += std::exp(offset[j] - scale * cost[j] - mx);
  return mx + std::log(s);
}

double softmax_mean(const double* offset, const double* cost, double scale, const double* xs, std::size_t m,
                    std::size_t d, double* scratch, double* mean_out) {
  double mx = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < m; ++j) {
    scratch[j] = offset[j] - scale * cost[j];
    if (scratch[j] > mx) mx = scratch[j];
  }
  for (std::size_t k = 0; k < d; ++k) mean_out[k] = 0.0;
  if (mx == -std::numeric_limits<double>::infinity()) return mx;
  double s = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    scratch[j] = std::exp(scratch[j] - mx);
    s += scratch[j];
  }
  for (std::size_t k = 0; k < d; ++k) {
    const double* col = xs + k * m;
    double acc = 0.0;
    for (std::size_t j = 0; j < m; ++j) acc += scratch[j] * col[j];
    mean_out[k] = acc / s;
  }
  return mx + std::log(s);
}

double softmax_weights(const double* offset, const double* cost, double scale, std::size_t m, double* out) {
  double mx = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < m; ++j) {
    out[j] = offset[j] - scale * cost[j];
    if (out[j] > mx) mx = out[j];
  }
  if (mx == -std::numeric_limits<double>::infinity()) {
    for (std::size_t j = 0; j < m; ++j) out[j] = 0.0;
    return mx;
  }
  double s = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    out[j] = std::exp(out[j] - mx);
    s += out[j];
  }
  const double inv = 1.0 / s;
  for (std::size_t j = 0; j < m; ++j) out[j] *= inv;
  return mx + std::log(s);
}

double dot(const double* a, const double* b, std::size_t m) {
  double s = 0.0;
  for (std::size_t j = 0; j < m; ++j) s += a[j] * b[j];
  return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t m) {
  for (std::size_t j = 0; j < m; ++j) y[j] += alpha * x[j];
}

std::size_t inverse_distance_sums(const double* y, const double* xs, std::size_t m, std::size_t d,
                                  double min_dist, double* weighted_sum, double* inv_sum) {
  for (std::size_t k = 0; k < d; ++k) weighted_sum[k] = 0.0;
  double total = 0.0;
  std::size_t coincident = 0;
  for (std::size_t j = 0; j < m; ++j) {
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

constexpr KernelTable kScalar{
    "scalar", half_sq_dist, lse_affine, softmax_mean, softmax_weights, dot, axpy, inverse_distance_sums,
};

}  // namespace

const KernelTable& scalar() { return kScalar; }

}  // namespace otqq::kernels
