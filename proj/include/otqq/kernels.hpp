#pragma once

// Data-parallel inner loops shared by the transport solvers.
//
// Every kernel has a portable scalar reference implementation and, on x86-64
// builds, an AVX2/FMA variant. The variant used by the library is chosen once
// at first use: AVX2 when the CPU supports it, scalar otherwise. Setting the
// environment variable OTQQ_SIMD=scalar forces the reference path.
//
// Point sets passed to kernels are column-major ("SoA"): coordinate k of point
// j lives at xs[k * m + j].

#include <cstddef>

namespace otqq::kernels {

struct KernelTable {
  const char* name;

  /// out[j] = 0.5 * ||u - x_j||^2 for j < m.
  void (*half_sq_dist)(const double* u, const double* xs, std::size_t m, std::size_t d, double* out);

  /// log sum_j exp(offset[j] - scale * cost[j]). Returns -inf for an empty
  /// or all -inf input.
  double (*lse_affine)(const double* offset, const double* cost, double scale, std::size_t m);

  /// Same log-sum-exp as lse_affine; also writes the softmax-weighted mean
  /// mean_out[k] = sum_j w_j xs[k*m + j]. `scratch` must hold m doubles.
  double (*softmax_mean)(const double* offset, const double* cost, double scale, const double* xs,
                         std::size_t m, std::size_t d, double* scratch, double* mean_out);

  /// Normalised softmax weights out[j] = exp(v_j - lse) with v_j = offset[j] -
  /// scale * cost[j]; returns lse = log sum_j exp(v_j).
  double (*softmax_weights)(const double* offset, const double* cost, double scale, std::size_t m, double* out);

  /// sum_j a[j] * b[j].
  double (*dot)(const double* a, const double* b, std::size_t m);

  /// y[j] += alpha * x[j].
  void (*axpy)(double alpha, const double* x, double* y, std::size_t m);

  /// Over points with r_j = ||y - x_j|| > min_dist: weighted_sum[k] =
  /// sum_j xs[k*m + j] / r_j and *inv_sum = sum_j 1 / r_j. Returns how many
  /// points were within min_dist of y (excluded from both sums).
  std::size_t (*inverse_distance_sums)(const double* y, const double* xs, std::size_t m, std::size_t d,
                                       double min_dist, double* weighted_sum, double* inv_sum);
};

const KernelTable& scalar();

/// AVX2/FMA table, or nullptr when not compiled in or unsupported by the CPU.
const KernelTable* avx2();

/// Table selected for this process.
const KernelTable& active();

namespace detail {
#if defined(OTQQ_HAVE_AVX2)
const KernelTable& avx2_table();
#endif
}  // namespace detail

}  // namespace otqq::kernels
