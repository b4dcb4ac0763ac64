#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "otqq/core.hpp"

namespace otqq {

struct SinkhornOptions {
  double epsilon = 1e-2;
  double tol = 1e-7;
  std::size_t max_iter = 50000;
  /// Solve a decreasing epsilon ladder from 0.1 down to `epsilon`, warm
  /// starting each stage from the previous duals. Ignored when warm_f is set.
  bool epsilon_scaling = true;
  /// Finish with damped Newton steps on the target duals once the sweeps
  /// reach a 0.1 marginal error. When false only alternating sweeps run.
  bool newton = true;
  /// Optional initial source duals (one per reference point).
  std::vector<double> warm_f;
};

/// Converged (or best-effort) entropic dual pair. The implied plan is
/// pi_ij = a_i b_j exp((f_i + g_j - c_ij) / epsilon).
struct SinkhornState {
  std::vector<double> f;  // source duals, one per reference point
  std::vector<double> g;  // target duals, one per target point
  double epsilon = 0.0;
  std::size_t iterations = 0;    // sweeps plus Newton steps
  std::size_t newton_steps = 0;
  double marginal_error = 0.0;  // L1 violation of the marginal not fixed by the last dual update
  double reg_cost = 0.0;        // sum_i a_i f_i + sum_j b_j g_j
  bool converged = false;
};

/// Log-domain Sinkhorn iterations between the weighted clouds U and X.
/// Sizes may differ. A run that hits max_iter returns converged == false.
/// Throws NumericalOverflow if a dual becomes non-finite.
SinkhornState sinkhorn(const PointCloud& U, const PointCloud& X, const SinkhornOptions& options);
SinkhornState sinkhorn(const PointCloud& U, const PointCloud& X, double epsilon, double tol, std::size_t max_iter);

/// Entropic map u -> E[X | U = u] under the optimal entropic coupling,
/// extended to arbitrary u through the target duals.
class EotMap {
 public:
  EotMap(const PointCloud& X, const SinkhornState& state);

  std::size_t dim() const noexcept { return d_; }
  std::size_t target_size() const noexcept { return m_; }
  double epsilon() const noexcept { return epsilon_; }

  /// T(u) = sum_j w_j(u) x_j with w_j(u) proportional to b_j exp((g_j - c(u, x_j)) / epsilon).
  Point operator()(std::span<const double> u) const;

  /// Source dual extended off the reference sample:
  /// phi(u) = -epsilon * log sum_j b_j exp((g_j - c(u, x_j)) / epsilon).
  double source_dual(std::span<const double> u) const;

  /// 0.5*||u||^2 - phi(u); convex, with gradient T(u).
  double brenier(std::span<const double> u) const;

  /// Map images (row-major n x d) and Brenier values at every point of `pts`.
  void evaluate(const PointCloud& pts, std::vector<double>* images, std::vector<double>* brenier_values) const;

  /// Index of the target with the largest conditional weight at u.
  std::size_t dominant_target(std::span<const double> u) const;

 private:
  double eval(std::span<const double> u, double* image, std::vector<double>& cost, std::vector<double>& scratch) const;

  std::size_t m_;
  std::size_t d_;
  double epsilon_;
  std::vector<double> xs_;      // column-major targets
  std::vector<double> offset_;  // g_j / epsilon + log b_j
};

/// Entropic potential anchored at u0: brenier(u) - brenier(u0).
class EotPotential {
 public:
  EotPotential(EotMap map, Point u0);

  double operator()(std::span<const double> u) const { return map_.brenier(u) - anchor_value_; }
  const Point& anchor() const noexcept { return u0_; }
  double anchor_value() const noexcept { return anchor_value_; }
  const EotMap& map() const noexcept { return map_; }

  /// Potential values at every point of `pts`.
  std::vector<double> evaluate(const PointCloud& pts) const;

 private:
  EotMap map_;
  Point u0_;
  double anchor_value_;
};

Point eot_map_at(std::span<const double> u, const SinkhornState& state, const PointCloud& X);
double eot_potential_at(std::span<const double> u, const SinkhornState& state, const PointCloud& X,
                        std::span<const double> u0);

/// Anchor minimising the Brenier potential over the rows of U (the potential is
/// then non-negative on U). With refine, a projected gradient descent on the
/// unit ball continues from the best row while it keeps decreasing.
Point select_u0(const PointCloud& U, const SinkhornState& state, const PointCloud& X, bool refine = false);
Point select_u0(const PointCloud& U, const EotMap& map, bool refine = false);

}  // namespace otqq
