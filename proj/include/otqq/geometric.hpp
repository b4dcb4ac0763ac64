#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "otqq/analysis.hpp"
#include "otqq/core.hpp"

namespace otqq {

/// Spatial rank (1/n) sum_i (y - X_i) / ||y - X_i||. Points equal to y
/// contribute the zero vector.
Point geometric_rank(const PointCloud& cloud, std::span<const double> y);

/// Rank of cloud row j among the other n - 1 rows.
Point geometric_rank_loo(const PointCloud& cloud, std::size_t j);

struct GeometricQuantileOptions {
  double tol = 1e-8;
  std::size_t max_iter = 10000;
  /// Distance below which an iterate is treated as sitting on a data point.
  double coincidence = 1e-12;
};

struct GeometricQuantile {
  Point q;
  std::size_t iterations = 0;
  double residual = 0.0;  // ||rank(q) - u||, or 0 at an optimal data point
  bool converged = false;
};

/// Minimiser of sum_i ||X_i - q|| + <u, X_i - q> by Weiszfeld iterations
/// with the Vardi-Zhang correction at data points. Requires ||u|| < 1.
/// Starts from `start` when given, else from the coordinate-wise mean.
GeometricQuantile geometric_quantile(const PointCloud& cloud, std::span<const double> u,
                                     const GeometricQuantileOptions& options = {},
                                     std::optional<Point> start = std::nullopt);

struct GeometricQQ {
  std::vector<PlotSet> sets;  // one per coordinate
  std::size_t unconverged = 0;
};

/// For each Y_j: leave-one-out rank r_j in Y, q_j = quantile of X at r_j,
/// pairs (q_j, Y_j) per coordinate. Ranks longer than 1 - 1/(2 n_X) are
/// shortened to that length.
GeometricQQ geometric_qq(const PointCloud& X, const PointCloud& Y, const GeometricQuantileOptions& options = {});

}  // namespace otqq
