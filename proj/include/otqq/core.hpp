#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "otqq/errors.hpp"

namespace otqq {

using Point = std::vector<double>;

/// An ordered list of n points in R^d with optional column names and point
/// weights. Coordinates are stored row-major. Weights default to 1/n.
class PointCloud {
 public:
  PointCloud(std::size_t n, std::size_t d, std::vector<double> coords,
             std::vector<std::string> names = {}, std::vector<double> weights = {});

  static PointCloud from_rows(const std::vector<Point>& rows, std::vector<std::string> names = {});

  std::size_t size() const noexcept { return n_; }
  std::size_t dim() const noexcept { return d_; }

  std::span<const double> row(std::size_t i) const { return {coords_.data() + i * d_, d_}; }
  double operator()(std::size_t i, std::size_t k) const { return coords_[i * d_ + k]; }
  std::span<const double> coords() const noexcept { return coords_; }
  const std::vector<double>& weights() const noexcept { return weights_; }
  const std::vector<std::string>& names() const noexcept { return names_; }
  bool has_uniform_weights() const noexcept { return uniform_; }

  /// Column-major (structure-of-arrays) copy: entry k*n + i is coordinate k of point i.
  std::vector<double> column_major() const;

  /// Rows selected by index, with weights renormalised to sum to one.
  PointCloud select(std::span<const std::size_t> indices) const;

  /// Same points with uniform weights.
  PointCloud with_uniform_weights() const;

  bool operator==(const PointCloud& other) const = default;

 private:
  std::size_t n_;
  std::size_t d_;
  std::vector<double> coords_;
  std::vector<std::string> names_;
  std::vector<double> weights_;
  bool uniform_ = true;
};

/// Closed axis-aligned box or closed origin-centred ball.
class CompactRegion {
 public:
  enum class Kind { Box, Ball };

  static CompactRegion box(std::vector<double> lower, std::vector<double> upper);
  static CompactRegion ball(double radius);

  Kind kind() const noexcept { return kind_; }
  const std::vector<double>& lower() const noexcept { return lower_; }
  const std::vector<double>& upper() const noexcept { return upper_; }
  double radius() const noexcept { return radius_; }

  /// Boundary-inclusive membership.
  bool contains(std::span<const double> p) const;

  std::string describe() const;

 private:
  Kind kind_ = Kind::Ball;
  std::vector<double> lower_;
  std::vector<double> upper_;
  double radius_ = 1.0;
};

enum class StdConvention {
  Sample,      // divide by n - 1
  Population,  // divide by n
};

class StandardizeTransform {
 public:
  StandardizeTransform(std::vector<double> mean, std::vector<double> scale);

  const std::vector<double>& mean() const noexcept { return mean_; }
  const std::vector<double>& scale() const noexcept { return scale_; }

  PointCloud apply(const PointCloud& cloud) const;
  PointCloud invert(const PointCloud& cloud) const;

 private:
  std::vector<double> mean_;
  std::vector<double> scale_;
};

struct Standardized {
  PointCloud cloud;
  StandardizeTransform transform;
};

/// Centres each column and divides by its standard deviation.
/// Throws ConstantColumn when a column cannot be scaled.
Standardized standardize(const PointCloud& cloud, StdConvention convention = StdConvention::Sample);

/// Smallest box containing every point of every cloud, each side widened by
/// inflation * side length (half on each end).
CompactRegion bounding_region(std::span<const PointCloud> clouds, double inflation = 0.0);

struct Restriction {
  PointCloud cloud;
  std::vector<std::size_t> kept;
};

/// Points of `cloud` inside `region`. Throws EmptyRestriction if none are.
Restriction restrict_to(const PointCloud& cloud, const CompactRegion& region);

/// Deterministic run parameters shared by every stage of an experiment.
struct RunConfig {
  std::uint64_t seed = 20240607;
  double epsilon = 1e-2;
  double sinkhorn_tol = 1e-7;
  std::size_t sinkhorn_max_iter = 50000;
  std::size_t mc_points = 4096;
  std::size_t resamples = 200;
  double eta = 0.1;

  void validate() const;
};

double squared_norm(std::span<const double> v);

}  // namespace otqq
