#pragma once

#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "otqq/core.hpp"
#include "otqq/rng.hpp"

namespace otqq {

/// Multivariate normal N(mean, covariance).
struct GaussianFull {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
};

/// m + Z * sqrt(r / chi2_r) with Z ~ N(0, sigma).
struct StudentT {
  Eigen::VectorXd location;
  Eigen::MatrixXd sigma;
  double dof;
};

/// Independent Pareto(alpha_k) coordinates supported on [1, inf).
struct ParetoMarginals {
  std::vector<double> alphas;
};

struct NormalMarginal {
  double mean = 0.0;
  double sd = 1.0;
};
struct ParetoMarginal {
  double alpha;
};
struct StudentTMarginal {
  double dof;
};
using Marginal = std::variant<NormalMarginal, ParetoMarginal, StudentTMarginal>;

/// Independent coordinates, each with its own univariate law.
struct IndependentProduct {
  std::vector<Marginal> marginals;
};

/// x -> (1 + |x_1|, ..., 1 + |x_d|) applied to standard normal draws.
struct PushforwardAbsShift {
  std::size_t dim = 3;
};

using GeneratorSpec = std::variant<GaussianFull, StudentT, ParetoMarginals, IndependentProduct, PushforwardAbsShift>;

std::size_t spec_dimension(const GeneratorSpec& spec);

/// Throws BadSpec when the spec violates its invariants.
void validate_spec(const GeneratorSpec& spec);

/// n i.i.d. points uniform on the closed unit ball of R^d.
PointCloud sample_unit_ball(std::size_t n, std::size_t d, SeededRng& rng);

/// n i.i.d. draws from the law described by `spec`.
PointCloud generate(const GeneratorSpec& spec, std::size_t n, SeededRng& rng);

/// Replaces the first outliers.size() rows of `cloud` with the given points.
PointCloud inject_outliers(const PointCloud& cloud, const std::vector<Point>& outliers);

/// Symmetric square root of a positive semidefinite matrix. Throws BadSpec if
/// the matrix is asymmetric or has a clearly negative eigenvalue.
Eigen::MatrixXd symmetric_sqrt(const Eigen::MatrixXd& cov);

/// Sample mean and (n-1) covariance of a cloud.
GaussianFull moment_match(const PointCloud& cloud);

}  // namespace otqq
