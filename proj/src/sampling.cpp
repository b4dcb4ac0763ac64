#include "otqq/sampling.hpp"

#include <cmath>

namespace otqq {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

// Symmetry and eigenvalue floor, relative to the largest entry.
constexpr double kSymTol = 1e-12;
constexpr double kEigenFloor = 1e-10;

double draw_marginal(const Marginal& m, SeededRng& rng) {
  return std::visit(overloaded{
                        [&](const NormalMarginal& g) { return g.mean + g.sd * rng.normal(); },
                        [&](const ParetoMarginal& p) { return std::pow(1.0 - rng.uniform(), -1.0 / p.alpha); },
                        [&](const StudentTMarginal& t) {
                          const double z = rng.normal();
                          return z * std::sqrt(t.dof / rng.chi_square(t.dof));
                        },
                    },
                    m);
}

}  // namespace

Eigen::MatrixXd symmetric_sqrt(const Eigen::MatrixXd& cov) {
  if (cov.rows() != cov.cols() || cov.rows() == 0) throw BadSpec("covariance must be a non-empty square matrix");
  if (!cov.allFinite()) throw BadSpec("covariance has non-finite entries");
  const double scale = std::max(1.0, cov.cwiseAbs().maxCoeff());
  if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > kSymTol * scale) throw BadSpec("covariance is not symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (cov + cov.transpose()));
  if (es.info() != Eigen::Success) throw BadSpec("eigendecomposition of covariance failed");
  Eigen::VectorXd ev = es.eigenvalues();
  for (Eigen::Index k = 0; k < ev.size(); ++k) {
    if (ev[k] < -kEigenFloor * scale) throw BadSpec("covariance has a negative eigenvalue");
    ev[k] = std::sqrt(std::max(0.0, ev[k]));
  }
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

std::size_t spec_dimension(const GeneratorSpec& spec) {
  return std::visit(overloaded{
                        [](const GaussianFull& g) { return static_cast<std::size_t>(g.mean.size()); },
                        [](const StudentT& t) { return static_cast<std::size_t>(t.location.size()); },
                        [](const ParetoMarginals& p) { return p.alphas.size(); },
                        [](const IndependentProduct& p) { return p.marginals.size(); },
                        [](const PushforwardAbsShift& f) { return f.dim; },
                    },
                    spec);
}

void validate_spec(const GeneratorSpec& spec) {
  if (spec_dimension(spec) == 0) throw BadSpec("generator dimension must be positive");
  std::visit(overloaded{
                 [](const GaussianFull& g) {
                   if (g.covariance.rows() != g.mean.size()) throw BadSpec("mean/covariance size mismatch");
                   symmetric_sqrt(g.covariance);
                 },
                 [](const StudentT& t) {
                   if (t.sigma.rows() != t.location.size()) throw BadSpec("location/sigma size mismatch");
                   if (!(t.dof > 0.0)) throw BadSpec("degrees of freedom must be positive");
                   symmetric_sqrt(t.sigma);
                 },
                 [](const ParetoMarginals& p) {
                   for (double a : p.alphas)
                     if (!(a > 0.0)) throw BadSpec("Pareto shape must be positive");
                 },
                 [](const IndependentProduct& p) {
                   for (const auto& m : p.marginals) {
                     std::visit(overloaded{
                                    [](const NormalMarginal& g) {
                                      if (!(g.sd > 0.0)) throw BadSpec("normal sd must be positive");
                                    },
                                    [](const ParetoMarginal& q) {
                                      if (!(q.alpha > 0.0)) throw BadSpec("Pareto shape must be positive");
                                    },
                                    [](const StudentTMarginal& t) {
                                      if (!(t.dof > 0.0)) throw BadSpec("degrees of freedom must be positive");
                                    },
                                },
                                m);
                   }
                 },
                 [](const PushforwardAbsShift&) {},
             },
             spec);
}

PointCloud sample_unit_ball(std::size_t n, std::size_t d, SeededRng& rng) {
  if (n == 0 || d == 0) throw InvalidArgument("sample_unit_ball needs n >= 1 and d >= 1");
  std::vector<double> coords(n * d);
  std::vector<double> dir(d);
  const double inv_d = 1.0 / static_cast<double>(d);
  for (std::size_t i = 0; i < n; ++i) {
    double norm2;
    do {
      norm2 = 0.0;
      for (auto& z : dir) {
        z = rng.normal();
        norm2 += z * z;
      }
    } while (norm2 == 0.0);
    const double radius = std::pow(rng.uniform(), inv_d);
    const double s = radius / std::sqrt(norm2);
    double* out = coords.data() + i * d;
    double out2 = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
      out[k] = dir[k] * s;
      out2 += out[k] * out[k];
    }
    // Rounding can push a point with radius ~1 just outside the ball.
    while (out2 > 1.0) {
      out2 = 0.0;
      for (std::size_t k = 0; k < d; ++k) {
        out[k] *= 1.0 - 0x1.0p-52;
        out2 += out[k] * out[k];
      }
    }
  }
  return PointCloud(n, d, std::move(coords));
}

PointCloud generate(const GeneratorSpec& spec, std::size_t n, SeededRng& rng) {
  validate_spec(spec);
  if (n == 0) throw InvalidArgument("generate needs n >= 1");
  const std::size_t d = spec_dimension(spec);
  std::vector<double> coords(n * d);
  std::visit(overloaded{
                 [&](const GaussianFull& g) {
                   const Eigen::MatrixXd root = symmetric_sqrt(g.covariance);
                   Eigen::VectorXd z(d);
                   for (std::size_t i = 0; i < n; ++i) {
                     for (std::size_t k = 0; k < d; ++k) z[k] = rng.normal();
                     const Eigen::VectorXd x = g.mean + root * z;
                     for (std::size_t k = 0; k < d; ++k) coords[i * d + k] = x[k];
                   }
                 },
                 [&](const StudentT& t) {
                   const Eigen::MatrixXd root = symmetric_sqrt(t.sigma);
                   Eigen::VectorXd z(d);
                   for (std::size_t i = 0; i < n; ++i) {
                     for (std::size_t k = 0; k < d; ++k) z[k] = rng.normal();
                     const double w = std::sqrt(t.dof / rng.chi_square(t.dof));
                     const Eigen::VectorXd x = t.location + w * (root * z);
                     for (std::size_t k = 0; k < d; ++k) coords[i * d + k] = x[k];
                   }
                 },
                 [&](const ParetoMarginals& p) {
                   for (std::size_t i = 0; i < n; ++i)
                     for (std::size_t k = 0; k < d; ++k)
                       coords[i * d + k] = std::pow(1.0 - rng.uniform(), -1.0 / p.alphas[k]);
                 },
                 [&](const IndependentProduct& p) {
                   for (std::size_t i = 0; i < n; ++i)
                     for (std::size_t k = 0; k < d; ++k) coords[i * d + k] = draw_marginal(p.marginals[k], rng);
                 },
                 [&](const PushforwardAbsShift&) {
                   for (std::size_t i = 0; i < n * d; ++i) coords[i] = 1.0 + std::abs(rng.normal());
                 },
             },
             spec);
  return PointCloud(n, d, std::move(coords));
}

PointCloud inject_outliers(const PointCloud& cloud, const std::vector<Point>& outliers) {
  if (outliers.size() > cloud.size()) throw InvalidArgument("more outliers than points");
  const std::size_t d = cloud.dim();
  std::vector<double> coords(cloud.coords().begin(), cloud.coords().end());
  for (std::size_t r = 0; r < outliers.size(); ++r) {
    if (outliers[r].size() != d) throw DimensionMismatch(d, outliers[r].size());
    std::copy(outliers[r].begin(), outliers[r].end(), coords.begin() + static_cast<std::ptrdiff_t>(r * d));
  }
  return PointCloud(cloud.size(), d, std::move(coords), cloud.names(), cloud.weights());
}

GaussianFull moment_match(const PointCloud& cloud) {
  const std::size_t n = cloud.size();
  const std::size_t d = cloud.dim();
  if (n < 2) throw InsufficientData("moment matching needs at least two points");
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> m(
      cloud.coords().data(), static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  Eigen::VectorXd mean = m.colwise().mean().transpose();
  Eigen::MatrixXd centred = m.rowwise() - mean.transpose();
  Eigen::MatrixXd cov = (centred.transpose() * centred) / static_cast<double>(n - 1);
  cov = 0.5 * (cov + cov.transpose());
  return {std::move(mean), std::move(cov)};
}

}  // namespace otqq
