#include "otqq/geometric.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "otqq/kernels.hpp"
#include "otqq/parallel.hpp"

namespace otqq {

namespace {

constexpr std::size_t kSnapEvery = 16;
constexpr double kSnapRadius = 1e-6;

Point rank_sum(const PointCloud& cloud, std::span<const double> y, std::size_t skip) {
  const std::size_t d = cloud.dim();
  Point acc(d, 0.0);
  std::vector<double> diff(d);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if (i == skip) continue;
    const auto x = cloud.row(i);
    double r2 = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
      diff[k] = y[k] - x[k];
      r2 += diff[k] * diff[k];
    }
    if (r2 == 0.0) continue;
    const double inv = 1.0 / std::sqrt(r2);
    for (std::size_t k = 0; k < d; ++k) acc[k] += diff[k] * inv;
  }
  return acc;
}

double distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
  return std::sqrt(s);
}

}  // namespace

Point geometric_rank(const PointCloud& cloud, std::span<const double> y) {
  if (y.size() != cloud.dim()) throw DimensionMismatch(cloud.dim(), y.size());
  Point r = rank_sum(cloud, y, cloud.size());
  for (double& v : r) v /= static_cast<double>(cloud.size());
  return r;
}

Point geometric_rank_loo(const PointCloud& cloud, std::size_t j) {
  if (j >= cloud.size()) throw InvalidArgument("row index out of range");
  if (cloud.size() < 2) throw InsufficientData("leave-one-out rank needs at least two points");
  Point r = rank_sum(cloud, cloud.row(j), j);
  for (double& v : r) v /= static_cast<double>(cloud.size() - 1);
  return r;
}

GeometricQuantile geometric_quantile(const PointCloud& cloud, std::span<const double> u,
                                     const GeometricQuantileOptions& options, std::optional<Point> start) {
  const std::size_t n = cloud.size();
  const std::size_t d = cloud.dim();
  if (u.size() != d) throw DimensionMismatch(d, u.size());
  if (!(squared_norm(u) < 1.0)) throw InvalidArgument("geometric quantile needs ||u|| < 1");
  const auto xs = cloud.column_major();
  const auto& k = kernels::active();
  const double nd = static_cast<double>(n);

  GeometricQuantile out;
  if (start) {
    if (start->size() != d) throw DimensionMismatch(d, start->size());
    out.q = *start;
  } else {
    out.q.assign(d, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t c = 0; c < d; ++c) out.q[c] += cloud(i, c) / nd;
  }

  std::vector<double> wsum(d), next(d);

  // Weiszfeld iterates approach an optimal data point only asymptotically;
  // test the nearest data point directly once the iterate is close to it.
  auto snap_to_data_point = [&](GeometricQuantile& res) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      const double dist = distance(cloud.row(i), res.q);
      if (dist < best_d) {
        best_d = dist;
        best = i;
      }
    }
    if (best_d > kSnapRadius) return false;
    const auto x = cloud.row(best);
    double inv_sum = 0.0;
    const std::size_t hits = k.inverse_distance_sums(x.data(), xs.data(), n, d, options.coincidence, wsum.data(),
                                                     &inv_sum);
    double g2 = 0.0;
    for (std::size_t c = 0; c < d; ++c) {
      const double gc = x[c] * inv_sum - wsum[c] - nd * u[c];
      g2 += gc * gc;
    }
    if (std::sqrt(g2) > static_cast<double>(hits)) return false;
    res.q.assign(x.begin(), x.end());
    res.residual = 0.0;
    res.converged = true;
    return true;
  };

  for (out.iterations = 0; out.iterations < options.max_iter; ++out.iterations) {
    double inv_sum = 0.0;
    const std::size_t hits = k.inverse_distance_sums(out.q.data(), xs.data(), n, d, options.coincidence,
                                                     wsum.data(), &inv_sum);
    // Gradient of the objective over the points not coincident with q:
    // sum_i (q - X_i) / r_i - n u = q * inv_sum - wsum - n u.
    double g2 = 0.0;
    for (std::size_t c = 0; c < d; ++c) {
      const double gc = out.q[c] * inv_sum - wsum[c] - nd * u[c];
      g2 += gc * gc;
    }
    const double gnorm = std::sqrt(g2);
    if (hits == 0) {
      out.residual = gnorm / nd;
      if (out.residual < options.tol) {
        out.converged = true;
        return out;
      }
      for (std::size_t c = 0; c < d; ++c) next[c] = (wsum[c] + nd * u[c]) / inv_sum;
    } else {
      // q sits on `hits` data points; it is optimal when the remaining
      // gradient fits in their subdifferential ball.
      const double mult = static_cast<double>(hits);
      if (gnorm <= mult * (1.0 + options.tol) || inv_sum == 0.0) {
        out.residual = 0.0;
        out.converged = true;
        return out;
      }
      const double shrink = std::min(1.0, mult / gnorm);
      for (std::size_t c = 0; c < d; ++c) {
        const double t = (wsum[c] + nd * u[c]) / inv_sum;
        next[c] = (1.0 - shrink) * t + shrink * out.q[c];
      }
    }
    if (out.iterations % kSnapEvery == kSnapEvery - 1 && snap_to_data_point(out)) return out;
    if (distance(next, out.q) == 0.0) {
      out.converged = out.residual < options.tol;
      return out;
    }
    out.q.swap(next);
  }
  const Point r = geometric_rank(cloud, out.q);
  out.residual = distance(r, u);
  out.converged = out.residual < options.tol;
  return out;
}

GeometricQQ geometric_qq(const PointCloud& X, const PointCloud& Y, const GeometricQuantileOptions& options) {
  if (X.dim() != Y.dim()) throw DimensionMismatch(X.dim(), Y.dim());
  const std::size_t m = Y.size();
  const std::size_t d = Y.dim();
  std::vector<Point> q(m);
  std::vector<unsigned char> ok(m, 0);
  // A rank on the unit sphere (Y_j extreme along a line holding the rest of
  // Y) has no quantile; pull it inside to the level of the extreme of X.
  const double max_norm = 1.0 - 0.5 / static_cast<double>(X.size());
  parallel_for(m, [&](std::size_t j) {
    try {
      Point r = geometric_rank_loo(Y, j);
      const double norm = std::sqrt(squared_norm(r));
      if (norm > max_norm)
        for (double& v : r) v *= max_norm / norm;
      const auto yj = Y.row(j);
      GeometricQuantile g = geometric_quantile(X, r, options, Point(yj.begin(), yj.end()));
      q[j] = std::move(g.q);
      ok[j] = g.converged;
    } catch (const Error& e) {
      throw Error("geometric quantile for point " + std::to_string(j) + ": " + e.what());
    }
  });
  GeometricQQ out;
  out.sets.resize(d);
  for (std::size_t c = 0; c < d; ++c) {
    PlotSet& s = out.sets[c];
    s.component = c;
    s.method = {Method::Geometric, 0.0};
    s.region_tag = "all points";
    s.n_x = X.size();
    s.n_y = m;
    s.n_u = m;
    s.pairs.reserve(m);
    for (std::size_t j = 0; j < m; ++j) s.pairs.push_back({q[j][c], Y(j, c)});
  }
  for (unsigned char v : ok) out.unconverged += v ? 0 : 1;
  return out;
}

}  // namespace otqq
