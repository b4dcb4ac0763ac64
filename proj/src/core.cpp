#include "otqq/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace otqq {

namespace {

constexpr double kWeightSumTol = 1e-12;

}  // namespace

double squared_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return s;
}

PointCloud::PointCloud(std::size_t n, std::size_t d, std::vector<double> coords,
                       std::vector<std::string> names, std::vector<double> weights)
    : n_(n), d_(d), coords_(std::move(coords)), names_(std::move(names)), weights_(std::move(weights)) {
  if (n_ == 0 || d_ == 0) throw InvalidArgument("point cloud needs n >= 1 and d >= 1");
  if (coords_.size() != n_ * d_) throw InvalidArgument("coordinate count does not match n*d");
  for (double x : coords_) {
    if (!std::isfinite(x)) throw InvalidArgument("point cloud coordinates must be finite");
  }
  if (!names_.empty() && names_.size() != d_) throw DimensionMismatch(d_, names_.size());
  if (weights_.empty()) {
    weights_.assign(n_, 1.0 / static_cast<double>(n_));
    uniform_ = true;
  } else {
    if (weights_.size() != n_) throw InvalidArgument("weight count does not match n");
    double total = 0.0;
    for (double w : weights_) {
      if (!(w >= 0.0) || !std::isfinite(w)) throw InvalidArgument("weights must be finite and non-negative");
      total += w;
    }
    if (std::abs(total - 1.0) > kWeightSumTol) throw InvalidArgument("weights must sum to 1");
    const double first = weights_.front();
    uniform_ = std::all_of(weights_.begin(), weights_.end(), [&](double w) { return w == first; });
  }
}

PointCloud PointCloud::from_rows(const std::vector<Point>& rows, std::vector<std::string> names) {
  if (rows.empty()) throw InvalidArgument("point cloud needs at least one row");
  const std::size_t d = rows.front().size();
  std::vector<double> coords;
  coords.reserve(rows.size() * d);
  for (const auto& r : rows) {
    if (r.size() != d) throw DimensionMismatch(d, r.size());
    coords.insert(coords.end(), r.begin(), r.end());
  }
  return PointCloud(rows.size(), d, std::move(coords), std::move(names));
}

std::vector<double> PointCloud::column_major() const {
  std::vector<double> out(n_ * d_);
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t k = 0; k < d_; ++k) out[k * n_ + i] = coords_[i * d_ + k];
  return out;
}

PointCloud PointCloud::select(std::span<const std::size_t> indices) const {
  if (indices.empty()) throw EmptyRestriction();
  std::vector<double> coords;
  coords.reserve(indices.size() * d_);
  std::vector<double> w;
  w.reserve(indices.size());
  double total = 0.0;
  for (std::size_t idx : indices) {
    if (idx >= n_) throw InvalidArgument("row index out of range");
    auto r = row(idx);
    coords.insert(coords.end(), r.begin(), r.end());
    w.push_back(weights_[idx]);
    total += weights_[idx];
  }
  if (uniform_ || !(total > 0.0)) return PointCloud(indices.size(), d_, std::move(coords), names_);
  for (double& x : w) x /= total;
  // Renormalisation can leave the sum a few ulps away from one; fold the
  // residual into the largest weight.
  const double resid = 1.0 - std::accumulate(w.begin(), w.end(), 0.0);
  *std::max_element(w.begin(), w.end()) += resid;
  return PointCloud(indices.size(), d_, std::move(coords), names_, std::move(w));
}

PointCloud PointCloud::with_uniform_weights() const {
  return PointCloud(n_, d_, coords_, names_);
}

CompactRegion CompactRegion::box(std::vector<double> lower, std::vector<double> upper) {
  if (lower.size() != upper.size()) throw DimensionMismatch(lower.size(), upper.size());
  if (lower.empty()) throw InvalidArgument("box needs at least one coordinate");
  for (std::size_t k = 0; k < lower.size(); ++k) {
    if (!(lower[k] <= upper[k])) throw InvalidArgument("box lower bound exceeds upper bound");
  }
  CompactRegion r;
  r.kind_ = Kind::Box;
  r.lower_ = std::move(lower);
  r.upper_ = std::move(upper);
  return r;
}

CompactRegion CompactRegion::ball(double radius) {
  if (!(radius > 0.0) || !std::isfinite(radius)) throw InvalidArgument("ball radius must be positive");
  CompactRegion r;
  r.kind_ = Kind::Ball;
  r.radius_ = radius;
  return r;
}

bool CompactRegion::contains(std::span<const double> p) const {
  if (kind_ == Kind::Ball) return squared_norm(p) <= radius_ * radius_;
  if (p.size() != lower_.size()) throw DimensionMismatch(lower_.size(), p.size());
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (p[k] < lower_[k] || p[k] > upper_[k]) return false;
  }
  return true;
}

std::string CompactRegion::describe() const {
  std::ostringstream os;
  os.precision(17);
  if (kind_ == Kind::Ball) {
    os << "ball(r=" << radius_ << ")";
  } else {
    os << "box(";
    for (std::size_t k = 0; k < lower_.size(); ++k) {
      if (k) os << " x ";
      os << "[" << lower_[k] << "," << upper_[k] << "]";
    }
    os << ")";
  }
  return os.str();
}

StandardizeTransform::StandardizeTransform(std::vector<double> mean, std::vector<double> scale)
    : mean_(std::move(mean)), scale_(std::move(scale)) {
  if (mean_.size() != scale_.size()) throw DimensionMismatch(mean_.size(), scale_.size());
  for (double s : scale_) {
    if (!(s > 0.0) || !std::isfinite(s)) throw InvalidArgument("standardization scale must be positive");
  }
}

PointCloud StandardizeTransform::apply(const PointCloud& cloud) const {
  if (cloud.dim() != mean_.size()) throw DimensionMismatch(mean_.size(), cloud.dim());
  std::vector<double> out(cloud.coords().begin(), cloud.coords().end());
  const std::size_t d = cloud.dim();
  for (std::size_t i = 0; i < cloud.size(); ++i)
    for (std::size_t k = 0; k < d; ++k) out[i * d + k] = (out[i * d + k] - mean_[k]) / scale_[k];
  return PointCloud(cloud.size(), d, std::move(out), cloud.names(), cloud.weights());
}

PointCloud StandardizeTransform::invert(const PointCloud& cloud) const {
  if (cloud.dim() != mean_.size()) throw DimensionMismatch(mean_.size(), cloud.dim());
  std::vector<double> out(cloud.coords().begin(), cloud.coords().end());
  const std::size_t d = cloud.dim();
  for (std::size_t i = 0; i < cloud.size(); ++i)
    for (std::size_t k = 0; k < d; ++k) out[i * d + k] = out[i * d + k] * scale_[k] + mean_[k];
  return PointCloud(cloud.size(), d, std::move(out), cloud.names(), cloud.weights());
}

Standardized standardize(const PointCloud& cloud, StdConvention convention) {
  const std::size_t n = cloud.size();
  const std::size_t d = cloud.dim();
  const double denom = convention == StdConvention::Sample ? static_cast<double>(n) - 1.0
                                                           : static_cast<double>(n);
  std::vector<double> mean(d, 0.0);
  std::vector<double> scale(d, 0.0);
  for (std::size_t k = 0; k < d; ++k) {
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i) m += cloud(i, k);
    m /= static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double c = cloud(i, k) - m;
      ss += c * c;
    }
    if (!(denom > 0.0) || !(ss > 0.0)) throw ConstantColumn(k);
    mean[k] = m;
    scale[k] = std::sqrt(ss / denom);
  }
  StandardizeTransform t(std::move(mean), std::move(scale));
  return {t.apply(cloud), std::move(t)};
}

CompactRegion bounding_region(std::span<const PointCloud> clouds, double inflation) {
  if (clouds.empty()) throw InvalidArgument("bounding_region needs at least one cloud");
  if (!(inflation >= 0.0)) throw InvalidArgument("inflation must be non-negative");
  const std::size_t d = clouds.front().dim();
  std::vector<double> lo(d, std::numeric_limits<double>::infinity());
  std::vector<double> hi(d, -std::numeric_limits<double>::infinity());
  for (const auto& c : clouds) {
    if (c.dim() != d) throw DimensionMismatch(d, c.dim());
    for (std::size_t i = 0; i < c.size(); ++i)
      for (std::size_t k = 0; k < d; ++k) {
        lo[k] = std::min(lo[k], c(i, k));
        hi[k] = std::max(hi[k], c(i, k));
      }
  }
  if (inflation > 0.0) {
    for (std::size_t k = 0; k < d; ++k) {
      const double pad = 0.5 * inflation * (hi[k] - lo[k]);
      lo[k] -= pad;
      hi[k] += pad;
    }
  }
  return CompactRegion::box(std::move(lo), std::move(hi));
}

Restriction restrict_to(const PointCloud& cloud, const CompactRegion& region) {
  std::vector<std::size_t> kept;
  kept.reserve(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if (region.contains(cloud.row(i))) kept.push_back(i);
  }
  if (kept.empty()) throw EmptyRestriction();
  if (kept.size() == cloud.size()) return {cloud, std::move(kept)};
  return {cloud.select(kept), std::move(kept)};
}

void RunConfig::validate() const {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw InvalidArgument("epsilon must be positive");
  if (!(sinkhorn_tol > 0.0)) throw InvalidArgument("sinkhorn_tol must be positive");
  if (sinkhorn_max_iter == 0) throw InvalidArgument("sinkhorn_max_iter must be positive");
  if (mc_points == 0) throw InvalidArgument("mc_points must be positive");
  if (resamples == 0) throw InvalidArgument("resamples must be positive");
  if (!(eta > 0.0)) throw InvalidArgument("eta must be positive");
}

}  // namespace otqq
