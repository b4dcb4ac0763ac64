#include "otqq/analysis.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <sstream>

#include "otqq/parallel.hpp"

namespace otqq {

namespace {

std::string shortest(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

struct Images {
  std::vector<double> coords;  // row-major, one row per reference point
  std::size_t targets;
};

Images images_on(const TransportMap& T, const PointCloud& U) {
  if (const auto* dm = std::get_if<DiscreteMap>(&T)) {
    if (!(dm->reference == U)) throw InvalidArgument("discrete map is defined on a different reference sample");
    const auto c = dm->images.coords();
    return {{c.begin(), c.end()}, dm->images.size()};
  }
  const auto& em = std::get<EotMap>(T);
  Images out{{}, em.target_size()};
  em.evaluate(U, &out.coords, nullptr);
  return out;
}

MethodTag tag_of(const TransportMap& T) {
  if (const auto* em = std::get_if<EotMap>(&T)) return {Method::EOT, em->epsilon()};
  return {Method::OT, 0.0};
}

std::vector<std::size_t> inside(const PointCloud& U, const CompactRegion& K) {
  std::vector<std::size_t> idx;
  for (std::size_t j = 0; j < U.size(); ++j)
    if (K.contains(U.row(j))) idx.push_back(j);
  if (idx.empty()) throw EmptyRestriction();
  return idx;
}

}  // namespace

std::string MethodTag::label() const {
  switch (method) {
    case Method::OT:
      return "OT";
    case Method::EOT:
      return "EOT(eps=" + shortest(epsilon) + ")";
    case Method::Geometric:
      return "Geometric";
  }
  return "";
}

std::string MethodTag::stem() const {
  switch (method) {
    case Method::OT:
      return "ot";
    case Method::EOT:
      return "eot";
    case Method::Geometric:
      return "geom";
  }
  return "";
}

std::string PlotSet::name() const {
  return method.stem() + (component ? "_component_" + std::to_string(*component + 1) : std::string("_potential"));
}

std::vector<PlotSet> build_qq_sets(const TransportMap& TX, const TransportMap& TY, const PointCloud& U,
                                   const CompactRegion& K) {
  if (TX.index() != TY.index()) throw InvalidArgument("Q-Q sets need two maps of the same kind");
  const Images ix = images_on(TX, U);
  const Images iy = images_on(TY, U);
  const auto keep = inside(U, K);
  const std::size_t d = U.dim();
  std::vector<PlotSet> sets(d);
  for (std::size_t k = 0; k < d; ++k) {
    PlotSet& s = sets[k];
    s.component = k;
    s.method = tag_of(TX);
    s.region_tag = K.describe();
    s.n_x = ix.targets;
    s.n_y = iy.targets;
    s.n_u = U.size();
    s.pairs.reserve(keep.size());
    for (std::size_t j : keep) s.pairs.push_back({ix.coords[j * d + k], iy.coords[j * d + k]});
  }
  return sets;
}

PlotSet build_potential_set(std::span<const double> phiX, std::span<const double> phiY, const PointCloud& U,
                            const CompactRegion& K, MethodTag method) {
  if (phiX.size() != U.size()) throw DimensionMismatch(U.size(), phiX.size());
  if (phiY.size() != U.size()) throw DimensionMismatch(U.size(), phiY.size());
  PlotSet s;
  s.method = method;
  s.region_tag = K.describe();
  s.n_u = U.size();
  for (std::size_t j : inside(U, K)) s.pairs.push_back({phiX[j], phiY[j]});
  return s;
}

PlotSet build_potential_set(const EotPotential& phiX, const EotPotential& phiY, const PointCloud& U,
                            const CompactRegion& K) {
  const auto vx = phiX.evaluate(U);
  const auto vy = phiY.evaluate(U);
  PlotSet s = build_potential_set(vx, vy, U, K, {Method::EOT, phiX.map().epsilon()});
  s.n_x = phiX.map().target_size();
  s.n_y = phiY.map().target_size();
  return s;
}

std::vector<double> diagonal_deviations(const PlotSet& set) {
  std::vector<double> out(set.pairs.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::abs(set.pairs[i].x - set.pairs[i].y) / std::sqrt(2.0);
  return out;
}

BandDiagnostic band_fraction(const PlotSet& set, double eta) {
  if (!(eta > 0.0)) throw InvalidArgument("eta must be positive");
  BandDiagnostic b;
  b.eta = eta;
  if (set.pairs.empty()) return b;
  std::size_t in = 0;
  for (double dev : diagonal_deviations(set)) {
    if (dev < eta) ++in;
    b.max_perpendicular_deviation = std::max(b.max_perpendicular_deviation, dev);
  }
  b.fraction_inside = static_cast<double>(in) / static_cast<double>(set.pairs.size());
  return b;
}

SlopeFit fit_slope(const PlotSet& set) {
  const std::size_t n = set.pairs.size();
  if (n < 2) throw DegenerateFit();
  double mx = 0.0, my = 0.0;
  for (const auto& p : set.pairs) {
    mx += p.x;
    my += p.y;
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (const auto& p : set.pairs) {
    sxx += (p.x - mx) * (p.x - mx);
    sxy += (p.x - mx) * (p.y - my);
  }
  if (!(sxx > 0.0)) throw DegenerateFit();
  SlopeFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double sse = 0.0;
  for (const auto& p : set.pairs) {
    const double r = p.y - (f.intercept + f.slope * p.x);
    sse += r * r;
  }
  f.rmse = std::sqrt(sse / static_cast<double>(n));
  return f;
}

double statistic_E(const EotMap& mapX, const EotMap& mapY, const PointCloud& mc, double n) {
  std::vector<double> ix, iy;
  mapX.evaluate(mc, &ix, nullptr);
  mapY.evaluate(mc, &iy, nullptr);
  double s = 0.0;
  for (std::size_t t = 0; t < ix.size(); ++t) s += (ix[t] - iy[t]) * (ix[t] - iy[t]);
  return n * s / static_cast<double>(mc.size());
}

double statistic_F(const EotPotential& potX, const EotPotential& potY, const PointCloud& mc, double n) {
  const auto vx = potX.evaluate(mc);
  const auto vy = potY.evaluate(mc);
  double s = 0.0;
  for (std::size_t t = 0; t < vx.size(); ++t) s += (vx[t] - vy[t]) * (vx[t] - vy[t]);
  return n * s / static_cast<double>(mc.size());
}

Statistics statistics(const EotPotential& potX, const EotPotential& potY, const PointCloud& mc, double n) {
  std::vector<double> ix, iy, bx, by;
  potX.map().evaluate(mc, &ix, &bx);
  potY.map().evaluate(mc, &iy, &by);
  double se = 0.0;
  for (std::size_t t = 0; t < ix.size(); ++t) se += (ix[t] - iy[t]) * (ix[t] - iy[t]);
  double sf = 0.0;
  for (std::size_t t = 0; t < bx.size(); ++t) {
    const double diff = (bx[t] - potX.anchor_value()) - (by[t] - potY.anchor_value());
    sf += diff * diff;
  }
  const double inv = 1.0 / static_cast<double>(mc.size());
  return {n * se * inv, n * sf * inv};
}

double effective_size(std::size_t n_x, std::size_t n_y) {
  return 2.0 * static_cast<double>(n_x) * static_cast<double>(n_y) / static_cast<double>(n_x + n_y);
}

SinkhornOptions sinkhorn_options(const RunConfig& cfg) {
  SinkhornOptions o;
  o.epsilon = cfg.epsilon;
  o.tol = cfg.sinkhorn_tol;
  o.max_iter = cfg.sinkhorn_max_iter;
  return o;
}

EotFit fit_eot(const PointCloud& U, const PointCloud& X, const RunConfig& cfg) {
  SinkhornState st = sinkhorn(U, X, sinkhorn_options(cfg));
  EotMap map(X, st);
  Point u0 = select_u0(U, map);
  return {std::move(st), EotPotential(std::move(map), std::move(u0))};
}

NullDistribution null_distribution(const PointCloud& X, const PointCloud& Y, const PointCloud& U,
                                   const PointCloud& mc, const RunConfig& cfg) {
  cfg.validate();
  if (cfg.resamples < 50) throw InvalidArgument("at least 50 resamples are required");
  if (X.dim() != Y.dim()) throw DimensionMismatch(X.dim(), Y.dim());
  const std::size_t nx = X.size();
  const std::size_t ny = Y.size();
  if (nx < 1 || ny < 1 || nx + ny < 2) throw InsufficientData("pooled sample is too small to split");
  const std::size_t d = X.dim();
  std::vector<double> pool;
  pool.reserve((nx + ny) * d);
  pool.insert(pool.end(), X.coords().begin(), X.coords().end());
  pool.insert(pool.end(), Y.coords().begin(), Y.coords().end());
  const double n_eff = effective_size(nx, ny);

  const std::size_t B = cfg.resamples;
  NullDistribution out;
  out.E.assign(B, 0.0);
  out.F.assign(B, 0.0);
  std::vector<unsigned char> failed(B, 0);
  parallel_for(B, [&](std::size_t b) {
    SeededRng rng(cfg.seed, kNullStreamBase + b);
    std::vector<std::size_t> perm(nx + ny);
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t i = perm.size() - 1; i > 0; --i) std::swap(perm[i], perm[rng.uniform_index(i + 1)]);
    auto piece = [&](std::size_t from, std::size_t count) {
      std::vector<double> c;
      c.reserve(count * d);
      for (std::size_t t = from; t < from + count; ++t)
        c.insert(c.end(), pool.begin() + perm[t] * d, pool.begin() + (perm[t] + 1) * d);
      return PointCloud(count, d, std::move(c));
    };
    const EotFit fx = fit_eot(U, piece(0, nx), cfg);
    const EotFit fy = fit_eot(U, piece(nx, ny), cfg);
    const Statistics s = statistics(fx.potential, fy.potential, mc, n_eff);
    out.E[b] = s.E;
    out.F[b] = s.F;
    failed[b] = !fx.state.converged || !fy.state.converged;
  });
  std::sort(out.E.begin(), out.E.end());
  std::sort(out.F.begin(), out.F.end());
  out.unconverged = static_cast<std::size_t>(std::count(failed.begin(), failed.end(), 1));
  return out;
}

double p_value(double observed, std::span<const double> null) {
  if (null.empty()) throw InvalidArgument("null distribution is empty");
  const auto ge = std::count_if(null.begin(), null.end(), [&](double v) { return v >= observed; });
  return (1.0 + static_cast<double>(ge)) / (static_cast<double>(null.size()) + 1.0);
}

std::string config_fingerprint(const RunConfig& cfg) {
  std::ostringstream os;
  os << "seed=" << cfg.seed << ";epsilon=" << shortest(cfg.epsilon) << ";tol=" << shortest(cfg.sinkhorn_tol)
     << ";max_iter=" << cfg.sinkhorn_max_iter << ";mc=" << cfg.mc_points << ";B=" << cfg.resamples
     << ";eta=" << shortest(cfg.eta);
  return os.str();
}

TestReport run_eot_test(const PointCloud& X, const PointCloud& Y, const PointCloud& U, const PointCloud& mc,
                        const RunConfig& cfg) {
  cfg.validate();
  if (cfg.resamples < 50) throw InvalidArgument("at least 50 resamples are required");
  TestReport r;
  r.n_effective = effective_size(X.size(), Y.size());
  const EotFit fx = fit_eot(U, X, cfg);
  const EotFit fy = fit_eot(U, Y, cfg);
  const Statistics obs = statistics(fx.potential, fy.potential, mc, r.n_effective);
  r.E_n = obs.E;
  r.F_n = obs.F;
  NullDistribution null = null_distribution(X, Y, U, mc, cfg);
  r.p_E = p_value(r.E_n, null.E);
  r.p_F = p_value(r.F_n, null.F);
  r.null_E = std::move(null.E);
  r.null_F = std::move(null.F);
  r.unconverged_solves = null.unconverged + !fx.state.converged + !fy.state.converged;
  r.fingerprint = config_fingerprint(cfg);
  return r;
}

PointCloud subsample(const PointCloud& cloud, std::size_t k, SeededRng& rng) {
  if (k == 0 || k > cloud.size()) throw InvalidArgument("subsample size out of range");
  if (k == cloud.size()) return cloud;
  std::vector<std::size_t> idx(cloud.size());
  std::iota(idx.begin(), idx.end(), 0);
  for (std::size_t i = 0; i < k; ++i) std::swap(idx[i], idx[i + rng.uniform_index(cloud.size() - i)]);
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return cloud.select(idx).with_uniform_weights();
}

}  // namespace otqq
