#include "otqq/eot.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "otqq/errors.hpp"
#include "otqq/kernels.hpp"
#include "otqq/ot_exact.hpp"

namespace otqq {

namespace {

constexpr double kLadderStart = 0.1;
constexpr double kLadderFactor = 0.5;
constexpr double kStageTol = 1e-1;
constexpr double kNewtonSwitch = 1e-1;
constexpr std::size_t kCgMaxIter = 500;
constexpr int kMaxBacktracks = 8;
constexpr std::size_t kFallbackSweeps = 25;

std::vector<double> log_weights(const PointCloud& c) {
  std::vector<double> out(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) out[i] = std::log(c.weights()[i]);
  return out;
}

double l1_gap(const std::vector<double>& x, const std::vector<double>& y) {
  double s = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) s += std::abs(x[j] - y[j]);
  return s;
}

class Solver {
 public:
  Solver(const PointCloud& U, const PointCloud& X)
      : n_(U.size()),
        m_(X.size()),
        C_(cost_matrix(U, X)),
        CT_(C_.transposed()),
        a_(U.weights()),
        b_(X.weights()),
        log_a_(log_weights(U)),
        log_b_(log_weights(X)),
        k_(kernels::active()),
        hf_(n_),
        hg_(m_),
        f_next_(n_) {}

  std::size_t n() const { return n_; }
  std::size_t m() const { return m_; }
  const std::vector<double>& a() const { return a_; }
  const std::vector<double>& b() const { return b_; }

  // g <- exact update from f, then a trial f update stored in f_next().
  // Returns the L1 row-marginal error of the plan (f, g).
  double sweep(const std::vector<double>& f, std::vector<double>& g, double eps) {
    const double inv = 1.0 / eps;
    for (std::size_t i = 0; i < n_; ++i) hf_[i] = f[i] * inv + log_a_[i];
    for (std::size_t j = 0; j < m_; ++j) g[j] = -eps * k_.lse_affine(hf_.data(), CT_.row(j).data(), inv, n_);
    for (std::size_t j = 0; j < m_; ++j) hg_[j] = g[j] * inv + log_b_[j];
    for (std::size_t i = 0; i < n_; ++i) f_next_[i] = -eps * k_.lse_affine(hg_.data(), C_.row(i).data(), inv, m_);
    double err = 0.0;
    for (std::size_t i = 0; i < n_; ++i) err += a_[i] * std::abs(std::exp((f[i] - f_next_[i]) * inv) - 1.0);
    return err;
  }

  std::vector<double>& f_next() { return f_next_; }

  // f <- exact update from g; fills the row-normalised plan and its column
  // sums. Returns the L1 column-marginal error of the plan (f, g).
  double plan_from_g(const std::vector<double>& g, std::vector<double>& f, double eps) {
    const double inv = 1.0 / eps;
    plan_.resize(n_ * m_);
    colsum_.assign(m_, 0.0);
    for (std::size_t j = 0; j < m_; ++j) hg_[j] = g[j] * inv + log_b_[j];
    for (std::size_t i = 0; i < n_; ++i) {
      double* row = plan_.data() + i * m_;
      f[i] = -eps * k_.softmax_weights(hg_.data(), C_.row(i).data(), inv, m_, row);
      k_.axpy(a_[i], row, colsum_.data(), m_);
    }
    return l1_gap(colsum_, b_);
  }

  // Newton direction for the semi-dual in g: solves
  // (diag(colsum) - P^T diag(a) P) delta = eps * (b - colsum)
  // by Jacobi-preconditioned conjugate gradients.
  std::vector<double> newton_direction(double eps, double forcing) {
    std::vector<double> rhs(m_), diag(colsum_);
    for (std::size_t j = 0; j < m_; ++j) rhs[j] = eps * (b_[j] - colsum_[j]);
    for (std::size_t i = 0; i < n_; ++i) {
      const double* row = plan_.data() + i * m_;
      for (std::size_t j = 0; j < m_; ++j) diag[j] -= a_[i] * row[j] * row[j];
    }
    double shift = 0.0;
    for (double v : b_) shift += v;
    shift *= 1e-12 / static_cast<double>(m_);
    for (double& v : diag) v = std::max(v + shift, shift);

    std::vector<double> x(m_, 0.0), r(rhs), z(m_), p(m_), q(m_);
    for (std::size_t j = 0; j < m_; ++j) z[j] = r[j] / diag[j];
    p = z;
    double rz = k_.dot(r.data(), z.data(), m_);
    const double stop = forcing * std::sqrt(k_.dot(rhs.data(), rhs.data(), m_));
    for (std::size_t it = 0; it < kCgMaxIter; ++it) {
      apply(p, q, shift);
      const double pq = k_.dot(p.data(), q.data(), m_);
      if (!(pq > 0.0)) break;
      const double alpha = rz / pq;
      k_.axpy(alpha, p.data(), x.data(), m_);
      k_.axpy(-alpha, q.data(), r.data(), m_);
      if (std::sqrt(k_.dot(r.data(), r.data(), m_)) <= stop) break;
      for (std::size_t j = 0; j < m_; ++j) z[j] = r[j] / diag[j];
      const double rz_next = k_.dot(r.data(), z.data(), m_);
      const double beta = rz_next / rz;
      rz = rz_next;
      for (std::size_t j = 0; j < m_; ++j) p[j] = z[j] + beta * p[j];
    }
    return x;
  }

 private:
  void apply(const std::vector<double>& v, std::vector<double>& out, double shift) const {
    for (std::size_t j = 0; j < m_; ++j) out[j] = (colsum_[j] + shift) * v[j];
    for (std::size_t i = 0; i < n_; ++i) {
      const double* row = plan_.data() + i * m_;
      k_.axpy(-a_[i] * k_.dot(row, v.data(), m_), row, out.data(), m_);
    }
  }

  std::size_t n_, m_;
  CostMatrix C_, CT_;
  const std::vector<double>& a_;
  const std::vector<double>& b_;
  std::vector<double> log_a_, log_b_;
  const kernels::KernelTable& k_;
  std::vector<double> hf_, hg_, f_next_;
  std::vector<double> plan_, colsum_;
};

// Alternating sweeps at one epsilon. Leaves (f, g) with exact columns.
double run_sweeps(Solver& solver, SinkhornState& st, double eps, double tol, std::size_t max_iter) {
  double err = std::numeric_limits<double>::infinity();
  for (;;) {
    err = solver.sweep(st.f, st.g, eps);
    ++st.iterations;
    if (!std::isfinite(err)) throw NumericalOverflow("sinkhorn marginal error is not finite");
    if (err < tol || st.iterations >= max_iter) break;
    st.f.swap(solver.f_next());
  }
  return err;
}

// Newton iterations on g with backtracking on the marginal error. Falls
// back to a batch of sweeps when no step along the direction helps.
double run_newton(Solver& solver, SinkhornState& st, double eps, double tol, std::size_t max_iter) {
  double err = solver.plan_from_g(st.g, st.f, eps);
  std::vector<double> g_trial(st.g.size()), f_trial(st.f.size());
  while (err >= tol && st.iterations < max_iter) {
    if (!std::isfinite(err)) throw NumericalOverflow("sinkhorn marginal error is not finite");
    const std::vector<double> delta = solver.newton_direction(eps, std::min(0.1, std::sqrt(err)));
    ++st.iterations;
    ++st.newton_steps;
    double t = 1.0;
    bool accepted = false;
    for (int bt = 0; bt <= kMaxBacktracks; ++bt, t *= 0.5) {
      for (std::size_t j = 0; j < g_trial.size(); ++j) g_trial[j] = st.g[j] + t * delta[j];
      const double trial = solver.plan_from_g(g_trial, f_trial, eps);
      if (trial < err) {
        st.g.swap(g_trial);
        st.f.swap(f_trial);
        err = trial;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      run_sweeps(solver, st, eps, 0.0, std::min(max_iter, st.iterations + kFallbackSweeps));
      st.f.swap(solver.f_next());
      err = solver.plan_from_g(st.g, st.f, eps);
    }
  }
  return err;
}

}  // namespace

SinkhornState sinkhorn(const PointCloud& U, const PointCloud& X, const SinkhornOptions& options) {
  if (!(options.epsilon > 0.0) || !std::isfinite(options.epsilon)) throw InvalidArgument("epsilon must be positive");
  if (!(options.tol > 0.0)) throw InvalidArgument("sinkhorn tolerance must be positive");
  if (options.max_iter == 0) throw InvalidArgument("sinkhorn max_iter must be positive");
  if (U.dim() != X.dim()) throw DimensionMismatch(U.dim(), X.dim());
  Solver solver(U, X);

  SinkhornState st;
  st.epsilon = options.epsilon;
  st.f.assign(solver.n(), 0.0);
  st.g.assign(solver.m(), 0.0);

  std::vector<double> ladder;
  if (!options.warm_f.empty()) {
    if (options.warm_f.size() != solver.n()) throw DimensionMismatch(solver.n(), options.warm_f.size());
    st.f = options.warm_f;
  } else if (options.epsilon_scaling) {
    for (double e = kLadderStart; e > options.epsilon; e *= kLadderFactor) ladder.push_back(e);
  }
  for (double eps : ladder) {
    run_sweeps(solver, st, eps, std::max(options.tol, kStageTol), options.max_iter);
    if (st.iterations >= options.max_iter) break;
    st.f.swap(solver.f_next());
  }

  const double eps = options.epsilon;
  double err;
  if (options.newton) {
    err = run_sweeps(solver, st, eps, std::max(options.tol, kNewtonSwitch), options.max_iter);
    if (err >= options.tol && st.iterations < options.max_iter) {
      st.f.swap(solver.f_next());
      err = run_newton(solver, st, eps, options.tol, options.max_iter);
    }
  } else {
    err = run_sweeps(solver, st, eps, options.tol, options.max_iter);
  }

  st.marginal_error = err;
  st.converged = err < options.tol;
  double cost = 0.0;
  for (std::size_t i = 0; i < solver.n(); ++i) {
    if (!std::isfinite(st.f[i])) throw NumericalOverflow("non-finite source dual");
    cost += solver.a()[i] * st.f[i];
  }
  for (std::size_t j = 0; j < solver.m(); ++j) {
    if (!std::isfinite(st.g[j])) throw NumericalOverflow("non-finite target dual");
    cost += solver.b()[j] * st.g[j];
  }
  st.reg_cost = cost;
  return st;
}

SinkhornState sinkhorn(const PointCloud& U, const PointCloud& X, double epsilon, double tol, std::size_t max_iter) {
  SinkhornOptions o;
  o.epsilon = epsilon;
  o.tol = tol;
  o.max_iter = max_iter;
  return sinkhorn(U, X, o);
}

EotMap::EotMap(const PointCloud& X, const SinkhornState& state)
    : m_(X.size()), d_(X.dim()), epsilon_(state.epsilon), xs_(X.column_major()), offset_(X.size()) {
  if (state.g.size() != m_) throw DimensionMismatch(m_, state.g.size());
  if (!(epsilon_ > 0.0)) throw InvalidArgument("epsilon must be positive");
  for (std::size_t j = 0; j < m_; ++j) {
    offset_[j] = state.g[j] / epsilon_ + std::log(X.weights()[j]);
    if (std::isnan(offset_[j]) || offset_[j] == std::numeric_limits<double>::infinity())
      throw NumericalOverflow("non-finite target dual");
  }
}

double EotMap::eval(std::span<const double> u, double* image, std::vector<double>& cost,
                    std::vector<double>& scratch) const {
  if (u.size() != d_) throw DimensionMismatch(d_, u.size());
  const auto& k = kernels::active();
  k.half_sq_dist(u.data(), xs_.data(), m_, d_, cost.data());
  const double inv = 1.0 / epsilon_;
  if (image) return k.softmax_mean(offset_.data(), cost.data(), inv, xs_.data(), m_, d_, scratch.data(), image);
  return k.lse_affine(offset_.data(), cost.data(), inv, m_);
}

Point EotMap::operator()(std::span<const double> u) const {
  std::vector<double> cost(m_), scratch(m_);
  Point out(d_);
  eval(u, out.data(), cost, scratch);
  return out;
}

double EotMap::source_dual(std::span<const double> u) const {
  std::vector<double> cost(m_), scratch;
  return -epsilon_ * eval(u, nullptr, cost, scratch);
}

double EotMap::brenier(std::span<const double> u) const { return 0.5 * squared_norm(u) - source_dual(u); }

void EotMap::evaluate(const PointCloud& pts, std::vector<double>* images, std::vector<double>* brenier_values) const {
  if (pts.dim() != d_) throw DimensionMismatch(d_, pts.dim());
  const std::size_t n = pts.size();
  if (images) images->assign(n * d_, 0.0);
  if (brenier_values) brenier_values->assign(n, 0.0);
  std::vector<double> cost(m_), scratch(m_);
  for (std::size_t i = 0; i < n; ++i) {
    const auto u = pts.row(i);
    const double lse = eval(u, images ? images->data() + i * d_ : nullptr, cost, scratch);
    if (brenier_values) (*brenier_values)[i] = 0.5 * squared_norm(u) + epsilon_ * lse;
  }
}

std::size_t EotMap::dominant_target(std::span<const double> u) const {
  if (u.size() != d_) throw DimensionMismatch(d_, u.size());
  std::vector<double> cost(m_);
  kernels::active().half_sq_dist(u.data(), xs_.data(), m_, d_, cost.data());
  std::size_t best = 0;
  double best_v = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < m_; ++j) {
    const double v = offset_[j] - cost[j] / epsilon_;
    if (v > best_v) {
      best_v = v;
      best = j;
    }
  }
  return best;
}

EotPotential::EotPotential(EotMap map, Point u0)
    : map_(std::move(map)), u0_(std::move(u0)), anchor_value_(map_.brenier(u0_)) {}

std::vector<double> EotPotential::evaluate(const PointCloud& pts) const {
  std::vector<double> values;
  map_.evaluate(pts, nullptr, &values);
  for (double& v : values) v -= anchor_value_;
  return values;
}

Point eot_map_at(std::span<const double> u, const SinkhornState& state, const PointCloud& X) {
  return EotMap(X, state)(u);
}

double eot_potential_at(std::span<const double> u, const SinkhornState& state, const PointCloud& X,
                        std::span<const double> u0) {
  const EotMap map(X, state);
  return map.brenier(u) - map.brenier(u0);
}

Point select_u0(const PointCloud& U, const EotMap& map, bool refine) {
  std::vector<double> values;
  map.evaluate(U, nullptr, &values);
  const std::size_t best = static_cast<std::size_t>(std::min_element(values.begin(), values.end()) - values.begin());
  Point u(U.row(best).begin(), U.row(best).end());
  if (!refine) return u;

  // Projected gradient descent on the unit ball; grad brenier = map.
  double h = values[best];
  double step = 1.0;
  for (int it = 0; it < 500 && step > 1e-14; ++it) {
    const Point grad = map(u);
    Point trial(u.size());
    for (std::size_t k = 0; k < u.size(); ++k) trial[k] = u[k] - step * grad[k];
    const double r = std::sqrt(squared_norm(trial));
    if (r > 1.0)
      for (double& t : trial) t /= r;
    const double ht = map.brenier(trial);
    if (ht < h) {
      u = std::move(trial);
      h = ht;
      step *= 1.5;
    } else {
      step *= 0.5;
    }
  }
  return u;
}

Point select_u0(const PointCloud& U, const SinkhornState& state, const PointCloud& X, bool refine) {
  return select_u0(U, EotMap(X, state), refine);
}

}  // namespace otqq
