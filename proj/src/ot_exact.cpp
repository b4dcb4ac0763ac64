#include "otqq/ot_exact.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "otqq/kernels.hpp"

namespace otqq {

CostMatrix::CostMatrix(std::size_t rows, std::size_t cols, std::vector<double> entries)
    : rows_(rows), cols_(cols), entries_(std::move(entries)) {
  if (entries_.size() != rows_ * cols_) throw InvalidArgument("cost matrix entry count mismatch");
}

double CostMatrix::max_entry() const {
  return entries_.empty() ? 0.0 : *std::max_element(entries_.begin(), entries_.end());
}

CostMatrix CostMatrix::transposed() const {
  std::vector<double> t(entries_.size());
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t[j * rows_ + i] = entries_[i * cols_ + j];
  return CostMatrix(cols_, rows_, std::move(t));
}

CostMatrix cost_matrix(const PointCloud& U, const PointCloud& X) {
  if (U.dim() != X.dim()) throw DimensionMismatch(U.dim(), X.dim());
  const std::size_t n = U.size();
  const std::size_t m = X.size();
  const auto xs = X.column_major();
  const auto& k = kernels::active();
  std::vector<double> entries(n * m);
  for (std::size_t i = 0; i < n; ++i) k.half_sq_dist(U.row(i).data(), xs.data(), m, X.dim(), entries.data() + i * m);
  return CostMatrix(n, m, std::move(entries));
}

Assignment solve_assignment(const CostMatrix& cost) {
  const std::size_t n = cost.rows();
  if (n != cost.cols()) throw NonSquare(cost.rows(), cost.cols());
  if (n == 0) throw InvalidArgument("empty assignment problem");
  for (double c : cost.entries()) {
    if (!std::isfinite(c)) throw InvalidArgument("assignment costs must be finite");
  }

  // Index 0 is a virtual column used as the root of each search; real rows
  // and columns are 1-based inside this routine.
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<std::size_t> match(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);

  for (std::size_t i = 1; i <= n; ++i) {
    match[0] = i;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = match[j0];
      const double ui0 = u[i0];
      const double* crow = cost.row(i0 - 1).data() - 1;
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = crow[j] - ui0 - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  Assignment out;
  out.perm.assign(n, 0);
  for (std::size_t j = 1; j <= n; ++j) out.perm[match[j] - 1] = j - 1;
  out.row_duals.assign(u.begin() + 1, u.end());
  out.col_duals.assign(v.begin() + 1, v.end());
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) total += cost(i, out.perm[i]);
  out.total_cost = total;
  return out;
}

DiscreteMap ot_quantile_map(const PointCloud& U, const PointCloud& X) {
  if (U.size() != X.size()) throw NonSquare(U.size(), X.size());
  Assignment a = solve_assignment(cost_matrix(U, X));
  PointCloud images = X.select(a.perm).with_uniform_weights();
  return {U, std::move(images), std::move(a)};
}

ExactPotentials ot_dual_potentials(const PointCloud& U, const PointCloud& X, const Assignment& assignment) {
  const std::size_t n = U.size();
  if (X.size() != n) throw NonSquare(n, X.size());
  if (assignment.perm.size() != n || assignment.row_duals.size() != n || assignment.col_duals.size() != n)
    throw InvalidArgument("assignment does not match the point clouds");
  const CostMatrix cost = cost_matrix(U, X);
  const double tol = 1e-6 * std::max(1.0, cost.max_entry());
  const auto& alpha = assignment.row_duals;
  const auto& beta = assignment.col_duals;
  for (std::size_t i = 0; i < n; ++i) {
    const double* crow = cost.row(i).data();
    for (std::size_t j = 0; j < n; ++j) {
      if (alpha[i] + beta[j] > crow[j] + tol)
        throw InfeasibleDuals("dual constraint violated at (" + std::to_string(i) + ", " + std::to_string(j) + ")");
    }
    const std::size_t j = assignment.perm[i];
    if (std::abs(alpha[i] + beta[j] - crow[j]) > tol)
      throw InfeasibleDuals("complementary slackness fails on assigned pair " + std::to_string(i));
  }
  ExactPotentials p;
  p.alpha = alpha;
  p.beta = beta;
  p.phi_at_ref.resize(n);
  for (std::size_t i = 0; i < n; ++i) p.phi_at_ref[i] = 0.5 * squared_norm(U.row(i)) - alpha[i];
  const double lowest = *std::min_element(p.phi_at_ref.begin(), p.phi_at_ref.end());
  for (double& v : p.phi_at_ref) v -= lowest;
  return p;
}

}  // namespace otqq
