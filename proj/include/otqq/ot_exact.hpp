#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "otqq/core.hpp"

namespace otqq {

/// Dense n x m matrix of costs 0.5 * ||u_i - x_j||^2, row-major.
class CostMatrix {
 public:
  CostMatrix(std::size_t rows, std::size_t cols, std::vector<double> entries);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  double operator()(std::size_t i, std::size_t j) const { return entries_[i * cols_ + j]; }
  std::span<const double> row(std::size_t i) const { return {entries_.data() + i * cols_, cols_}; }
  std::span<const double> entries() const noexcept { return entries_; }
  double max_entry() const;

  /// Transposed copy (m x n).
  CostMatrix transposed() const;

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> entries_;
};

CostMatrix cost_matrix(const PointCloud& U, const PointCloud& X);

/// Optimal permutation of a square assignment problem together with the node
/// prices that certify it: row_duals[i] + col_duals[j] <= c(i, j), with
/// equality on every assigned pair.
struct Assignment {
  std::vector<std::size_t> perm;  // reference index i -> target index perm[i]
  double total_cost = 0.0;        // sum_i c(i, perm[i]) under the 0.5*||.||^2 cost
  std::vector<double> row_duals;
  std::vector<double> col_duals;

  /// Total cost under the unhalved squared-distance convention.
  double squared_distance_cost() const { return 2.0 * total_cost; }
};

/// Minimum-cost perfect matching by shortest augmenting paths (O(n^3)).
/// Among tied columns the lowest index is preferred. Throws NonSquare.
Assignment solve_assignment(const CostMatrix& cost);

/// Empirical OT quantile map: reference point i is sent to images.row(i).
struct DiscreteMap {
  PointCloud reference;
  PointCloud images;
  Assignment assignment;
};

DiscreteMap ot_quantile_map(const PointCloud& U, const PointCloud& X);

struct ExactPotentials {
  std::vector<double> phi_at_ref;  // 0.5*||u_i||^2 - alpha_i, shifted so the minimum is 0
  std::vector<double> alpha;
  std::vector<double> beta;
};

/// Empirical OT potential at the reference points from the assignment duals.
/// Verifies dual feasibility (throws InfeasibleDuals on violation > 1e-6,
/// scaled by the largest cost).
ExactPotentials ot_dual_potentials(const PointCloud& U, const PointCloud& X, const Assignment& assignment);

}  // namespace otqq
