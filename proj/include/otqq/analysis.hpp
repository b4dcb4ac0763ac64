#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "otqq/core.hpp"
#include "otqq/eot.hpp"
#include "otqq/ot_exact.hpp"
#include "otqq/rng.hpp"

namespace otqq {

enum class Method { OT, EOT, Geometric };

struct MethodTag {
  Method method = Method::OT;
  double epsilon = 0.0;  // EOT only

  /// "OT", "EOT(eps=0.01)" or "Geometric".
  std::string label() const;
  /// Lower-case file-name stem: "ot", "eot", "geom".
  std::string stem() const;
};

struct PlotPair {
  double x;
  double y;
};

/// Points of one Q-Q panel (component set) or of a potential plot.
struct PlotSet {
  std::vector<PlotPair> pairs;
  std::optional<std::size_t> component;  // empty for potential plots
  MethodTag method;
  std::string region_tag;
  std::size_t n_x = 0;
  std::size_t n_y = 0;
  std::size_t n_u = 0;

  /// Stable identifier such as "ot_component_2" or "eot_potential".
  std::string name() const;
};

using TransportMap = std::variant<DiscreteMap, EotMap>;

/// One set per coordinate: (TX(u)_i, TY(u)_i) over the reference points u in K.
/// Discrete maps must be defined on exactly the points of U.
std::vector<PlotSet> build_qq_sets(const TransportMap& TX, const TransportMap& TY, const PointCloud& U,
                                   const CompactRegion& K);

/// Pairs (phiX(u_j), phiY(u_j)) over the reference points in K. The
/// potential vectors hold values at every row of U.
PlotSet build_potential_set(std::span<const double> phiX, std::span<const double> phiY, const PointCloud& U,
                            const CompactRegion& K, MethodTag method);
PlotSet build_potential_set(const EotPotential& phiX, const EotPotential& phiY, const PointCloud& U,
                            const CompactRegion& K);

struct BandDiagnostic {
  double eta = 0.0;
  double fraction_inside = 0.0;
  double max_perpendicular_deviation = 0.0;
};

/// Share of pairs whose distance |x - y| / sqrt(2) to the diagonal is below eta.
BandDiagnostic band_fraction(const PlotSet& set, double eta);

/// Distance of every pair to the diagonal, in pair order.
std::vector<double> diagonal_deviations(const PlotSet& set);

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double rmse = 0.0;
};

/// Ordinary least squares of y on x. Throws DegenerateFit if all x are equal.
SlopeFit fit_slope(const PlotSet& set);

/// n times the mean over mc of ||TX(u) - TY(u)||^2.
double statistic_E(const EotMap& mapX, const EotMap& mapY, const PointCloud& mc, double n);
/// n times the mean over mc of (phiX(u) - phiY(u))^2.
double statistic_F(const EotPotential& potX, const EotPotential& potY, const PointCloud& mc, double n);

struct Statistics {
  double E = 0.0;
  double F = 0.0;
};

/// Both statistics from a single pass over mc.
Statistics statistics(const EotPotential& potX, const EotPotential& potY, const PointCloud& mc, double n);

/// Harmonic-type sample size 2 n_X n_Y / (n_X + n_Y); equals n when both are n.
double effective_size(std::size_t n_x, std::size_t n_y);

struct NullDistribution {
  std::vector<double> E;  // sorted ascending
  std::vector<double> F;  // sorted ascending
  std::size_t unconverged = 0;
};

/// First stream id used for resampling replicates; replicate b uses stream
/// kNullStreamBase + b of the run seed.
inline constexpr std::uint64_t kNullStreamBase = 1000;

/// Permutation null: the pooled sample is shuffled and split into pieces of
/// the original sizes, and both statistics are recomputed against the same U
/// and mc. Replicates run on thread_count() workers; results do not depend
/// on the worker count. Throws InvalidArgument when B < 50 and
/// InsufficientData when either piece would be empty.
NullDistribution null_distribution(const PointCloud& X, const PointCloud& Y, const PointCloud& U,
                                   const PointCloud& mc, const RunConfig& cfg);

/// (1 + #{null >= observed}) / (B + 1).
double p_value(double observed, std::span<const double> null);

struct TestReport {
  double E_n = 0.0;
  double F_n = 0.0;
  std::vector<double> null_E;
  std::vector<double> null_F;
  double p_E = 1.0;
  double p_F = 1.0;
  double n_effective = 0.0;
  std::size_t unconverged_solves = 0;
  std::string fingerprint;
};

std::string config_fingerprint(const RunConfig& cfg);

SinkhornOptions sinkhorn_options(const RunConfig& cfg);

/// Entropic fit of one sample: Sinkhorn from U, anchored potential.
struct EotFit {
  SinkhornState state;
  EotPotential potential;
};
EotFit fit_eot(const PointCloud& U, const PointCloud& X, const RunConfig& cfg);

/// Observed statistics, their permutation null and p-values.
TestReport run_eot_test(const PointCloud& X, const PointCloud& Y, const PointCloud& U, const PointCloud& mc,
                        const RunConfig& cfg);

/// k rows drawn uniformly without replacement, kept in their original order.
PointCloud subsample(const PointCloud& cloud, std::size_t k, SeededRng& rng);

}  // namespace otqq
