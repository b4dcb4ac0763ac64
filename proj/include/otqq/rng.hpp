#pragma once

#include <cstdint>
#include <random>

namespace otqq {

/// Reproducible random source identified by (seed, stream).
///
/// Bits come from std::mt19937_64, whose output sequence is fixed by the C++
/// standard. The engine is seeded with a SplitMix64 mix of seed and stream so
/// that neighbouring streams are decorrelated. Every continuous variate is
/// produced by an explicit transform defined here (never by the unspecified
/// std::*_distribution classes), so sequences agree across standard libraries.
class SeededRng {
 public:
  SeededRng(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream() const noexcept { return stream_; }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();

  /// Uniform integer in [0, bound) by rejection (unbiased).
  std::uint64_t uniform_index(std::uint64_t bound);

  /// Standard normal via the Box-Muller transform (second value cached).
  double normal();

  /// Gamma(shape, 1) via Marsaglia-Tsang.
  double gamma(double shape);

  /// Chi-square with `dof` degrees of freedom (real dof > 0).
  double chi_square(double dof) { return 2.0 * gamma(0.5 * dof); }

  /// Child stream derived deterministically from this generator's identity.
  SeededRng substream(std::uint64_t index) const;

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::mt19937_64 engine_;
  double cached_normal_ = 0.0;
  bool has_cached_ = false;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace otqq
