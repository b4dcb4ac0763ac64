#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "otqq/core.hpp"
#include "otqq/io.hpp"
#include "otqq/sampling.hpp"

namespace otqq {

/// A data file and the columns/rows to read from it.
struct DataSource {
  std::string path;
  CsvOptions csv;
};

using SampleSource = std::variant<GeneratorSpec, DataSource>;

/// How X is built when only Y is given.
enum class Reference {
  StandardGaussian,  // N(0, I_d)
  MomentMatched,     // N(mean(Y), cov(Y)) from the unstandardised Y
};

struct ExperimentConfig {
  std::string name = "custom";
  std::optional<SampleSource> x;
  std::optional<SampleSource> y;
  /// Used when x is empty: X is drawn from this reference, with as many points as Y.
  Reference reference = Reference::StandardGaussian;

  std::size_t n = 1000;                  // draws for generated X (and Y unless n_y is set)
  std::optional<std::size_t> n_y;
  std::optional<std::size_t> n_u;        // reference points; default min(n_X, n_Y)
  std::vector<Point> outliers;           // written over the first rows of Y

  bool ot = true;
  bool eot = true;
  bool geometric = false;
  /// EOT regularisation levels. Empty means {run.epsilon}. The test runs at
  /// run.epsilon when it is listed, else at the first level.
  std::vector<double> epsilons;

  RunConfig run;
  bool standardize = false;
  double k1_inflation = 0.0;  // K1: bounding box of both clouds, widened by this share
  double k2_radius = 1.0;     // K2: ball of reference points kept in plots
  bool run_test = true;
  std::optional<double> slope_overlay;  // extra y = slope * x line on one Q-Q panel
  std::size_t overlay_component = 2;    // 1-based
  bool timing = false;

  /// Throws BadSpec on an unusable configuration.
  void validate() const;
  std::vector<double> effective_epsilons() const;
};

/// Names accepted by preset().
std::vector<std::string> preset_names();

/// Ready-to-run configuration. The iris and rice presets need data paths:
/// pass the file for Y through `data_path`.
ExperimentConfig preset(const std::string& name, const std::string& data_path = "");

/// Column names and class labels of the two real data sets.
inline const std::vector<std::string> kIrisVarieties = {"Iris-setosa", "Iris-versicolor", "Iris-virginica"};
inline const std::vector<std::string> kRiceColumns = {"Perimeter", "Major_Axis_Length", "Minor_Axis_Length",
                                                      "Convex_Area", "Extent"};

/// RNG stream ids of the pipeline stages.
namespace streams {
inline constexpr std::uint64_t kX = 1;
inline constexpr std::uint64_t kY = 2;
inline constexpr std::uint64_t kReference = 3;
inline constexpr std::uint64_t kMonteCarlo = 4;
inline constexpr std::uint64_t kSubsampleX = 5;
inline constexpr std::uint64_t kSubsampleY = 6;
}  // namespace streams

/// Runs the full pipeline. Errors are rethrown as StageError naming the stage.
ResultBundle run_experiment(const ExperimentConfig& cfg);

}  // namespace otqq
