#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "otqq/analysis.hpp"
#include "otqq/core.hpp"

namespace otqq {

// ---------------------------------------------------------------- CSV input

enum class HeaderMode { Auto, Present, Absent };

/// Column reference by zero-based index or by header name.
using ColumnRef = std::variant<std::size_t, std::string>;

struct CsvOptions {
  HeaderMode header = HeaderMode::Auto;
  char delimiter = ',';
  /// Numeric columns to keep, in order. Empty keeps every column (all must be numeric).
  std::vector<ColumnRef> columns;
  /// Keep only rows whose cell in this column equals filter_value.
  std::optional<ColumnRef> filter_column;
  std::string filter_value;
};

struct CsvTable {
  std::vector<std::string> header;           // empty when the file has none
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_of_row;      // 1-based source line of each row
};

/// RFC 4180 records (quoted fields, doubled quotes, CRLF). Blank lines are
/// skipped. Throws ParseError on an unterminated quote and RaggedRows when a
/// record's field count differs from the first record's.
CsvTable parse_csv(std::string_view text, char delimiter, HeaderMode header);

/// Reads a delimited text file (or the data section of an ARFF file) into a
/// point cloud. Throws IoError, ParseError(line, column, reason), RaggedRows.
PointCloud load_csv(const std::string& path, const CsvOptions& options = {});
PointCloud load_csv(const std::string& path, bool has_header, char delimiter = ',');

// --------------------------------------------------------------- CSV output

/// Shortest decimal text that parses back to exactly `v`.
std::string format_double(double v);

/// Two-column "x,y" document with header.
std::string plot_set_csv(const PlotSet& set);

// ---------------------------------------------------------------------- SVG

struct SvgOptions {
  int width = 480;
  int height = 480;
  int margin = 56;
  double marker_radius = 2.0;
  std::string title;
  /// Optional extra reference line y = slope * x + intercept.
  std::optional<double> extra_slope;
  double extra_intercept = 0.0;
};

/// Data-to-pixel mapping shared by both axes so the diagonal is drawn at 45 degrees.
struct SvgFrame {
  double lo = 0.0;
  double hi = 1.0;
  int width = 480;
  int height = 480;
  int margin = 56;

  static SvgFrame fit(const PlotSet& set, const SvgOptions& options);
  double px(double x) const;
  double py(double y) const;
};

std::string render_svg(const PlotSet& set, const SvgOptions& options = {});

// ------------------------------------------------------------------ bundles

struct SetSummary {
  PlotSet set;
  /// Prefix that keeps file names unique when one bundle holds several runs
  /// of the same method (for example one per epsilon).
  std::string group;
  BandDiagnostic band;
  std::optional<SlopeFit> slope;
  /// Up to three reference indices with the largest diagonal deviation.
  std::vector<std::size_t> top_deviations;
  std::optional<double> overlay_slope;
};

struct SolverNote {
  std::string stage;
  std::string message;
};

struct ResultBundle {
  std::string experiment;
  std::vector<SetSummary> sets;
  std::optional<TestReport> test;
  std::vector<std::pair<std::string, std::string>> provenance;  // ordered key/value
  std::vector<std::pair<std::string, double>> timing;           // empty unless requested
  std::vector<SolverNote> notes;
};

struct ManifestEntry {
  std::string file;
  std::size_t bytes = 0;
  std::string sha256;
};

std::string sha256_hex(std::string_view data);

std::string summary_json(const ResultBundle& bundle);

/// Writes one CSV and one SVG per set, summary.json and manifest.json into
/// `dir` (created if needed). Returns the manifest, which lists every file
/// but itself. Throws IoError.
std::vector<ManifestEntry> write_bundle(const ResultBundle& bundle, const std::string& dir);

}  // namespace otqq
