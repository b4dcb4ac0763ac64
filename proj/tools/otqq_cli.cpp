// otqq: command-line front end.
//
//   otqq run --preset outliers --out results/outliers
//   otqq run --y data.csv --methods ot,eot --epsilon 0.001 --standardize --out results/mine
//   otqq report results/outliers
//   otqq oracle assignment --trials 50

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "oracles.hpp"
#include "otqq/experiment.hpp"
#include "otqq/geometric.hpp"
#include "otqq/ot_exact.hpp"
#include "otqq/rng.hpp"
#include "otqq/sampling.hpp"

namespace {

enum Exit { kOk = 0, kFailed = 1, kUsage = 2, kConfig = 3, kStage = 4 };

struct RunArgs {
  std::string preset;
  std::string x_path;
  std::string y_path;
  std::string data_path;
  std::string methods;
  std::vector<double> epsilons;
  std::optional<std::size_t> n;
  std::optional<std::size_t> n_u;
  std::optional<std::uint64_t> seed;
  std::optional<double> eta;
  std::optional<std::size_t> resamples;
  std::optional<std::size_t> mc_points;
  std::optional<double> tol;
  std::optional<std::size_t> max_iter;
  std::optional<double> k1_inflation;
  std::optional<double> k2_radius;
  bool standardize = false;
  bool no_standardize = false;
  bool timing = false;
  bool no_test = false;
  std::string reference;
  std::string variety;
  std::vector<std::string> columns;
  std::string filter_column;
  std::string filter_value;
  std::string header = "auto";
  char delimiter = ',';
  std::string out = "otqq-out";
};

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep))
    if (!item.empty()) out.push_back(item);
  return out;
}

otqq::ColumnRef column_ref(const std::string& s) {
  if (!s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); }))
    return static_cast<std::size_t>(std::stoul(s));
  return s;
}

otqq::DataSource data_source(const std::string& path, const RunArgs& a) {
  otqq::DataSource d{path, {}};
  d.csv.delimiter = a.delimiter;
  d.csv.header = a.header == "yes" ? otqq::HeaderMode::Present
                 : a.header == "no" ? otqq::HeaderMode::Absent
                                    : otqq::HeaderMode::Auto;
  for (const auto& c : a.columns) d.csv.columns.push_back(column_ref(c));
  if (!a.filter_column.empty()) {
    d.csv.filter_column = column_ref(a.filter_column);
    d.csv.filter_value = a.filter_value;
  }
  return d;
}

otqq::ExperimentConfig build_config(const RunArgs& a) {
  otqq::ExperimentConfig c;
  if (!a.preset.empty()) {
    c = otqq::preset(a.preset, a.data_path.empty() ? a.y_path : a.data_path);
  } else {
    if (a.y_path.empty()) throw otqq::BadSpec("give --preset or at least --y");
    c.name = "custom";
    c.y = data_source(a.y_path, a);
    if (!a.x_path.empty()) c.x = data_source(a.x_path, a);
  }
  if (!a.methods.empty()) {
    c.ot = c.eot = c.geometric = false;
    for (const auto& m : split(a.methods, ',')) {
      if (m == "ot")
        c.ot = true;
      else if (m == "eot")
        c.eot = true;
      else if (m == "geom" || m == "geometric")
        c.geometric = true;
      else
        throw otqq::BadSpec("unknown method '" + m + "'");
    }
  }
  if (!a.epsilons.empty()) {
    c.epsilons = a.epsilons;
    c.run.epsilon = a.epsilons.front();
  }
  if (a.n) c.n = *a.n;
  if (a.n_u) c.n_u = a.n_u;
  if (a.seed) c.run.seed = *a.seed;
  if (a.eta) c.run.eta = *a.eta;
  if (a.resamples) c.run.resamples = *a.resamples;
  if (a.mc_points) c.run.mc_points = *a.mc_points;
  if (a.tol) c.run.sinkhorn_tol = *a.tol;
  if (a.max_iter) c.run.sinkhorn_max_iter = *a.max_iter;
  if (a.k1_inflation) c.k1_inflation = *a.k1_inflation;
  if (a.k2_radius) c.k2_radius = *a.k2_radius;
  if (a.standardize) c.standardize = true;
  if (a.no_standardize) c.standardize = false;
  if (a.timing) c.timing = true;
  if (a.no_test) c.run_test = false;
  if (!a.reference.empty()) {
    if (a.reference == "moment-matched") {
      c.reference = otqq::Reference::MomentMatched;
      c.x.reset();
    } else if (a.reference == "standard") {
      c.reference = otqq::Reference::StandardGaussian;
      c.x.reset();
    } else {
      throw otqq::BadSpec("--reference must be 'standard' or 'moment-matched'");
    }
  }
  return c;
}

void print_run(const otqq::ResultBundle& b, const std::string& dir, std::size_t files) {
  std::printf("%s: %zu plot sets, %zu files written to %s\n", b.experiment.c_str(), b.sets.size(), files,
              dir.c_str());
  if (b.test)
    std::printf("  E_n = %.6g (p = %.4g)   F_n = %.6g (p = %.4g)\n", b.test->E_n, b.test->p_E, b.test->F_n,
                b.test->p_F);
  for (const auto& n : b.notes) std::fprintf(stderr, "otqq: note [%s]: %s\n", n.stage.c_str(), n.message.c_str());
}

int cmd_run(const RunArgs& a) {
  otqq::ExperimentConfig cfg = build_config(a);
  std::vector<std::pair<std::string, otqq::ExperimentConfig>> jobs;
  if (cfg.name == "iris") {
    std::vector<std::string> varieties = otqq::kIrisVarieties;
    if (!a.variety.empty() && a.variety != "all") varieties = {a.variety};
    for (const auto& v : varieties) {
      otqq::ExperimentConfig c = cfg;
      std::get<otqq::DataSource>(*c.y).csv.filter_value = v;
      c.name = "iris/" + v;
      jobs.emplace_back((std::filesystem::path(a.out) / v).string(), std::move(c));
    }
  } else {
    if (!a.variety.empty()) {
      auto* d = cfg.y ? std::get_if<otqq::DataSource>(&*cfg.y) : nullptr;
      if (!d || !d->csv.filter_column) throw otqq::BadSpec("--variety needs a data source with a row filter");
      d->csv.filter_value = a.variety;
    }
    jobs.emplace_back(a.out, std::move(cfg));
  }
  for (const auto& [dir, c] : jobs) {
    const otqq::ResultBundle b = otqq::run_experiment(c);
    const auto manifest = otqq::write_bundle(b, dir);
    print_run(b, dir, manifest.size() + 1);
  }
  return kOk;
}

std::string read_text(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw otqq::IoError(p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int cmd_report(const std::string& target) {
  namespace fs = std::filesystem;
  fs::path dir = target;
  fs::path summary = target;
  if (fs::is_directory(dir))
    summary = dir / "summary.json";
  else
    dir = summary.parent_path();
  const auto j = nlohmann::ordered_json::parse(read_text(summary));

  std::printf("experiment  %s\n", j.value("experiment", "?").c_str());
  for (const auto& [k, v] : j["provenance"].items()) std::printf("  %-18s %s\n", k.c_str(), v.get<std::string>().c_str());
  std::printf("\n%-34s %8s %10s %10s %9s\n", "set", "points", "in band", "max dev", "slope");
  for (const auto& s : j["sets"]) {
    std::string slope = "-";
    if (!s["slope_fit"].is_null()) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.4f", s["slope_fit"]["slope"].get<double>());
      slope = buf;
    }
    std::printf("%-34s %8zu %10.4f %10.4f %9s\n", s["name"].get<std::string>().c_str(), s["points"].get<std::size_t>(),
                s["band"]["fraction_inside"].get<double>(), s["band"]["max_perpendicular_deviation"].get<double>(),
                slope.c_str());
  }
  if (!j["test"].is_null()) {
    const auto& t = j["test"];
    std::printf("\ntest (B = %zu, n_eff = %g)\n", t["resamples"].get<std::size_t>(), t["n_effective"].get<double>());
    std::printf("  E_n = %-12.6g p = %.4g\n", t["E_n"].get<double>(), t["p_E"].get<double>());
    std::printf("  F_n = %-12.6g p = %.4g\n", t["F_n"].get<double>(), t["p_F"].get<double>());
  }
  for (const auto& n : j["notes"])
    std::printf("note [%s] %s\n", n["stage"].get<std::string>().c_str(), n["message"].get<std::string>().c_str());

  const fs::path mpath = dir / "manifest.json";
  if (!fs::exists(mpath)) return kOk;
  const auto m = nlohmann::json::parse(read_text(mpath));
  std::size_t bad = 0;
  for (const auto& f : m["files"]) {
    const std::string name = f["file"].get<std::string>();
    std::string data;
    try {
      data = read_text(dir / name);
    } catch (const otqq::IoError&) {
      std::printf("manifest: missing %s\n", name.c_str());
      ++bad;
      continue;
    }
    if (otqq::sha256_hex(data) != f["sha256"].get<std::string>()) {
      std::printf("manifest: checksum mismatch for %s\n", name.c_str());
      ++bad;
    }
  }
  std::printf("\nmanifest: %zu files, %zu problems\n", m["files"].size(), bad);
  return bad ? kFailed : kOk;
}

int oracle_assignment(std::size_t trials, std::uint64_t seed) {
  std::size_t failures = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    otqq::SeededRng rng(seed, t);
    const std::size_t n = 1 + rng.uniform_index(7);
    const std::size_t d = 1 + rng.uniform_index(3);
    std::vector<double> u(n * d), x(n * d);
    for (double& v : u) v = 2.0 * rng.uniform() - 1.0;
    for (double& v : x) v = rng.normal();
    const otqq::PointCloud U(n, d, u), X(n, d, x);
    const double solver = otqq::solve_assignment(otqq::cost_matrix(U, X)).total_cost;
    const double brute = oracle::brute_force_assignment(oracle::half_sq_costs(U, X)).cost;
    const bool ok = solver == brute;
    failures += !ok;
    std::printf("trial %3zu  n=%zu d=%zu  solver=%.17g  brute=%.17g  %s\n", t, n, d, solver, brute,
                ok ? "ok" : "MISMATCH");
  }
  std::printf("%zu of %zu trials disagree\n", failures, trials);
  return failures ? kFailed : kOk;
}

int oracle_geometric(std::size_t trials, std::uint64_t seed) {
  std::size_t failures = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    otqq::SeededRng rng(seed, t);
    const std::size_t n = 5 + rng.uniform_index(60);
    std::vector<double> x(n);
    for (double& v : x) v = rng.normal();
    const double u = 1.8 * rng.uniform() - 0.9;
    const otqq::PointCloud X(n, 1, x);
    const otqq::GeometricQuantile g = otqq::geometric_quantile(X, std::vector<double>{u});
    const double best = oracle::geometric_objective_1d(x, u, oracle::grid_geometric_quantile_1d(x, u));
    const double got = oracle::geometric_objective_1d(x, u, g.q[0]);
    const bool ok = got <= best + 1e-9 * (1.0 + std::abs(best));
    failures += !ok;
    std::printf("trial %3zu  n=%zu u=%+.4f  objective solver=%.12g grid=%.12g  %s\n", t, n, u, got, best,
                ok ? "ok" : "WORSE");
  }
  std::printf("%zu of %zu trials worse than the grid minimum\n", failures, trials);
  return failures ? kFailed : kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multivariate Q-Q and potential plots from optimal transport, with two-sample tests"};
  app.set_version_flag("--version", std::string(OTQQ_VERSION));
  app.require_subcommand(1);

  RunArgs ra;
  auto* run = app.add_subcommand("run", "Run a preset or a custom comparison and write a result bundle");
  auto* src = run->add_option_group("source");
  src->add_option("--preset", ra.preset, "Named experiment")->check(CLI::IsMember(otqq::preset_names()));
  src->add_option("--y", ra.y_path, "CSV file with the second sample");
  run->add_option("--x", ra.x_path, "CSV file with the first sample (default: Gaussian reference drawn from Y)");
  run->add_option("--data", ra.data_path, "Data file for the iris and rice presets");
  src->require_option(1, 2);
  run->add_option("--methods", ra.methods, "Comma list from ot,eot,geom");
  run->add_option("--epsilon", ra.epsilons, "EOT regularisation (repeat for several)")->delimiter(',');
  run->add_option("--n", ra.n, "Sample size for generated data");
  run->add_option("--n-u", ra.n_u, "Number of reference points (default min(n_X, n_Y))");
  run->add_option("--seed", ra.seed, "Run seed");
  run->add_option("--eta", ra.eta, "Half-width of the diagonal band");
  run->add_option("--resamples", ra.resamples, "Permutation replicates for the test (>= 50)");
  run->add_option("--mc-points", ra.mc_points, "Monte Carlo points for E_n and F_n");
  run->add_option("--tol", ra.tol, "Sinkhorn marginal tolerance");
  run->add_option("--max-iter", ra.max_iter, "Sinkhorn iteration cap");
  run->add_option("--k1-inflation", ra.k1_inflation, "Widen the data box K1 by this share of each side");
  run->add_option("--k2-radius", ra.k2_radius, "Keep reference points with norm <= radius in the plots");
  run->add_flag("--standardize", ra.standardize, "Standardize both samples column-wise");
  run->add_flag("--no-standardize", ra.no_standardize, "Do not standardize");
  run->add_flag("--timing", ra.timing, "Record stage timings in summary.json");
  run->add_flag("--no-test", ra.no_test, "Skip the permutation test");
  run->add_option("--reference", ra.reference, "Replace X by a Gaussian reference: standard | moment-matched");
  run->add_option("--variety", ra.variety, "Row filter value (iris: one variety, or 'all')");
  run->add_option("--columns", ra.columns, "Columns to read, by index or name")->delimiter(',');
  run->add_option("--filter-column", ra.filter_column, "Keep rows whose cell in this column equals --filter-value");
  run->add_option("--filter-value", ra.filter_value, "Value for --filter-column");
  run->add_option("--header", ra.header, "Header row: auto | yes | no")->check(CLI::IsMember({"auto", "yes", "no"}));
  run->add_option("--delimiter", ra.delimiter, "Field delimiter");
  run->add_option("--out", ra.out, "Output directory");

  std::string report_target;
  auto* report = app.add_subcommand("report", "Print a result bundle and verify its manifest");
  report->add_option("bundle", report_target, "Bundle directory or summary.json")->required();

  std::string oracle_kind;
  std::size_t trials = 50;
  std::uint64_t oracle_seed = 1;
  auto* orc = app.add_subcommand("oracle", "Compare solvers with brute-force references");
  orc->add_option("kind", oracle_kind, "assignment | geometric")
      ->required()
      ->check(CLI::IsMember({"assignment", "geometric"}));
  orc->add_option("--trials", trials, "Number of random instances");
  orc->add_option("--seed", oracle_seed, "Seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*run) return cmd_run(ra);
    if (*report) return cmd_report(report_target);
    if (*orc) return oracle_kind == "assignment" ? oracle_assignment(trials, oracle_seed)
                                                  : oracle_geometric(trials, oracle_seed);
  } catch (const otqq::StageError& e) {
    std::fprintf(stderr, "otqq: stage '%s' failed: %s\n", e.stage().c_str(), e.what());
    return e.stage() == "config" ? kConfig : kStage;
  } catch (const otqq::BadSpec& e) {
    std::fprintf(stderr, "otqq: stage 'config' failed: %s\n", e.what());
    return kConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "otqq: %s\n", e.what());
    return kFailed;
  }
  return kOk;
}
