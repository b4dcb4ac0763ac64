#include "otqq/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>
#include <sstream>

#include "otqq/analysis.hpp"
#include "otqq/geometric.hpp"
#include "otqq/kernels.hpp"
#include "otqq/ot_exact.hpp"

namespace otqq {

namespace {

constexpr std::size_t kTopDeviations = 3;

std::string num(double v) { return format_double(v); }

Eigen::MatrixXd cov3(double s12, double s13, double s23) {
  Eigen::MatrixXd c = Eigen::MatrixXd::Identity(3, 3);
  c(0, 1) = c(1, 0) = s12;
  c(0, 2) = c(2, 0) = s13;
  c(1, 2) = c(2, 1) = s23;
  return c;
}

GaussianFull gaussian(const Eigen::MatrixXd& cov) { return {Eigen::VectorXd::Zero(cov.rows()), cov}; }

GaussianFull standard_gaussian(std::size_t d) {
  return gaussian(Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d)));
}

std::string describe(const GeneratorSpec& spec) {
  std::ostringstream os;
  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, GaussianFull>) {
          os << "gaussian(d=" << s.mean.size() << ", mean=[";
          for (Eigen::Index k = 0; k < s.mean.size(); ++k) os << (k ? "," : "") << num(s.mean(k));
          os << "], cov=[";
          for (Eigen::Index r = 0; r < s.covariance.rows(); ++r) {
            os << (r ? ";" : "");
            for (Eigen::Index c = 0; c < s.covariance.cols(); ++c) os << (c ? "," : "") << num(s.covariance(r, c));
          }
          os << "])";
        } else if constexpr (std::is_same_v<T, StudentT>) {
          os << "student_t(d=" << s.location.size() << ", dof=" << num(s.dof) << ")";
        } else if constexpr (std::is_same_v<T, ParetoMarginals>) {
          os << "pareto(alphas=[";
          for (std::size_t k = 0; k < s.alphas.size(); ++k) os << (k ? "," : "") << num(s.alphas[k]);
          os << "])";
        } else if constexpr (std::is_same_v<T, IndependentProduct>) {
          os << "product(";
          for (std::size_t k = 0; k < s.marginals.size(); ++k) {
            os << (k ? "," : "");
            std::visit(
                [&](const auto& m) {
                  using M = std::decay_t<decltype(m)>;
                  if constexpr (std::is_same_v<M, NormalMarginal>)
                    os << "normal(" << num(m.mean) << "," << num(m.sd) << ")";
                  else if constexpr (std::is_same_v<M, ParetoMarginal>)
                    os << "pareto(" << num(m.alpha) << ")";
                  else
                    os << "t(" << num(m.dof) << ")";
                },
                s.marginals[k]);
          }
          os << ")";
        } else {
          os << "abs_shift_gaussian(d=" << s.dim << ")";
        }
      },
      spec);
  return os.str();
}

std::string describe(const SampleSource& src) {
  if (const auto* g = std::get_if<GeneratorSpec>(&src)) return describe(*g);
  const auto& d = std::get<DataSource>(src);
  std::string s = "file(" + d.path;
  if (d.csv.filter_column) s += ", " + d.csv.filter_value;
  return s + ")";
}

template <class Fn>
auto stage(const char* name, Fn&& fn) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

PointCloud obtain(const SampleSource& src, std::size_t n, SeededRng rng) {
  if (const auto* g = std::get_if<GeneratorSpec>(&src)) return generate(*g, n, rng);
  const auto& d = std::get<DataSource>(src);
  return load_csv(d.path, d.csv);
}

std::vector<std::size_t> top_indices(const PlotSet& set) {
  const std::vector<double> dev = diagonal_deviations(set);
  std::vector<std::size_t> idx(dev.size());
  std::iota(idx.begin(), idx.end(), 0);
  const std::size_t k = std::min(kTopDeviations, idx.size());
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(),
                    [&](std::size_t a, std::size_t b) { return dev[a] > dev[b] || (dev[a] == dev[b] && a < b); });
  idx.resize(k);
  return idx;
}

class Clock {
 public:
  explicit Clock(std::vector<std::pair<std::string, double>>* sink) : sink_(sink) {}
  void lap(const std::string& label) {
    const auto now = std::chrono::steady_clock::now();
    if (sink_) sink_->emplace_back(label, std::chrono::duration<double>(now - last_).count());
    last_ = now;
  }

 private:
  std::vector<std::pair<std::string, double>>* sink_;
  std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

}  // namespace

void ExperimentConfig::validate() const {
  if (!ot && !eot && !geometric) throw BadSpec("at least one method must be selected");
  if (!y) throw BadSpec("a source for Y is required");
  if (eot && effective_epsilons().empty()) throw BadSpec("EOT needs an epsilon");
  for (double e : effective_epsilons())
    if (!(e > 0.0) || !std::isfinite(e)) throw BadSpec("epsilon must be positive and finite");
  if (n == 0 || (n_y && *n_y == 0)) throw BadSpec("sample sizes must be positive");
  if (n_u && *n_u == 0) throw BadSpec("n_u must be positive");
  if (!(k1_inflation >= 0.0)) throw BadSpec("K1 inflation must be non-negative");
  if (!(k2_radius > 0.0 && k2_radius <= 1.0)) throw BadSpec("K2 radius must lie in (0, 1]");
  if (overlay_component == 0) throw BadSpec("overlay component is 1-based");
  if (eot && run_test && run.resamples < 50) throw BadSpec("the permutation test needs at least 50 resamples");
  try {
    run.validate();
  } catch (const Error& e) {
    throw BadSpec(e.what());
  }
  if (x)
    if (const auto* g = std::get_if<GeneratorSpec>(&*x)) validate_spec(*g);
  if (const auto* g = std::get_if<GeneratorSpec>(&*y)) validate_spec(*g);
}

std::vector<double> ExperimentConfig::effective_epsilons() const {
  return epsilons.empty() ? std::vector<double>{run.epsilon} : epsilons;
}

std::vector<std::string> preset_names() {
  return {"identical-gaussian",
          "correlated-gaussian",
          "scaled-gaussian",
          "outliers",
          "gaussian-vs-student-t",
          "gaussian-vs-pareto-pushforward",
          "epsilon-sweep",
          "iris",
          "rice",
          "geometric-comparison",
          "geometric-comparison-t"};
}

ExperimentConfig preset(const std::string& name, const std::string& data_path) {
  ExperimentConfig c;
  c.name = name;
  const GaussianFull g3 = standard_gaussian(3);
  if (name == "identical-gaussian") {
    const GaussianFull s = gaussian(cov3(0.5, 0.2, 0.0));
    c.x = GeneratorSpec(s);
    c.y = GeneratorSpec(s);
  } else if (name == "correlated-gaussian") {
    c.x = GeneratorSpec(g3);
    c.y = GeneratorSpec(gaussian(cov3(0.9, 0.0, 0.0)));
  } else if (name == "scaled-gaussian") {
    Eigen::MatrixXd cov = Eigen::MatrixXd::Identity(3, 3);
    cov(1, 1) = 4.0;
    c.x = GeneratorSpec(g3);
    c.y = GeneratorSpec(gaussian(cov));
    c.slope_overlay = 2.0;
    c.overlay_component = 2;
  } else if (name == "outliers") {
    c.x = GeneratorSpec(g3);
    c.y = GeneratorSpec(g3);
    c.outliers = {{8, 8, 8}, {9, 9, 9}, {10, 10, 10}};
    c.run.epsilon = 1e-3;
  } else if (name == "gaussian-vs-student-t" || name == "epsilon-sweep") {
    c.x = GeneratorSpec(g3);
    c.y = GeneratorSpec(StudentT{Eigen::VectorXd::Zero(3), Eigen::MatrixXd::Identity(3, 3), 3.2});
    if (name == "epsilon-sweep") {
      c.epsilons = {1e-3, 1e-2, 1e-1};
      c.run.epsilon = 1e-2;
    } else {
      c.run.epsilon = 1e-3;
    }
  } else if (name == "gaussian-vs-pareto-pushforward") {
    c.x = GeneratorSpec(PushforwardAbsShift{3});
    c.y = GeneratorSpec(ParetoMarginals{{3.0, 3.0, 3.0}});
    c.run.epsilon = 1e-3;
  } else if (name == "iris") {
    if (data_path.empty()) throw BadSpec("the iris preset needs the path of iris.data");
    DataSource d{data_path, {}};
    d.csv.columns = {std::size_t{0}, std::size_t{1}, std::size_t{2}, std::size_t{3}};
    d.csv.filter_column = std::size_t{4};
    d.csv.filter_value = kIrisVarieties[0];
    c.y = d;
    c.standardize = true;
    c.run.epsilon = 1e-3;
  } else if (name == "rice") {
    if (data_path.empty()) throw BadSpec("the rice preset needs the path of the rice data file");
    DataSource d{data_path, {}};
    for (const auto& col : kRiceColumns) d.csv.columns.emplace_back(col);
    d.csv.filter_column = std::string("Class");
    d.csv.filter_value = "Osmancik";
    c.y = d;
    c.standardize = true;
    c.run.epsilon = 5e-3;
  } else if (name == "geometric-comparison" || name == "geometric-comparison-t") {
    IndependentProduct p;
    for (int k = 0; k < 4; ++k) p.marginals.emplace_back(NormalMarginal{});
    if (name == "geometric-comparison")
      p.marginals.emplace_back(ParetoMarginal{3.2});
    else
      p.marginals.emplace_back(StudentTMarginal{3.2});
    c.x = GeneratorSpec(standard_gaussian(5));
    c.y = GeneratorSpec(p);
    c.geometric = true;
    c.standardize = true;
    c.run.epsilon = 5e-3;
  } else {
    throw BadSpec("unknown preset '" + name + "'");
  }
  return c;
}

ResultBundle run_experiment(const ExperimentConfig& cfg) {
  stage("config", [&] {
    cfg.validate();
    return 0;
  });
  const std::uint64_t seed = cfg.run.seed;
  ResultBundle out;
  out.experiment = cfg.name;
  Clock clock(cfg.timing ? &out.timing : nullptr);

  PointCloud Y = stage("data", [&] { return obtain(*cfg.y, cfg.n_y.value_or(cfg.n), SeededRng(seed, streams::kY)); });
  PointCloud X = stage("data", [&] {
    if (cfg.x) return obtain(*cfg.x, cfg.n, SeededRng(seed, streams::kX));
    SeededRng rng(seed, streams::kX);
    if (cfg.reference == Reference::MomentMatched) return generate(moment_match(Y), Y.size(), rng);
    return generate(standard_gaussian(Y.dim()), Y.size(), rng);
  });
  if (X.dim() != Y.dim()) throw StageError("data", DimensionMismatch(X.dim(), Y.dim()).what());
  const std::size_t d = X.dim();
  clock.lap("data");

  if (!cfg.outliers.empty()) Y = stage("outliers", [&] { return inject_outliers(Y, cfg.outliers); });

  if (cfg.standardize) {
    stage("standardize", [&] {
      X = standardize(X).cloud;
      Y = standardize(Y).cloud;
      return 0;
    });
  }

  const CompactRegion K1 = stage("restrict", [&] {
    const std::vector<PointCloud> both{X, Y};
    const CompactRegion r = bounding_region(both, cfg.k1_inflation);
    X = restrict_to(X, r).cloud;
    Y = restrict_to(Y, r).cloud;
    return r;
  });
  const CompactRegion K2 = CompactRegion::ball(cfg.k2_radius);

  const std::size_t n_u = cfg.n_u.value_or(std::min(X.size(), Y.size()));
  const PointCloud U = stage("reference", [&] {
    SeededRng rng(seed, streams::kReference);
    return sample_unit_ball(n_u, d, rng);
  });
  clock.lap("preprocess");

  const std::string region_tag = "K1=" + K1.describe() + "; K2=" + K2.describe();
  auto add_sets = [&](std::vector<PlotSet> sets, const std::string& group) {
    for (auto& s : sets) {
      s.region_tag = region_tag;
      SetSummary sum;
      sum.set = std::move(s);
      sum.group = group;
      out.sets.push_back(std::move(sum));
    }
  };

  std::vector<std::pair<std::string, std::string>> ot_costs;
  if (cfg.ot) {
    stage("ot", [&] {
      if (n_u > X.size() || n_u > Y.size())
        throw InsufficientData("exact OT needs n_u <= min(n_X, n_Y)");
      SeededRng rx(seed, streams::kSubsampleX);
      SeededRng ry(seed, streams::kSubsampleY);
      const PointCloud Xs = subsample(X, n_u, rx);
      const PointCloud Ys = subsample(Y, n_u, ry);
      DiscreteMap mx = ot_quantile_map(U, Xs);
      DiscreteMap my = ot_quantile_map(U, Ys);
      const ExactPotentials px = ot_dual_potentials(U, Xs, mx.assignment);
      const ExactPotentials py = ot_dual_potentials(U, Ys, my.assignment);
      // Mean transport cost per point under both cost conventions.
      for (const auto& [key, m] : {std::pair{"ot_cost_x", &mx}, {"ot_cost_y", &my}}) {
        const double half = m->assignment.total_cost / static_cast<double>(n_u);
        ot_costs.emplace_back(key, "half_sq=" + num(half) + ";sq=" + num(2.0 * half));
      }
      std::vector<PlotSet> sets = build_qq_sets(TransportMap(std::move(mx)), TransportMap(std::move(my)), U, K2);
      sets.push_back(build_potential_set(px.phi_at_ref, py.phi_at_ref, U, K2, {Method::OT, 0.0}));
      for (auto& s : sets) {
        s.n_x = X.size();
        s.n_y = Y.size();
      }
      add_sets(std::move(sets), "");
      return 0;
    });
    clock.lap("ot");
  }

  if (cfg.eot) {
    const std::vector<double> eps = cfg.effective_epsilons();
    const bool sweep = eps.size() > 1;
    const double primary =
        std::find(eps.begin(), eps.end(), cfg.run.epsilon) != eps.end() ? cfg.run.epsilon : eps.front();
    for (double e : eps) {
      RunConfig rc = cfg.run;
      rc.epsilon = e;
      const std::string group = sweep ? "eps_" + num(e) : "";
      stage("eot", [&] {
        const EotFit fx = fit_eot(U, X, rc);
        const EotFit fy = fit_eot(U, Y, rc);
        for (const auto* f : {&fx, &fy}) {
          if (!f->state.converged)
            out.notes.push_back({"eot", "epsilon " + num(e) + ": Sinkhorn stopped at marginal error " +
                                            num(f->state.marginal_error) + " after " +
                                            std::to_string(f->state.iterations) + " iterations"});
        }
        std::vector<PlotSet> sets = build_qq_sets(TransportMap(fx.potential.map()),
                                                  TransportMap(fy.potential.map()), U, K2);
        sets.push_back(build_potential_set(fx.potential, fy.potential, U, K2));
        add_sets(std::move(sets), group);
        return 0;
      });
      clock.lap("eot " + num(e));
      if (cfg.run_test && e == primary) {
        out.test = stage("test", [&] {
          SeededRng rng(seed, streams::kMonteCarlo);
          const PointCloud mc = sample_unit_ball(rc.mc_points, d, rng);
          return run_eot_test(X, Y, U, mc, rc);
        });
        if (out.test->unconverged_solves > 0)
          out.notes.push_back({"test", std::to_string(out.test->unconverged_solves) +
                                           " Sinkhorn solves did not reach the tolerance"});
        clock.lap("test");
      }
    }
  }

  if (cfg.geometric) {
    stage("geometric", [&] {
      GeometricQQ g = geometric_qq(X, Y);
      if (g.unconverged > 0)
        out.notes.push_back({"geometric", std::to_string(g.unconverged) + " quantile solves did not converge"});
      add_sets(std::move(g.sets), "");
      return 0;
    });
    clock.lap("geometric");
  }

  stage("diagnostics", [&] {
    for (auto& s : out.sets) {
      s.band = band_fraction(s.set, cfg.run.eta);
      try {
        s.slope = fit_slope(s.set);
      } catch (const DegenerateFit&) {
        s.slope.reset();
      }
      s.top_deviations = top_indices(s.set);
      if (cfg.slope_overlay && s.set.component && *s.set.component + 1 == cfg.overlay_component)
        s.overlay_slope = cfg.slope_overlay;
    }
    return 0;
  });

  auto& p = out.provenance;
  p.emplace_back("version", OTQQ_VERSION);
  p.emplace_back("seed", std::to_string(seed));
  p.emplace_back("x_source", cfg.x ? describe(*cfg.x)
                                   : (cfg.reference == Reference::MomentMatched ? "moment-matched gaussian"
                                                                                : "standard gaussian"));
  p.emplace_back("y_source", describe(*cfg.y));
  p.emplace_back("outliers", std::to_string(cfg.outliers.size()));
  p.emplace_back("n_x", std::to_string(X.size()));
  p.emplace_back("n_y", std::to_string(Y.size()));
  p.emplace_back("n_u", std::to_string(n_u));
  p.emplace_back("dimension", std::to_string(d));
  std::string methods;
  for (const auto& [on, label] : {std::pair{cfg.ot, "ot"}, {cfg.eot, "eot"}, {cfg.geometric, "geom"}})
    if (on) methods += (methods.empty() ? "" : ",") + std::string(label);
  p.emplace_back("methods", methods);
  p.insert(p.end(), ot_costs.begin(), ot_costs.end());
  if (cfg.eot) {
    std::string eps;
    for (double e : cfg.effective_epsilons()) eps += (eps.empty() ? "" : ",") + num(e);
    p.emplace_back("epsilons", eps);
    p.emplace_back("sinkhorn_tol", num(cfg.run.sinkhorn_tol));
    p.emplace_back("sinkhorn_max_iter", std::to_string(cfg.run.sinkhorn_max_iter));
  }
  if (out.test) {
    p.emplace_back("mc_points", std::to_string(cfg.run.mc_points));
    p.emplace_back("resamples", std::to_string(cfg.run.resamples));
  }
  p.emplace_back("eta", num(cfg.run.eta));
  p.emplace_back("standardize", cfg.standardize ? "true" : "false");
  p.emplace_back("k1", K1.describe());
  p.emplace_back("k2", K2.describe());
  p.emplace_back("kernels", kernels::active().name);
  return out;
}

}  // namespace otqq
