#include <cmath>

#include "doctest.h"
#include "otqq/core.hpp"
#include "otqq/rng.hpp"

using namespace otqq;

namespace {

PointCloud random_cloud(std::size_t n, std::size_t d, std::uint64_t seed, double scale = 1.0) {
  SeededRng rng(seed, 0);
  std::vector<double> c(n * d);
  for (double& v : c) v = scale * rng.normal() + 0.3;
  return PointCloud(n, d, c);
}

}  // namespace

TEST_CASE("point cloud rejects empty, non-finite and unnormalised input") {
  CHECK_THROWS_AS(PointCloud(0, 2, {}), InvalidArgument);
  CHECK_THROWS_AS(PointCloud(1, 2, {1.0}), InvalidArgument);
  CHECK_THROWS_AS(PointCloud(1, 1, {NAN}), InvalidArgument);
  CHECK_THROWS_AS(PointCloud(2, 1, {0.0, 1.0}, {}, {0.5, 0.6}), InvalidArgument);
  const PointCloud c(2, 1, {0.0, 1.0});
  CHECK(c.weights()[0] == doctest::Approx(0.5));
  CHECK(c.has_uniform_weights());
}

TEST_CASE("standardize: a column with mean 0 and sd 1 is left alone") {
  const PointCloud c = PointCloud::from_rows({{-1.0, 2.0}, {0.0, 3.0}, {1.0, 4.0}});
  const Standardized s = standardize(c);
  for (std::size_t i = 0; i < 3; ++i) CHECK(s.cloud(i, 0) == doctest::Approx(c(i, 0)).epsilon(1e-15));
  CHECK(s.transform.mean()[0] == 0.0);
  CHECK(s.transform.scale()[0] == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("standardize {1, 3} under both conventions") {
  const PointCloud c(2, 1, {1.0, 3.0});
  const Standardized sample = standardize(c, StdConvention::Sample);
  CHECK(sample.transform.mean()[0] == 2.0);
  CHECK(sample.transform.scale()[0] == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  CHECK(sample.cloud(0, 0) == doctest::Approx(-1.0 / std::sqrt(2.0)).epsilon(1e-15));
  const Standardized pop = standardize(c, StdConvention::Population);
  CHECK(pop.cloud(0, 0) == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK(pop.cloud(1, 0) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("standardize: constant column reports its index") {
  const PointCloud c = PointCloud::from_rows({{1.0, 5.0}, {2.0, 5.0}, {4.0, 5.0}});
  try {
    standardize(c);
    FAIL("expected ConstantColumn");
  } catch (const ConstantColumn& e) {
    CHECK(e.index() == 1);
  }
}

TEST_CASE("standardize: moments and round trip") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const PointCloud c = random_cloud(40, 3, seed, 3.0);
    const Standardized s = standardize(c);
    for (std::size_t k = 0; k < 3; ++k) {
      double m = 0.0, v = 0.0;
      for (std::size_t i = 0; i < 40; ++i) m += s.cloud(i, k) / 40.0;
      for (std::size_t i = 0; i < 40; ++i) v += (s.cloud(i, k) - m) * (s.cloud(i, k) - m) / 39.0;
      CHECK(std::abs(m) < 1e-10);
      CHECK(std::abs(std::sqrt(v) - 1.0) < 1e-10);
    }
    const PointCloud back = s.transform.invert(s.cloud);
    for (std::size_t i = 0; i < 40; ++i)
      for (std::size_t k = 0; k < 3; ++k) CHECK(std::abs(back(i, k) - c(i, k)) < 1e-10);
  }
}

TEST_CASE("bounding region examples") {
  const std::vector<PointCloud> one{PointCloud::from_rows({{1.0, 2.0}})};
  const CompactRegion r = bounding_region(one, 0.0);
  CHECK(r.lower() == std::vector<double>{1.0, 2.0});
  CHECK(r.upper() == std::vector<double>{1.0, 2.0});

  const std::vector<PointCloud> two{PointCloud::from_rows({{0.0, 0.0}, {1.0, 1.0}})};
  const CompactRegion w = bounding_region(two, 0.1);
  for (std::size_t k = 0; k < 2; ++k) {
    CHECK(w.lower()[k] == doctest::Approx(-0.05).epsilon(1e-14));
    CHECK(w.upper()[k] == doctest::Approx(1.05).epsilon(1e-14));
  }
  CHECK_THROWS_AS(bounding_region(two, -1.0), InvalidArgument);
}

TEST_CASE("bounding region contains the union of random clouds") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const std::vector<PointCloud> clouds{random_cloud(15, 2, 2 * seed), random_cloud(9, 2, 2 * seed + 1, 4.0)};
    const CompactRegion r = bounding_region(clouds, 0.0);
    for (const auto& c : clouds)
      for (std::size_t i = 0; i < c.size(); ++i) REQUIRE(r.contains(c.row(i)));
  }
}

TEST_CASE("restriction to the own bounding box is a no-op") {
  const PointCloud c = random_cloud(30, 3, 7);
  const std::vector<PointCloud> v{c};
  const Restriction r = restrict_to(c, bounding_region(v, 0.0));
  CHECK(r.cloud == c);
  for (std::size_t i = 0; i < 30; ++i) CHECK(r.kept[i] == i);
}

TEST_CASE("restriction to a ball") {
  const PointCloud c = PointCloud::from_rows({{0.0, 0.0}, {2.0, 0.0}, {1.0, 0.0}});
  const Restriction r = restrict_to(c, CompactRegion::ball(1.0));
  CHECK(r.kept == std::vector<std::size_t>{0, 2});  // boundary point kept
  CHECK(r.cloud.weights()[0] == doctest::Approx(0.5));
  CHECK_THROWS_AS(restrict_to(PointCloud::from_rows({{3.0, 3.0}}), CompactRegion::ball(1.0)), EmptyRestriction);
}

TEST_CASE("restriction agrees with the per-point box predicate") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const PointCloud c = random_cloud(50, 2, seed);
    SeededRng rng(seed, 9);
    std::vector<double> lo(2), hi(2);
    for (std::size_t k = 0; k < 2; ++k) {
      const double a = 2.0 * rng.normal(), b = 2.0 * rng.normal();
      lo[k] = std::min(a, b);
      hi[k] = std::max(a, b);
    }
    const CompactRegion box = CompactRegion::box(lo, hi);
    std::vector<std::size_t> expect;
    for (std::size_t i = 0; i < 50; ++i) {
      bool in = true;
      for (std::size_t k = 0; k < 2; ++k) in = in && c(i, k) >= lo[k] && c(i, k) <= hi[k];
      if (in) expect.push_back(i);
    }
    if (expect.empty()) {
      CHECK_THROWS_AS(restrict_to(c, box), EmptyRestriction);
    } else {
      CHECK(restrict_to(c, box).kept == expect);
    }
  }
}

TEST_CASE("run config validation") {
  RunConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.epsilon = 0.0;
  CHECK_THROWS(cfg.validate());
  cfg = RunConfig{};
  cfg.eta = -1.0;
  CHECK_THROWS(cfg.validate());
}

TEST_CASE("seeded streams are reproducible and distinct") {
  SeededRng a(42, 1), b(42, 1), c(42, 2);
  bool differs = false;
  for (int k = 0; k < 100; ++k) {
    const double x = a.normal();
    CHECK(x == b.normal());
    differs = differs || x != c.normal();
  }
  CHECK(differs);
  SeededRng u(5, 5);
  for (int k = 0; k < 1000; ++k) {
    const double v = u.uniform();
    REQUIRE((v >= 0.0 && v < 1.0));
  }
}
