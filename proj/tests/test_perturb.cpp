#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>
#include <unordered_set>

#include "lidarcmp/perturb.hpp"
#include "lidarcmp/rng.hpp"
#include "lidarcmp/synthetic.hpp"

using namespace lidarcmp;
using namespace lidarcmp::perturb;

TEST_CASE("pinned generator reference values") {
  // First outputs of SplitMix64 seeded with 0 and 1; these freeze the
  // algorithm so any reimplementation can check itself.
  SplitMix64 a(0);
  CHECK(a.next() == 0xE220A8397B1DCDAFULL);
  CHECK(a.next() == 0x6E789E6AA1B965F4ULL);
  SplitMix64 b(1);
  CHECK(b.next() == 0x910A2DEC89025CC1ULL);

  SUBCASE("uniforms sit in [0,1)") {
    SplitMix64 r(77);
    for (int i = 0; i < 1000; ++i) {
      const double u = r.uniform();
      CHECK(u >= 0.0);
      CHECK(u < 1.0);
    }
  }
  SUBCASE("gaussian quantiles are sane") {
    SplitMix64 r(3);
    double sum = 0.0, sum_sq = 0.0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
      const double g = r.gaussian();
      sum += g;
      sum_sq += g * g;
    }
    const double mean = sum / n;
    const double var = sum_sq / n - mean * mean;
    CHECK(std::abs(mean) < 0.02);
    CHECK(var == doctest::Approx(1.0).epsilon(0.03));
  }
}

TEST_CASE("noise") {
  const auto scan = make_lidar_scan(1, {.ground_points = 6000, .wall_points = 4000});

  SUBCASE("std 0 is the identity") {
    const auto out = add_noise(scan, 0.0, 42);
    CHECK(out.points == scan.points);
    CHECK(out.intensity == scan.intensity);
  }
  SUBCASE("sample std of the displacement tracks the requested sigma") {
    const double sigma = 0.2;
    const auto out = add_noise(scan, sigma, 42);
    REQUIRE(out.size() == scan.size());
    for (int axis = 0; axis < 3; ++axis) {
      double sum = 0.0, sum_sq = 0.0;
      for (std::size_t i = 0; i < scan.size(); ++i) {
        const double d = out.points[i][axis] - scan.points[i][axis];
        sum += d;
        sum_sq += d * d;
      }
      const double n = static_cast<double>(scan.size());
      const double stddev = std::sqrt(sum_sq / n - (sum / n) * (sum / n));
      CHECK(stddev == doctest::Approx(sigma).epsilon(0.05));
    }
  }
  SUBCASE("same seed, same bytes") {
    const auto one = add_noise(scan, 0.5, 7);
    const auto two = add_noise(scan, 0.5, 7);
    CHECK(one.points == two.points);
    const auto other = add_noise(scan, 0.5, 8);
    CHECK(one.points != other.points);
  }
}

TEST_CASE("random outliers") {
  const auto scan = make_lidar_scan(2, {.ground_points = 3000, .wall_points = 1000});
  const Aabb box = bounds(scan);

  SUBCASE("count 0 is the identity") {
    CHECK(add_random_outliers(scan, 0, 1).points == scan.points);
  }
  SUBCASE("adds exactly the requested points inside the bounds") {
    const long count = 10000;
    const auto out = add_random_outliers(scan, count, 3);
    REQUIRE(out.size() == scan.size() + 10000);
    REQUIRE(out.intensity.size() == out.points.size());
    for (std::size_t i = scan.size(); i < out.size(); ++i) {
      CHECK(box.contains(out.points[i]));
      CHECK(out.intensity[i] == 0.0);
    }
    // originals untouched, in order
    for (std::size_t i = 0; i < scan.size(); ++i) CHECK(out.points[i] == scan.points[i]);
  }
  SUBCASE("deterministic per seed") {
    CHECK(add_random_outliers(scan, 500, 9).points == add_random_outliers(scan, 500, 9).points);
  }
}

TEST_CASE("clustered outliers") {
  const auto scan = make_lidar_scan(4, {.ground_points = 2000, .wall_points = 500});
  const Vec3 center = centroid(scan);

  SUBCASE("zero clusters is the identity") {
    CHECK(add_clustered_outliers(scan, 0, 1000, 1.0, 20.0, 1).points == scan.points);
  }
  SUBCASE("containment and count bounds for the reported configurations") {
    struct Config {
      long clusters;
      long max_pts;
      double max_radius;
      double max_center;
    };
    for (const Config cfg : {Config{100, 1000, 1.0, 20.0}, Config{50, 1000, 10.0, 20.0}}) {
      const auto out = add_clustered_outliers(scan, cfg.clusters, cfg.max_pts, cfg.max_radius,
                                              cfg.max_center, 11);
      const std::size_t added = out.size() - scan.size();
      CHECK(added >= static_cast<std::size_t>(cfg.clusters));
      CHECK(added <= static_cast<std::size_t>(cfg.clusters * cfg.max_pts));
      for (std::size_t i = scan.size(); i < out.size(); ++i) {
        CHECK(dist(out.points[i], center) <= cfg.max_center + cfg.max_radius + 1e-9);
      }
    }
  }
  SUBCASE("deterministic per seed") {
    const auto one = add_clustered_outliers(scan, 20, 100, 2.0, 10.0, 5);
    const auto two = add_clustered_outliers(scan, 20, 100, 2.0, 10.0, 5);
    CHECK(one.points == two.points);
  }
}

TEST_CASE("random downsampling") {
  const auto scan = make_lidar_scan(6, {.ground_points = 8000, .wall_points = 2000});

  SUBCASE("fraction 1 is the identity") {
    const auto out = downsample_random(scan, 1.0, 4);
    CHECK(out.points == scan.points);
  }
  SUBCASE("keeps round(fraction*n) original points, order preserved") {
    const auto out = downsample_random(scan, 0.5, 4);
    CHECK(out.size() == scan.size() / 2);
    REQUIRE(out.intensity.size() == out.size());

    // order-preserving subset: every point appears in the original sequence
    // after its predecessor
    std::size_t cursor = 0;
    for (const Vec3& p : out.points) {
      while (cursor < scan.size() && !(scan.points[cursor] == p)) ++cursor;
      REQUIRE(cursor < scan.size());
      ++cursor;
    }
  }
  SUBCASE("rounding is exact") {
    PointCloud ten;
    for (int i = 0; i < 10; ++i) ten.points.push_back({double(i), 0, 0});
    CHECK(downsample_random(ten, 0.25, 1).size() == 3);  // round(2.5) away from zero
    CHECK(downsample_random(ten, 0.34, 1).size() == 3);
  }
  SUBCASE("empty result is an error") {
    PointCloud two;
    two.points = {{0, 0, 0}, {1, 1, 1}};
    CHECK_THROWS_AS(downsample_random(two, 0.1, 1), PreconditionError);
    CHECK_THROWS_AS(downsample_random(two, 1.5, 1), PreconditionError);
  }
  SUBCASE("deterministic per seed") {
    CHECK(downsample_random(scan, 0.3, 12).points == downsample_random(scan, 0.3, 12).points);
  }
}

TEST_CASE("voxel downsampling") {
  SUBCASE("one voxel collapses to the centroid") {
    PointCloud c;
    c.points = {{0.1, 0.1, 0.1}, {0.2, 0.2, 0.2}, {0.3, 0.3, 0.3}};
    c.intensity = {0.0, 0.5, 1.0};
    const auto out = downsample_voxel(c, 10.0);
    REQUIRE(out.size() == 1);
    CHECK(out.points[0].x == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(out.intensity[0] == doctest::Approx(0.5).epsilon(1e-12));
  }
  SUBCASE("grid coarser than the cell is the identity up to order") {
    PointCloud c;
    for (int i = 0; i < 5; ++i) c.points.push_back({i * 2.0, 0.5, 0.5});
    const auto out = downsample_voxel(c, 1.0);
    CHECK(out.size() == c.size());
    std::set<double> xs_in, xs_out;
    for (const auto& p : c.points) xs_in.insert(p.x);
    for (const auto& p : out.points) xs_out.insert(p.x);
    CHECK(xs_in == xs_out);
  }
  SUBCASE("output count equals an independent voxel-id recount") {
    const auto scan = make_lidar_scan(8);
    const double cell = 0.8;
    std::set<std::tuple<long long, long long, long long>> ids;
    for (const Vec3& p : scan.points) {
      ids.insert({static_cast<long long>(std::floor(p.x / cell)),
                  static_cast<long long>(std::floor(p.y / cell)),
                  static_cast<long long>(std::floor(p.z / cell))});
    }
    CHECK(downsample_voxel(scan, cell).size() == ids.size());
  }
}

TEST_CASE("affine transforms") {
  const auto scan = make_lidar_scan(9, {.ground_points = 1000, .wall_points = 300});

  SUBCASE("identity") {
    CHECK(apply_transform(scan, Affine::identity()).points == scan.points);
  }
  SUBCASE("rotation preserves pairwise distances") {
    const Affine rot = Affine::rotation_euler(0.2, 1.1, -0.4);
    const auto out = apply_transform(scan, rot);
    SplitMix64 rng(5);
    for (int k = 0; k < 200; ++k) {
      const auto i = static_cast<std::size_t>(rng.uniform() * scan.size());
      const auto j = static_cast<std::size_t>(rng.uniform() * scan.size());
      CHECK(dist(out.points[i], out.points[j]) ==
            doctest::Approx(dist(scan.points[i], scan.points[j])).epsilon(1e-9));
    }
  }
  SUBCASE("scale 2 doubles the bounds diagonal") {
    const auto out = apply_transform(scan, Affine::scaling(2.0));
    CHECK(bounds(out).diagonal() == doctest::Approx(2.0 * bounds(scan).diagonal()).epsilon(1e-12));
  }
  SUBCASE("singular linear part is rejected") {
    Affine degenerate = Affine::scaling(1.0, 1.0, 0.0);
    CHECK_THROWS_AS(apply_transform(scan, degenerate), PreconditionError);
  }
  SUBCASE("axis-angle matches euler for a z rotation") {
    const Affine za = Affine::rotation_axis_angle({0, 0, 1}, 0.7);
    const Affine ze = Affine::rotation_euler(0, 0, 0.7);
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        CHECK(za.linear[i][j] == doctest::Approx(ze.linear[i][j]).epsilon(1e-12));
      }
    }
  }
  SUBCASE("shear keeps z planes and skews x by the coefficient") {
    const Affine sh = Affine::shear(0.5, 0, 0, 0, 0, 0);
    const Vec3 p = sh.apply({1, 2, 3});
    CHECK(p == Vec3{2, 2, 3});
  }
}

TEST_CASE("perturbation spec json round trip") {
  PerturbationSpec spec;
  spec.kind = PerturbationSpec::Kind::clustered_outliers;
  spec.seed = 123456789;
  spec.n_clusters = 100;
  spec.max_points_per_cluster = 1000;
  spec.max_radius = 1.0;
  spec.max_center_dist = 20.0;

  const auto j = spec.to_json();
  CHECK(j.at("kind") == "clustered_outliers");
  CHECK(j.at("seed") == 123456789);
  const PerturbationSpec back = PerturbationSpec::from_json(j);
  CHECK(back.kind == spec.kind);
  CHECK(back.n_clusters == 100);
  CHECK(back.max_radius == 1.0);

  const auto scan = make_lidar_scan(13, {.ground_points = 500, .wall_points = 200});
  CHECK(apply(scan, spec).points == apply(scan, back).points);

  SUBCASE("transform specs carry the matrix") {
    PerturbationSpec t;
    t.kind = PerturbationSpec::Kind::transform;
    t.transform = Affine::rotation_euler(0.1, 0.2, 0.3) * Affine::translation_of({1, 2, 3});
    const PerturbationSpec tback = PerturbationSpec::from_json(t.to_json());
    CHECK(apply(scan, t).points == apply(scan, tback).points);
  }
  SUBCASE("validation rejects bad fields") {
    PerturbationSpec bad;
    bad.kind = PerturbationSpec::Kind::downsample_random;
    bad.fraction = 0.0;
    CHECK_THROWS_AS(bad.validate(), PreconditionError);
    bad.fraction = 2.0;
    CHECK_THROWS_AS(bad.validate(), PreconditionError);
  }
}

TEST_CASE("identity invariants") {
  const auto scan = make_lidar_scan(17, {.ground_points = 800, .wall_points = 300});
  CHECK(add_noise(scan, 0.0, 0).points == scan.points);
  CHECK(apply_transform(scan, Affine::identity()).points == scan.points);
  PerturbationSpec id;
  id.kind = PerturbationSpec::Kind::identity;
  CHECK(apply(scan, id).points == scan.points);
}
