#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstring>
#include <fstream>

#include "lidarcmp/io.hpp"
#include "lidarcmp/kdtree.hpp"
#include "lidarcmp/rng.hpp"
#include "lidarcmp/synthetic.hpp"
#include "lidarcmp/types.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace lidarcmp;
using testsup::TempDir;

namespace {

void write_raw(const std::filesystem::path& p, const std::string& bytes) {
  std::ofstream out(p, std::ios::binary);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

void push_f32(std::string& s, float v) {
  char buf[4];
  std::memcpy(buf, &v, 4);
  s.append(buf, 4);
}

}  // namespace

TEST_CASE("ascii ply with three vertices") {
  TempDir tmp("ply_ascii");
  write_raw(tmp.file("a.ply"),
            "ply\nformat ascii 1.0\nelement vertex 3\n"
            "property float x\nproperty float y\nproperty float z\nend_header\n"
            "0 0 0\n1 2 3\n-1 -2 -3\n");
  const PointCloud c = load_ply(tmp.file("a.ply"));
  REQUIRE(c.size() == 3);
  CHECK(!c.has_intensity());
  CHECK(c.points[1] == Vec3{1, 2, 3});
  CHECK(c.points[2] == Vec3{-1, -2, -3});
}

TEST_CASE("binary ply assembled by hand parses bit-exactly") {
  TempDir tmp("ply_bin");
  std::string bytes =
      "ply\nformat binary_little_endian 1.0\nelement vertex 2\n"
      "property float x\nproperty float y\nproperty float z\n"
      "property float intensity\nend_header\n";
  push_f32(bytes, 1.5f);
  push_f32(bytes, -2.25f);
  push_f32(bytes, 100.125f);
  push_f32(bytes, 0.5f);
  push_f32(bytes, 7.0f);
  push_f32(bytes, 8.0f);
  push_f32(bytes, 9.0f);
  push_f32(bytes, 1.0f);
  write_raw(tmp.file("b.ply"), bytes);

  const PointCloud c = load_ply(tmp.file("b.ply"));
  REQUIRE(c.size() == 2);
  REQUIRE(c.has_intensity());
  CHECK(c.points[0] == Vec3{1.5, -2.25, 100.125});
  CHECK(c.intensity[0] == 0.5);
  CHECK(c.points[1] == Vec3{7, 8, 9});

  // and our writer reproduces the vertex payload byte for byte
  save(c, tmp.file("b2.ply"), CloudFormat::ply_binary);
  const PointCloud c2 = load_ply(tmp.file("b2.ply"));
  REQUIRE(c2.size() == 2);
  CHECK(c2.points[0] == c.points[0]);
  CHECK(c2.intensity == c.intensity);
}

TEST_CASE("ply declaring more vertices than present is a parse error") {
  TempDir tmp("ply_trunc");
  write_raw(tmp.file("t.ply"),
            "ply\nformat ascii 1.0\nelement vertex 5\n"
            "property float x\nproperty float y\nproperty float z\nend_header\n"
            "0 0 0\n1 1 1\n2 2 2\n3 3 3\n");
  CHECK_THROWS_AS(load_ply(tmp.file("t.ply")), FormatError);

  std::string bytes =
      "ply\nformat binary_little_endian 1.0\nelement vertex 5\n"
      "property float x\nproperty float y\nproperty float z\nend_header\n";
  for (int i = 0; i < 4 * 3; ++i) push_f32(bytes, 1.0f);
  write_raw(tmp.file("tb.ply"), bytes);
  CHECK_THROWS_AS(load_ply(tmp.file("tb.ply")), FormatError);
}

TEST_CASE("ply header errors carry a byte offset") {
  TempDir tmp("ply_header");
  write_raw(tmp.file("h.ply"), "ply\nformat ascii 1.0\nbogus keyword\nend_header\n");
  try {
    load_ply(tmp.file("h.ply"));
    FAIL("expected FormatError");
  } catch (const FormatError& e) {
    CHECK(e.byte_offset == 21);  // start of the "bogus" line
    CHECK(std::string(e.what()).find("byte offset") != std::string::npos);
  }
}

TEST_CASE("ply skips unknown scalar properties and trailing elements") {
  TempDir tmp("ply_extra");
  write_raw(tmp.file("e.ply"),
            "ply\nformat ascii 1.0\ncomment made by hand\nelement vertex 2\n"
            "property float x\nproperty float y\nproperty float z\n"
            "property float nx\nproperty float ny\nproperty float nz\n"
            "element face 1\nproperty list uchar int vertex_indices\nend_header\n"
            "0 0 0 1 0 0\n5 5 5 0 1 0\n3 0 1 0\n");
  const PointCloud c = load_ply(tmp.file("e.ply"));
  REQUIRE(c.size() == 2);
  CHECK(c.points[1] == Vec3{5, 5, 5});
  CHECK(!c.has_intensity());
}

TEST_CASE("ply rejects non-finite coordinates naming the row") {
  TempDir tmp("ply_nan");
  write_raw(tmp.file("n.ply"),
            "ply\nformat ascii 1.0\nelement vertex 2\n"
            "property float x\nproperty float y\nproperty float z\nend_header\n"
            "0 0 0\nnan 1 1\n");
  try {
    load_ply(tmp.file("n.ply"));
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("vertex 1") != std::string::npos);
  }
}

TEST_CASE("kitti bin round trip of hand-assembled bytes") {
  TempDir tmp("kitti");
  std::string bytes;
  push_f32(bytes, 1.0f);
  push_f32(bytes, 2.0f);
  push_f32(bytes, 3.0f);
  push_f32(bytes, 0.25f);
  push_f32(bytes, -4.5f);
  push_f32(bytes, 0.0f);
  push_f32(bytes, 12.75f);
  push_f32(bytes, 1.0f);
  write_raw(tmp.file("two.bin"), bytes);
  const PointCloud c = load_kitti_bin(tmp.file("two.bin"));
  REQUIRE(c.size() == 2);
  CHECK(c.points[0] == Vec3{1, 2, 3});
  CHECK(c.intensity[0] == 0.25);
  CHECK(c.points[1] == Vec3{-4.5, 0, 12.75});

  SUBCASE("empty file gives an empty cloud") {
    write_raw(tmp.file("zero.bin"), "");
    const PointCloud e = load_kitti_bin(tmp.file("zero.bin"));
    CHECK(e.empty());
    CHECK(e.has_intensity() == false);
  }
  SUBCASE("size not divisible by 16 is a format error") {
    write_raw(tmp.file("odd.bin"), std::string(17, '\0'));
    CHECK_THROWS_AS(load_kitti_bin(tmp.file("odd.bin")), FormatError);
  }
}

TEST_CASE("kitti save requires intensity") {
  TempDir tmp("kitti_noi");
  PointCloud c;
  c.points = {{1, 2, 3}};
  CHECK_THROWS_AS(save(c, tmp.file("x.bin"), CloudFormat::kitti_bin), PreconditionError);
}

TEST_CASE("binary round trips are bit-exact, ascii within 1e-6") {
  TempDir tmp("roundtrip");
  const PointCloud c = testsup::random_f32_cloud(1000, 80.0, 42);

  for (const auto format : {CloudFormat::ply_binary, CloudFormat::kitti_bin}) {
    const auto p = tmp.file(format == CloudFormat::kitti_bin ? "r.bin" : "r.ply");
    save(c, p, format);
    const PointCloud back = format == CloudFormat::kitti_bin ? load_kitti_bin(p) : load_ply(p);
    REQUIRE(back.size() == c.size());
    CHECK(back.points == c.points);
    CHECK(back.intensity == c.intensity);
  }

  save(c, tmp.file("r_ascii.ply"), CloudFormat::ply_ascii);
  const PointCloud back = load_ply(tmp.file("r_ascii.ply"));
  REQUIRE(back.size() == c.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    worst = std::max(worst, (back.points[i] - c.points[i]).norm());
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("bounds") {
  PointCloud c;
  c.points = {{0, 0, 0}, {1, 2, 3}};
  const Aabb box = bounds(c);
  CHECK(box.min == Vec3{0, 0, 0});
  CHECK(box.max == Vec3{1, 2, 3});

  SUBCASE("single point box is degenerate") {
    PointCloud s;
    s.points = {{4, -5, 6}};
    const Aabb sb = bounds(s);
    CHECK(sb.min == sb.max);
    CHECK(sb.min == Vec3{4, -5, 6});
  }
  SUBCASE("matches a component-wise scan on random points") {
    const PointCloud r = make_uniform_cloud(100, 50.0, 7);
    const Aabb rb = bounds(r);
    double mn[3] = {1e99, 1e99, 1e99}, mx[3] = {-1e99, -1e99, -1e99};
    for (const Vec3& p : r.points) {
      for (int k = 0; k < 3; ++k) {
        mn[k] = std::min(mn[k], p[k]);
        mx[k] = std::max(mx[k], p[k]);
      }
    }
    for (int k = 0; k < 3; ++k) {
      CHECK(rb.min[k] == mn[k]);
      CHECK(rb.max[k] == mx[k]);
    }
  }
  SUBCASE("empty cloud is rejected") {
    CHECK_THROWS_AS(bounds(PointCloud{}), PreconditionError);
  }
  SUBCASE("containment holds for every point") {
    const PointCloud r = make_uniform_cloud(500, 30.0, 9);
    const Aabb rb = bounds(r);
    for (const Vec3& p : r.points) CHECK(rb.contains(p));
  }
}

TEST_CASE("spatial index matches brute force exactly") {
  SplitMix64 rng(1234);
  for (int round = 0; round < 8; ++round) {
    const std::size_t n = 10 + static_cast<std::size_t>(rng.uniform() * 1990);
    const PointCloud cloud = make_uniform_cloud(n, 25.0, rng.next());
    const SpatialIndex index(cloud);
    for (int q = 0; q < 100; ++q) {
      const Vec3 query{rng.uniform(-30, 30), rng.uniform(-30, 30), rng.uniform(-30, 30)};
      const auto hit = index.nearest(query);
      const auto want = oracles::brute_nearest(cloud.points, query);
      CHECK(hit.index == want.index);
      CHECK(hit.dist_sq == want.dist_sq);
    }
  }
}

TEST_CASE("spatial index tie-break picks the lowest id") {
  PointCloud c;
  // duplicate coordinates at several ids; query equidistant from pairs
  c.points = {{1, 0, 0}, {-1, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, -1, 0}};
  const SpatialIndex index(c);
  const auto hit = index.nearest({0, 0, 0});
  CHECK(hit.index == 0);  // all candidates at distance 1; lowest id wins
  CHECK(hit.dist_sq == 1.0);

  const auto at_point = index.nearest({-1, 0, 0});
  CHECK(at_point.index == 1);
  CHECK(at_point.dist_sq == 0.0);
}

TEST_CASE("single point index answers everything") {
  PointCloud c;
  c.points = {{2, 2, 2}};
  const SpatialIndex index(c);
  CHECK(index.nearest({100, -50, 3}).index == 0);
  CHECK(index.nearest({2, 2, 2}).dist_sq == 0.0);
}

TEST_CASE("nearest_within uses a closed ball") {
  PointCloud c;
  c.points = {{0.5, 0, 0}, {10, 0, 0}};
  const SpatialIndex index(c);

  CHECK(index.nearest_within({0, 0, 0}, 1.0).has_value());
  CHECK(!SpatialIndex(PointCloud{{{1.5, 0, 0}}, {}, "", {}}).nearest_within({0, 0, 0}, 1.0));

  // boundary: distance exactly r is found
  PointCloud b;
  b.points = {{1.0, 0, 0}};
  const auto hit = SpatialIndex(b).nearest_within({0, 0, 0}, 1.0);
  REQUIRE(hit.has_value());
  CHECK(hit->dist_sq == 1.0);
}

TEST_CASE("radius search returns the closed ball sorted") {
  PointCloud c;
  c.points = {{0, 0, 0}, {0.5, 0, 0}, {1, 0, 0}, {2, 0, 0}};
  const SpatialIndex index(c);
  const auto hits = index.radius_search({0, 0, 0}, 1.0);
  REQUIRE(hits.size() == 3);
  CHECK(hits[0].index == 0);
  CHECK(hits[1].index == 1);
  CHECK(hits[2].index == 2);
}

TEST_CASE("empty cloud is rejected by the index") {
  CHECK_THROWS_AS(SpatialIndex(PointCloud{}), PreconditionError);
}

TEST_CASE("cloud validation") {
  PointCloud c;
  c.points = {{0, 0, 0}};
  c.intensity = {0.5, 0.25};
  CHECK_THROWS_AS(c.validate(), ValidationError);

  PointCloud nan_cloud;
  nan_cloud.points = {{0, 0, std::numeric_limits<double>::quiet_NaN()}};
  CHECK_THROWS_AS(nan_cloud.validate(), ValidationError);

  Odometry o;
  o.rotation = {0, 0, 0, 0.5};
  CHECK_THROWS_AS(o.validate(), ValidationError);
}
