#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <fstream>

#include "lidarcmp/harness.hpp"
#include "lidarcmp/io.hpp"
#include "lidarcmp/synthetic.hpp"
#include "test_support.hpp"

using namespace lidarcmp;
using namespace lidarcmp::harness;
using testsup::TempDir;

namespace {

ScanSet small_set(int n, std::size_t points = 1200) {
  ScanSet set;
  for (int i = 0; i < n; ++i) {
    set.add("scan" + std::to_string(i),
            make_lidar_scan(100 + i, {.ground_points = points, .wall_points = points / 3}));
  }
  return set;
}

std::vector<metrics::MetricSpec> quick_metrics() {
  using metrics::MetricKind;
  metrics::MetricSpec cham;
  cham.kind = MetricKind::chamfer;
  metrics::MetricSpec d;
  d.kind = MetricKind::dcd;
  d.alpha = 1.0;
  metrics::MetricSpec viou;
  viou.kind = MetricKind::voxel_iou;
  return {cham, d, viou};
}

}  // namespace

TEST_CASE("spearman rho on hand-ranked sequences") {
  // ranks y = {2,1,4,3,5}: sum d^2 = 4 -> 1 - 24/120
  CHECK(spearman_rho({1, 2, 3, 4, 5}, {2, 1, 4, 3, 5}) == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(spearman_rho({1, 2, 3, 4, 5}, {5, 4, 3, 2, 1}) == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(spearman_rho({1, 2, 3, 4, 5}, {2, 4, 6, 8, 10}) == doctest::Approx(1.0).epsilon(1e-12));
  // tie in y -> average ranks {1, 2.5, 2.5, 4, 5}: rho = sqrt(0.95)
  CHECK(spearman_rho({1, 2, 3, 4, 5}, {1, 2, 2, 4, 5}) ==
        doctest::Approx(std::sqrt(0.95)).epsilon(1e-12));
  // constant series has no rank variance
  CHECK(spearman_rho({1, 2, 3, 4, 5}, {7, 7, 7, 7, 7}) == 0.0);
  CHECK_THROWS_AS(spearman_rho({1}, {2}), PreconditionError);
}

TEST_CASE("cell seeds are stable and distinct") {
  const auto s1 = cell_seed(1, "a", 0, "noise");
  CHECK(s1 == cell_seed(1, "a", 0, "noise"));
  CHECK(s1 != cell_seed(2, "a", 0, "noise"));
  CHECK(s1 != cell_seed(1, "b", 0, "noise"));
  CHECK(s1 != cell_seed(1, "a", 1, "noise"));
  CHECK(s1 != cell_seed(1, "a", 0, "scale"));
}

TEST_CASE("scan set manifest") {
  TempDir tmp("manifest");
  const auto a = make_lidar_scan(1, {.ground_points = 300, .wall_points = 100});
  const auto b = make_lidar_scan(2, {.ground_points = 300, .wall_points = 100});
  save(a, tmp.file("a.ply"), CloudFormat::ply_binary);
  save(b, tmp.file("b.bin"), CloudFormat::kitti_bin);

  std::ofstream m(tmp.file("scans.json"));
  m << R"({"scans": [
    {"id": "alpha", "path": "a.ply"},
    {"id": "beta", "path": "b.bin", "format": "kitti_bin",
     "pose": {"translation": [1, 2, 3], "rotation": [0, 0, 0, 1]}}
  ]})";
  m.close();

  const ScanSet set = ScanSet::load_manifest(tmp.file("scans.json"));
  REQUIRE(set.size() == 2);
  CHECK(set.entries()[0].id == "alpha");
  CHECK(set.entries()[0].cloud.size() == a.size());
  REQUIRE(set.find("beta"));
  REQUIRE(set.find("beta")->cloud.pose.has_value());
  CHECK(set.find("beta")->cloud.pose->translation == Vec3{1, 2, 3});
  CHECK(set.find("nope") == nullptr);

  SUBCASE("directory loading picks up both files") {
    const ScanSet dir_set = ScanSet::load_directory(tmp.path);
    CHECK(dir_set.size() == 2);
    CHECK(dir_set.find("a"));
    CHECK(dir_set.find("b"));
  }
  SUBCASE("duplicate ids are rejected") {
    ScanSet dup;
    dup.add("x", a);
    CHECK_THROWS_AS(dup.add("x", b), PreconditionError);
  }
}

TEST_CASE("sensitivity sweep basics") {
  const ScanSet scans = small_set(3);
  ModifierSpec noise;
  noise.kind = ModifierSpec::Kind::noise;
  RunOptions opts;
  opts.seed = 404;

  const SweepReport report =
      sensitivity_sweep(scans, noise, {0.0, 0.25, 0.5}, quick_metrics(), opts);

  SUBCASE("level zero rows sit at the identity value") {
    CHECK(report.row("chamfer", 0)->mean == 0.0);
    CHECK(report.row("dcd[alpha=1]", 0)->mean == 0.0);
    CHECK(report.row("voxel_iou[0.5]", 0)->mean == 1.0);
  }
  SUBCASE("rows cover the metric x level grid with scan counts") {
    CHECK(report.rows.size() == 3 * 3);
    for (const auto& row : report.rows) {
      CHECK(row.n_ok == 3);
      CHECK(row.n_err == 0);
    }
  }
  SUBCASE("distances rise with noise, similarity falls") {
    CHECK(report.spearman_rho.at("chamfer") > 0.9);
    CHECK(report.spearman_rho.at("dcd[alpha=1]") > 0.9);
    CHECK(report.spearman_rho.at("voxel_iou[0.5]") < -0.9);
  }
  SUBCASE("reports are deterministic and serializable") {
    const SweepReport again =
        sensitivity_sweep(scans, noise, {0.0, 0.25, 0.5}, quick_metrics(), opts);
    CHECK(report.to_csv() == again.to_csv());
    CHECK(report.to_json() == again.to_json());
    CHECK(report.to_json().at("report") == "sweep");

    RunOptions serial = opts;
    serial.jobs = 1;
    const SweepReport one_thread =
        sensitivity_sweep(scans, noise, {0.0, 0.25, 0.5}, quick_metrics(), serial);
    CHECK(one_thread.to_json() == report.to_json());
  }
  SUBCASE("level grids must increase and have two entries") {
    CHECK_THROWS_AS(sensitivity_sweep(scans, noise, {0.5}, quick_metrics(), opts),
                    PreconditionError);
    CHECK_THROWS_AS(sensitivity_sweep(scans, noise, {0.5, 0.4}, quick_metrics(), opts),
                    PreconditionError);
  }
}

TEST_CASE("sweep isolates failing cells") {
  const ScanSet scans = small_set(2);
  metrics::MetricSpec bad;  // emd across different-size perturbed clouds fails
  bad.kind = metrics::MetricKind::emd;
  ModifierSpec down;
  down.kind = ModifierSpec::Kind::downsample_random;

  const SweepReport report = sensitivity_sweep(scans, down, {0.4, 0.7}, {bad}, {});
  for (const auto& row : report.rows) {
    CHECK(row.n_err == 2);
    CHECK(row.n_ok == 0);
  }
  const auto j = report.to_json();
  CHECK(j.at("errors").size() == 4);
  CHECK(j.at("errors")[0].at("error").get<std::string>().find("cardinality") !=
        std::string::npos);
}

TEST_CASE("accuracy protocol") {
  const ScanSet scans = small_set(4);
  RunOptions opts;
  opts.seed = 2024;

  SUBCASE("identity modifier scores 1.0 for self-consistent metrics") {
    ModifierSpec id;
    id.kind = ModifierSpec::Kind::identity;
    const AccuracyReport report = accuracy_eval(scans, id, quick_metrics(), opts);
    for (const auto& row : report.rows) {
      CHECK(row.accuracy == 1.0);
      CHECK(row.total == 4);
      CHECK(row.hits == 4);
    }
  }
  SUBCASE("small noise keeps identification perfect for dcd") {
    ModifierSpec noise;
    noise.kind = ModifierSpec::Kind::noise;
    noise.level = 0.05;
    const AccuracyReport report = accuracy_eval(scans, noise, quick_metrics(), opts);
    CHECK(report.row("dcd[alpha=1]", "noise")->accuracy == 1.0);
  }
  SUBCASE("multiple modifiers accumulate rows") {
    ModifierSpec id;
    id.kind = ModifierSpec::Kind::identity;
    ModifierSpec noise;
    noise.kind = ModifierSpec::Kind::noise;
    noise.level = 0.1;
    const AccuracyReport report =
        accuracy_eval(scans, std::vector<ModifierSpec>{id, noise}, quick_metrics(), opts);
    CHECK(report.rows.size() == 6);
    CHECK(report.to_csv().find("identity") != std::string::npos);
    CHECK(report.to_csv().find("noise") != std::string::npos);
  }
  SUBCASE("needs at least two scans") {
    ModifierSpec id;
    id.kind = ModifierSpec::Kind::identity;
    CHECK_THROWS_AS(accuracy_eval(small_set(1), id, quick_metrics(), opts), PreconditionError);
  }
}

TEST_CASE("condition selftest") {
  const ScanSet scans = small_set(2);
  RunOptions opts;
  opts.seed = 5;

  auto specs = quick_metrics();
  metrics::MetricSpec hist_rnd;
  hist_rnd.kind = metrics::MetricKind::histogram;
  hist_rnd.sampling.mode = metrics::SamplingSpec::Mode::random;
  hist_rnd.sampling.n = 100;
  specs.push_back(hist_rnd);
  metrics::MetricSpec icp;
  icp.kind = metrics::MetricKind::icp;
  specs.push_back(icp);

  const SelftestReport report = condition_selftest(scans, specs, opts);
  REQUIRE(report.rows.size() == specs.size());

  const SelftestRow* d = report.row("dcd[alpha=1]");
  REQUIRE(d);
  CHECK(d->self_consistency == "pass");
  CHECK(d->symmetry == "pass");
  CHECK(d->sensitivity == "pass");
  CHECK(d->range == "pass");
  CHECK(d->all_pass());

  const SelftestRow* h = report.row("histogram[random,n=100]");
  REQUIRE(h);
  CHECK(h->self_consistency == "fail");  // the reflexivity failure, reported as data

  const SelftestRow* i = report.row("icp");
  REQUIRE(i);
  CHECK(i->symmetry == "exempt");
  CHECK(i->self_consistency == "pass");

  const auto csv = report.to_csv();
  CHECK(csv.find("self_consistency,symmetry,sensitivity,efficiency,range") != std::string::npos);
}

TEST_CASE("timing bench") {
  auto specs = quick_metrics();
  RunOptions opts;
  opts.seed = 31;
  const TimingReport report = timing_bench(specs, {200, 500}, 3, opts);
  REQUIRE(report.rows.size() == 6);

  for (const auto& row : report.rows) {
    CHECK(row.status == "ok");
    CHECK(row.mean_s > 0.0);
    CHECK(row.std_s >= 0.0);
    CHECK(row.repetitions == 3);
  }
  // sorted by size then speed
  for (std::size_t i = 1; i < report.rows.size(); ++i) {
    const auto& prev = report.rows[i - 1];
    const auto& cur = report.rows[i];
    CHECK((prev.cloud_size < cur.cloud_size ||
           (prev.cloud_size == cur.cloud_size && prev.mean_s <= cur.mean_s)));
  }

  SUBCASE("repetition floor") {
    CHECK_THROWS_AS(timing_bench(specs, {100}, 2, opts), PreconditionError);
  }
  SUBCASE("metric errors become row status") {
    metrics::MetricSpec e;
    e.kind = metrics::MetricKind::emd;
    e.emd_cap = 64;
    const TimingReport r = timing_bench({e}, {200}, 3, opts);
    REQUIRE(r.rows.size() == 1);
    CHECK(r.rows[0].status.find("error") == 0);
  }
}

TEST_CASE("pairwise comparison") {
  ScanSet real, sim;
  const auto s0 = make_lidar_scan(800, {.ground_points = 900, .wall_points = 300});
  const auto s1 = make_lidar_scan(801, {.ground_points = 900, .wall_points = 300});
  real.add("p0", s0);
  real.add("p1", s1);
  real.add("only_real", s0);
  sim.add("p0", s0);
  sim.add("p1", perturb::add_noise(s1, 0.05, 3));
  sim.add("only_sim", s1);

  const PairwiseReport report = pairwise_compare(real, sim, quick_metrics(), {});
  CHECK(report.rows.size() == 6);  // 2 matched ids x 3 metrics
  REQUIRE(report.unmatched.size() == 2);

  for (const auto& row : report.rows) {
    REQUIRE(!row.error);
    if (row.id == "p0") {
      if (row.metric == "voxel_iou[0.5]") {
        CHECK(row.value == 1.0);
      } else {
        CHECK(row.value == 0.0);
      }
    }
  }
  CHECK(report.summary.at("chamfer").first > 0.0);

  const auto j = report.to_json();
  CHECK(j.at("report") == "pairwise");
  CHECK(j.at("rows").size() == 6);
  CHECK(report.to_csv().find("__mean__") != std::string::npos);
}

TEST_CASE("default battery matches the paper's lineup") {
  const auto battery = default_metric_battery();
  CHECK(battery.size() == 14);
  std::vector<std::string> names;
  for (const auto& s : battery) names.push_back(s.name());
  CHECK(std::find(names.begin(), names.end(), "dcd[alpha=1000]") != names.end());
  CHECK(std::find(names.begin(), names.end(), "histogram[voxel,cell=2]") != names.end());
  CHECK(std::find(names.begin(), names.end(), "chamfer[vds=1]") != names.end());
}

TEST_CASE("modifier parsing") {
  const ModifierSpec m = ModifierSpec::parse("noise:0.5");
  CHECK(m.kind == ModifierSpec::Kind::noise);
  CHECK(m.level == 0.5);
  CHECK(ModifierSpec::parse("translate:0.2").kind == ModifierSpec::Kind::translate);
  CHECK(ModifierSpec::parse("identity").level == 0.0);
  CHECK_THROWS_AS(ModifierSpec::parse("wobble:1"), PreconditionError);

  SUBCASE("modifier to perturbation carries the level") {
    ModifierSpec noise;
    noise.kind = ModifierSpec::Kind::noise;
    noise.level = 0.3;
    const auto spec = modifier_to_perturbation(noise, 99);
    CHECK(spec.kind == perturb::PerturbationSpec::Kind::noise);
    CHECK(spec.std_dev == 0.3);
    CHECK(spec.seed == 99);
  }
  SUBCASE("translate modifier moves by the level distance") {
    ModifierSpec tr;
    tr.kind = ModifierSpec::Kind::translate;
    tr.level = 0.25;
    const auto spec = modifier_to_perturbation(tr, 7);
    CHECK(spec.kind == perturb::PerturbationSpec::Kind::transform);
    CHECK(spec.transform.translation.norm() == doctest::Approx(0.25).epsilon(1e-12));
  }
}
