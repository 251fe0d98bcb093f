#include "lidarcmp/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <thread>

#include "lidarcmp/io.hpp"
#include "lidarcmp/rng.hpp"
#include "lidarcmp/synthetic.hpp"

namespace lidarcmp::harness {
namespace {

using Clock = std::chrono::steady_clock;

std::string csv_num(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

/// Runs fn(i) for i in [0, n) across `jobs` threads. Each index owns its
/// output slot, so results are identical for any thread count.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
  if (jobs <= 0) jobs = static_cast<int>(std::thread::hardware_concurrency());
  if (jobs < 1) jobs = 1;
  jobs = std::min<int>(jobs, static_cast<int>(n));
  if (jobs <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(jobs);
  for (int t = 0; t < jobs; ++t) {
    pool.emplace_back([&]() {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        fn(i);
      }
    });
  }
  for (auto& th : pool) th.join();
}

Vec3 random_unit_vector(SplitMix64& rng) {
  for (;;) {
    const Vec3 v{rng.gaussian(), rng.gaussian(), rng.gaussian()};
    const double norm = v.norm();
    if (norm > 1e-12) return v / norm;
  }
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (const double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double stddev_of(const std::vector<double>& v, double mean) {
  if (v.size() < 2) return 0.0;
  double s = 0.0;
  for (const double x : v) s += (x - mean) * (x - mean);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

std::vector<double> average_ranks(const std::vector<double>& v) {
  const std::size_t n = v.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(n, 0.0);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
    const double rank = 0.5 * (static_cast<double>(i) + static_cast<double>(j)) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

double spearman_rho(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw PreconditionError("spearman_rho: need two equal-length series of >= 2 values");
  }
  const std::vector<double> rx = average_ranks(x);
  const std::vector<double> ry = average_ranks(y);
  const double mx = mean_of(rx), my = mean_of(ry);
  double cov = 0.0, vx = 0.0, vy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    cov += (rx[i] - mx) * (ry[i] - my);
    vx += (rx[i] - mx) * (rx[i] - mx);
    vy += (ry[i] - my) * (ry[i] - my);
  }
  if (vx == 0.0 || vy == 0.0) return 0.0;
  return cov / std::sqrt(vx * vy);
}

// --- ScanSet ----------------------------------------------------------------

void ScanSet::add(std::string id, PointCloud cloud) {
  if (find(id)) throw PreconditionError("duplicate scan id: " + id);
  entries_.push_back(Entry{std::move(id), std::move(cloud)});
}

const ScanSet::Entry* ScanSet::find(const std::string& id) const {
  for (const Entry& e : entries_) {
    if (e.id == id) return &e;
  }
  return nullptr;
}

ScanSet ScanSet::load_manifest(const std::filesystem::path& manifest) {
  std::ifstream in(manifest);
  if (!in) throw IoError("cannot open manifest " + manifest.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("manifest " + manifest.string() + ": " + e.what());
  }
  if (!j.contains("scans") || !j["scans"].is_array()) {
    throw FormatError("manifest " + manifest.string() + " lacks a 'scans' array");
  }
  const auto base = manifest.parent_path();
  ScanSet set;
  for (const auto& entry : j["scans"]) {
    const std::string id = entry.at("id").get<std::string>();
    std::filesystem::path path = entry.at("path").get<std::string>();
    if (path.is_relative()) path = base / path;
    PointCloud cloud = entry.contains("format")
                           ? (format_from_name(entry["format"].get<std::string>()) ==
                                      CloudFormat::kitti_bin
                                  ? load_kitti_bin(path)
                                  : load_ply(path))
                           : load_cloud(path);
    if (entry.contains("pose")) {
      Odometry pose;
      const auto& pj = entry["pose"];
      const auto t = pj.at("translation").get<std::array<double, 3>>();
      const auto r = pj.at("rotation").get<std::array<double, 4>>();
      pose.translation = {t[0], t[1], t[2]};
      pose.rotation = r;
      pose.validate();
      cloud.pose = pose;
    }
    set.add(id, std::move(cloud));
  }
  return set;
}

ScanSet ScanSet::load_directory(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw IoError(dir.string() + " is not a directory");
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    const auto ext = entry.path().extension();
    if (entry.is_regular_file() && (ext == ".ply" || ext == ".bin")) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  ScanSet set;
  for (const auto& f : files) set.add(f.stem().string(), load_cloud(f));
  return set;
}

// --- modifiers ---------------------------------------------------------------

std::string ModifierSpec::kind_name() const {
  switch (kind) {
    case Kind::identity: return "identity";
    case Kind::noise: return "noise";
    case Kind::random_outliers: return "random_outliers";
    case Kind::clustered_outliers: return "clustered_outliers";
    case Kind::downsample_random: return "downsample_random";
    case Kind::downsample_voxel: return "downsample_voxel";
    case Kind::translate: return "translate";
    case Kind::rotate: return "rotate";
    case Kind::scale: return "scale";
    case Kind::skew: return "skew";
  }
  return "?";
}

ModifierSpec::Kind ModifierSpec::kind_from_name(const std::string& name) {
  if (name == "identity") return Kind::identity;
  if (name == "noise") return Kind::noise;
  if (name == "random_outliers") return Kind::random_outliers;
  if (name == "clustered_outliers") return Kind::clustered_outliers;
  if (name == "downsample_random") return Kind::downsample_random;
  if (name == "downsample_voxel") return Kind::downsample_voxel;
  if (name == "translate") return Kind::translate;
  if (name == "rotate") return Kind::rotate;
  if (name == "scale") return Kind::scale;
  if (name == "skew") return Kind::skew;
  throw PreconditionError("unknown modifier kind: " + name);
}

ModifierSpec ModifierSpec::parse(const std::string& text) {
  ModifierSpec mod;
  const std::size_t colon = text.find(':');
  mod.kind = kind_from_name(text.substr(0, colon));
  if (colon != std::string::npos) mod.level = std::stod(text.substr(colon + 1));
  return mod;
}

nlohmann::json ModifierSpec::to_json() const {
  nlohmann::json j{{"kind", kind_name()}, {"level", level}};
  if (kind == Kind::clustered_outliers) {
    j["max_points_per_cluster"] = max_points_per_cluster;
    j["max_radius"] = max_radius;
    j["max_center_dist"] = max_center_dist;
  }
  return j;
}

perturb::PerturbationSpec modifier_to_perturbation(const ModifierSpec& mod,
                                                   std::uint64_t cell_seed_value) {
  using PK = perturb::PerturbationSpec::Kind;
  perturb::PerturbationSpec spec;
  spec.seed = cell_seed_value;
  SplitMix64 rng(mix_seed(cell_seed_value, hash_str("modifier_direction")));
  switch (mod.kind) {
    case ModifierSpec::Kind::identity:
      spec.kind = PK::identity;
      break;
    case ModifierSpec::Kind::noise:
      spec.kind = PK::noise;
      spec.std_dev = mod.level;
      break;
    case ModifierSpec::Kind::random_outliers:
      spec.kind = PK::random_outliers;
      spec.count = std::lround(mod.level);
      break;
    case ModifierSpec::Kind::clustered_outliers:
      spec.kind = PK::clustered_outliers;
      spec.n_clusters = std::lround(mod.level);
      spec.max_points_per_cluster = mod.max_points_per_cluster;
      spec.max_radius = mod.max_radius;
      spec.max_center_dist = mod.max_center_dist;
      break;
    case ModifierSpec::Kind::downsample_random:
      spec.kind = PK::downsample_random;
      spec.fraction = mod.level;
      break;
    case ModifierSpec::Kind::downsample_voxel:
      spec.kind = PK::downsample_voxel;
      spec.cell = mod.level;
      break;
    case ModifierSpec::Kind::translate: {
      spec.kind = PK::transform;
      spec.transform = Affine::translation_of(random_unit_vector(rng) * mod.level);
      break;
    }
    case ModifierSpec::Kind::rotate: {
      spec.kind = PK::transform;
      spec.transform = Affine::rotation_axis_angle(random_unit_vector(rng), mod.level);
      break;
    }
    case ModifierSpec::Kind::scale:
      spec.kind = PK::transform;
      spec.transform = Affine::scaling(mod.level);
      break;
    case ModifierSpec::Kind::skew:
      spec.kind = PK::transform;
      spec.transform = Affine::shear(mod.level, 0, 0, 0, 0, 0);
      break;
  }
  return spec;
}

std::uint64_t cell_seed(std::uint64_t master, const std::string& scan_id, std::size_t level_index,
                        const std::string& modifier_kind) {
  std::uint64_t s = mix_seed(master, hash_str(scan_id));
  s = mix_seed(s, static_cast<std::uint64_t>(level_index));
  return mix_seed(s, hash_str(modifier_kind));
}

namespace {

/// Histogram sampling inside harness runs re-seeds per cell so repeated
/// evaluations see fresh sampling noise, the way the reflexivity study is
/// set up.
metrics::MetricSpec reseed_for_cell(const metrics::MetricSpec& spec, std::uint64_t cell) {
  metrics::MetricSpec s = spec;
  if (s.kind == metrics::MetricKind::histogram &&
      s.sampling.mode == metrics::SamplingSpec::Mode::random) {
    s.sampling.seed = mix_seed(cell, hash_str("histogram_sampling"));
  }
  return s;
}

}  // namespace

// --- sensitivity sweep --------------------------------------------------------

SweepReport sensitivity_sweep(const ScanSet& scans, const ModifierSpec& modifier,
                              const std::vector<double>& levels,
                              const std::vector<metrics::MetricSpec>& specs,
                              const RunOptions& opts) {
  if (scans.size() == 0) throw PreconditionError("sweep: no scans");
  if (levels.size() < 2) throw PreconditionError("sweep: need >= 2 levels");
  for (std::size_t i = 1; i < levels.size(); ++i) {
    if (levels[i] <= levels[i - 1]) {
      throw PreconditionError("sweep: levels must be strictly increasing");
    }
  }

  SweepReport report;
  report.modifier = modifier.kind_name();
  report.levels = levels;
  report.seed = opts.seed;
  for (const auto& s : specs) report.metric_names.push_back(s.name());

  const std::size_t n_tasks = scans.size() * levels.size();
  std::vector<std::vector<SweepCell>> task_cells(n_tasks);

  parallel_for(n_tasks, opts.jobs, [&](std::size_t task) {
    const std::size_t scan_i = task / levels.size();
    const std::size_t level_i = task % levels.size();
    const auto& entry = scans.entries()[scan_i];
    const std::uint64_t seed = cell_seed(opts.seed, entry.id, level_i, modifier.kind_name());

    std::vector<SweepCell>& out = task_cells[task];
    PointCloud perturbed;
    std::optional<std::string> perturb_error;
    try {
      ModifierSpec leveled = modifier;
      leveled.level = levels[level_i];
      perturbed = perturb::apply(entry.cloud, modifier_to_perturbation(leveled, seed));
    } catch (const std::exception& e) {
      perturb_error = e.what();
    }
    for (const auto& spec : specs) {
      SweepCell cell;
      cell.scan_id = entry.id;
      cell.level_index = level_i;
      cell.metric = spec.name();
      if (perturb_error) {
        cell.error = "perturbation failed: " + *perturb_error;
      } else {
        try {
          cell.value =
              metrics::evaluate(reseed_for_cell(spec, mix_seed(seed, hash_str(spec.name()))),
                                entry.cloud, perturbed)
                  .value;
        } catch (const std::exception& e) {
          cell.error = e.what();
        }
      }
      out.push_back(std::move(cell));
    }
  });

  for (auto& cells : task_cells) {
    for (auto& c : cells) report.cells.push_back(std::move(c));
  }

  // Aggregate rows and the per-metric rank correlation.
  for (const auto& spec : specs) {
    const std::string name = spec.name();
    std::vector<double> xs, ys;
    for (std::size_t li = 0; li < levels.size(); ++li) {
      std::vector<double> vals;
      std::size_t errs = 0;
      for (const SweepCell& c : report.cells) {
        if (c.metric != name || c.level_index != li) continue;
        if (c.error) {
          ++errs;
        } else {
          vals.push_back(c.value);
          xs.push_back(levels[li]);
          ys.push_back(c.value);
        }
      }
      SweepRow row;
      row.metric = name;
      row.level = levels[li];
      row.n_ok = vals.size();
      row.n_err = errs;
      if (!vals.empty()) {
        row.mean = mean_of(vals);
        row.stddev = stddev_of(vals, row.mean);
      } else {
        row.mean = row.stddev = std::numeric_limits<double>::quiet_NaN();
      }
      report.rows.push_back(row);
    }
    report.spearman_rho[name] = ys.size() >= 2 ? spearman_rho(xs, ys) : 0.0;
  }
  return report;
}

const SweepRow* SweepReport::row(const std::string& metric, std::size_t level_index) const {
  for (const SweepRow& r : rows) {
    if (r.metric == metric && level_index < levels.size() && r.level == levels[level_index]) {
      return &r;
    }
  }
  return nullptr;
}

std::vector<double> SweepReport::mean_curve(const std::string& metric) const {
  std::vector<double> curve;
  for (std::size_t li = 0; li < levels.size(); ++li) {
    const SweepRow* r = row(metric, li);
    curve.push_back(r ? r->mean : std::numeric_limits<double>::quiet_NaN());
  }
  return curve;
}

nlohmann::json SweepReport::to_json() const {
  nlohmann::json rows_j = nlohmann::json::array();
  for (const SweepRow& r : rows) {
    rows_j.push_back({{"metric", r.metric},
                      {"level", r.level},
                      {"mean", r.mean},
                      {"std", r.stddev},
                      {"n_ok", r.n_ok},
                      {"n_err", r.n_err}});
  }
  nlohmann::json errors = nlohmann::json::array();
  for (const SweepCell& c : cells) {
    if (c.error) {
      errors.push_back({{"scan", c.scan_id},
                        {"level_index", c.level_index},
                        {"metric", c.metric},
                        {"error", *c.error}});
    }
  }
  return nlohmann::json{{"report", "sweep"},    {"modifier", modifier},
                        {"levels", levels},     {"metrics", metric_names},
                        {"seed", seed},         {"rows", rows_j},
                        {"spearman_rho", spearman_rho}, {"errors", errors}};
}

std::string SweepReport::to_csv() const {
  std::string out = "metric,level,mean,std,n_ok,n_err,spearman_rho\n";
  for (const SweepRow& r : rows) {
    out += r.metric + "," + csv_num(r.level) + "," + csv_num(r.mean) + "," + csv_num(r.stddev) +
           "," + std::to_string(r.n_ok) + "," + std::to_string(r.n_err) + "," +
           csv_num(spearman_rho.at(r.metric)) + "\n";
  }
  return out;
}

// --- accuracy ----------------------------------------------------------------

AccuracyReport accuracy_eval(const ScanSet& scans, const ModifierSpec& modifier,
                             const std::vector<metrics::MetricSpec>& specs,
                             const RunOptions& opts) {
  return accuracy_eval(scans, std::vector<ModifierSpec>{modifier}, specs, opts);
}

AccuracyReport accuracy_eval(const ScanSet& scans, const std::vector<ModifierSpec>& modifiers,
                             const std::vector<metrics::MetricSpec>& specs,
                             const RunOptions& opts) {
  if (scans.size() < 2) throw PreconditionError("accuracy: need >= 2 scans");
  AccuracyReport report;
  report.seed = opts.seed;

  for (const ModifierSpec& modifier : modifiers) {
    // hit[metric][scan]: 1 when the true original wins, ties are misses.
    const std::size_t n = scans.size();
    std::vector<std::vector<int>> hit(specs.size(), std::vector<int>(n, 0));
    std::vector<std::vector<int>> err(specs.size(), std::vector<int>(n, 0));

    parallel_for(n, opts.jobs, [&](std::size_t si) {
      const auto& entry = scans.entries()[si];
      const std::uint64_t seed = cell_seed(opts.seed, entry.id, 0, modifier.kind_name());
      PointCloud perturbed;
      try {
        perturbed = perturb::apply(entry.cloud, modifier_to_perturbation(modifier, seed));
      } catch (const std::exception&) {
        for (std::size_t mi = 0; mi < specs.size(); ++mi) err[mi][si] = 1;
        return;
      }
      for (std::size_t mi = 0; mi < specs.size(); ++mi) {
        const auto& spec = specs[mi];
        bool any_error = false;
        double best = 0.0;
        std::size_t best_j = 0;
        bool best_tie = false;
        bool first = true;
        for (std::size_t j = 0; j < n; ++j) {
          double v;
          try {
            const auto cellseed = mix_seed(seed, hash_str(scans.entries()[j].id));
            v = metrics::evaluate(reseed_for_cell(spec, mix_seed(cellseed, hash_str(spec.name()))),
                                  scans.entries()[j].cloud, perturbed)
                    .value;
          } catch (const std::exception&) {
            any_error = true;
            continue;
          }
          const bool better = first || (spec.orientation() == metrics::Orientation::distance
                                            ? v < best
                                            : v > best);
          if (better) {
            best = v;
            best_j = j;
            best_tie = false;
            first = false;
          } else if (v == best) {
            best_tie = true;
          }
        }
        if (first) {
          err[mi][si] = 1;  // nothing compared successfully
        } else {
          if (!best_tie && best_j == si) hit[mi][si] = 1;
          if (any_error) err[mi][si] = 1;
        }
      }
    });

    for (std::size_t mi = 0; mi < specs.size(); ++mi) {
      AccuracyRow row;
      row.metric = specs[mi].name();
      row.modifier = modifier.kind_name();
      row.level = modifier.level;
      row.total = n;
      for (std::size_t si = 0; si < n; ++si) {
        row.hits += static_cast<std::size_t>(hit[mi][si]);
        row.n_err += static_cast<std::size_t>(err[mi][si]);
      }
      row.accuracy = static_cast<double>(row.hits) / static_cast<double>(row.total);
      report.rows.push_back(row);
    }
  }
  return report;
}

const AccuracyRow* AccuracyReport::row(const std::string& metric,
                                       const std::string& modifier) const {
  for (const AccuracyRow& r : rows) {
    if (r.metric == metric && r.modifier == modifier) return &r;
  }
  return nullptr;
}

nlohmann::json AccuracyReport::to_json() const {
  nlohmann::json rows_j = nlohmann::json::array();
  for (const AccuracyRow& r : rows) {
    rows_j.push_back({{"metric", r.metric},
                      {"modifier", r.modifier},
                      {"level", r.level},
                      {"accuracy", r.accuracy},
                      {"hits", r.hits},
                      {"total", r.total},
                      {"n_err", r.n_err}});
  }
  return nlohmann::json{{"report", "accuracy"}, {"seed", seed}, {"rows", rows_j}};
}

std::string AccuracyReport::to_csv() const {
  std::string out = "metric,modifier,level,accuracy,hits,total,n_err\n";
  for (const AccuracyRow& r : rows) {
    out += r.metric + "," + r.modifier + "," + csv_num(r.level) + "," + csv_num(r.accuracy) + "," +
           std::to_string(r.hits) + "," + std::to_string(r.total) + "," + std::to_string(r.n_err) +
           "\n";
  }
  return out;
}

// --- condition selftest --------------------------------------------------------

bool SelftestRow::all_pass() const {
  auto ok = [](const std::string& s) { return s == "pass" || s == "exempt"; };
  return ok(self_consistency) && ok(symmetry) && ok(sensitivity) && ok(efficiency) && ok(range);
}

SelftestReport condition_selftest(const ScanSet& scans,
                                  const std::vector<metrics::MetricSpec>& specs,
                                  const RunOptions& opts) {
  if (scans.size() == 0) throw PreconditionError("selftest: need >= 1 scan");
  SelftestReport report;
  report.seed = opts.seed;
  report.rows.resize(specs.size());

  parallel_for(specs.size(), opts.jobs, [&](std::size_t mi) {
    const auto& spec = specs[mi];
    SelftestRow row;
    row.metric = spec.name();
    const double identity = metrics::identity_value(spec.orientation());

    bool self_ok = true, sym_ok = true, sens_ok = true, range_ok = true, eff_ok = true;
    double worst_gap = 0.0;
    try {
      for (std::size_t si = 0; si < scans.size(); ++si) {
        const auto& a = scans.entries()[si].cloud;
        const std::uint64_t seed =
            mix_seed(cell_seed(opts.seed, scans.entries()[si].id, 0, "selftest"),
                     hash_str(spec.name()));

        // Condition 1: self-consistency, exact identity on (a, a).
        const auto t0 = Clock::now();
        const double self_v = metrics::evaluate(reseed_for_cell(spec, seed), a, a).value;
        const double elapsed = std::chrono::duration<double>(Clock::now() - t0).count();
        row.self_value = self_v;
        if (self_v != identity) self_ok = false;
        if (elapsed > report.time_budget_s) eff_ok = false;

        // Condition 3: a visible response to a mild perturbation.
        const PointCloud noisy = perturb::add_noise(a, 0.05, mix_seed(seed, 1));
        const double sens_v =
            metrics::evaluate(reseed_for_cell(spec, mix_seed(seed, 2)), a, noisy).value;
        if (sens_v == identity) sens_ok = false;

        // Condition 5: declared range. [0,1] for dcd / voxel_iou, [0,2] for
        // bev, non-negative and finite otherwise.
        for (const double v : {self_v, sens_v}) {
          if (!std::isfinite(v) || v < 0.0) range_ok = false;
          if ((spec.kind == metrics::MetricKind::dcd ||
               spec.kind == metrics::MetricKind::voxel_iou) &&
              v > 1.0) {
            range_ok = false;
          }
          if (spec.kind == metrics::MetricKind::bev && v > 2.0) range_ok = false;
        }

        // Condition 2: symmetry across pairs (ICP documented as exempt).
        if (spec.kind != metrics::MetricKind::icp) {
          const auto& b = scans.entries()[(si + 1) % scans.size()].cloud;
          const double ab = metrics::evaluate(reseed_for_cell(spec, mix_seed(seed, 3)), a, b).value;
          const double ba = metrics::evaluate(reseed_for_cell(spec, mix_seed(seed, 3)), b, a).value;
          worst_gap = std::max(worst_gap, std::abs(ab - ba));
        }
      }
    } catch (const std::exception&) {
      self_ok = sym_ok = sens_ok = range_ok = eff_ok = false;
    }

    row.max_asymmetry = worst_gap;
    if (worst_gap > 1e-9) sym_ok = false;
    row.self_consistency = self_ok ? "pass" : "fail";
    row.symmetry = spec.kind == metrics::MetricKind::icp ? "exempt" : (sym_ok ? "pass" : "fail");
    row.sensitivity = sens_ok ? "pass" : "fail";
    row.efficiency = eff_ok ? "pass" : "fail";
    row.range = range_ok ? "pass" : "fail";
    report.rows[mi] = std::move(row);
  });
  return report;
}

const SelftestRow* SelftestReport::row(const std::string& metric) const {
  for (const SelftestRow& r : rows) {
    if (r.metric == metric) return &r;
  }
  return nullptr;
}

nlohmann::json SelftestReport::to_json() const {
  nlohmann::json rows_j = nlohmann::json::array();
  for (const SelftestRow& r : rows) {
    rows_j.push_back({{"metric", r.metric},
                      {"self_consistency", r.self_consistency},
                      {"symmetry", r.symmetry},
                      {"sensitivity", r.sensitivity},
                      {"efficiency", r.efficiency},
                      {"range", r.range},
                      {"self_value", r.self_value},
                      {"max_asymmetry", r.max_asymmetry}});
  }
  return nlohmann::json{{"report", "selftest"}, {"seed", seed}, {"rows", rows_j}};
}

std::string SelftestReport::to_csv() const {
  std::string out = "metric,self_consistency,symmetry,sensitivity,efficiency,range\n";
  for (const SelftestRow& r : rows) {
    out += r.metric + "," + r.self_consistency + "," + r.symmetry + "," + r.sensitivity + "," +
           r.efficiency + "," + r.range + "\n";
  }
  return out;
}

// --- timing ------------------------------------------------------------------

TimingReport timing_bench(const std::vector<metrics::MetricSpec>& specs,
                          const std::vector<std::size_t>& sizes, int repetitions,
                          const RunOptions& opts, double timeout_s) {
  if (repetitions < 3) throw PreconditionError("bench: need >= 3 repetitions");
  for (const std::size_t s : sizes) {
    if (s == 0) throw PreconditionError("bench: sizes must be positive");
  }
  TimingReport report;
  report.seed = opts.seed;

  for (const std::size_t size : sizes) {
    const PointCloud a = make_uniform_cloud(size, 20.0, mix_seed(opts.seed, size * 2));
    const PointCloud b = make_uniform_cloud(size, 20.0, mix_seed(opts.seed, size * 2 + 1));
    for (const auto& spec : specs) {
      TimingRow row;
      row.metric = spec.name();
      row.cloud_size = size;
      row.repetitions = repetitions;
      try {
        // Warm-up, also the timeout probe; a metric call cannot be safely
        // interrupted, so the probe result decides whether to continue.
        const auto t0 = Clock::now();
        metrics::evaluate(spec, a, b);
        const double warm = std::chrono::duration<double>(Clock::now() - t0).count();
        if (warm > timeout_s) {
          row.status = "timeout";
        } else {
          std::vector<double> times;
          for (int rep = 0; rep < repetitions; ++rep) {
            const auto r0 = Clock::now();
            metrics::evaluate(spec, a, b);
            times.push_back(std::chrono::duration<double>(Clock::now() - r0).count());
          }
          row.mean_s = mean_of(times);
          row.std_s = stddev_of(times, row.mean_s);
          row.status = "ok";
        }
      } catch (const std::exception& e) {
        row.status = std::string("error: ") + e.what();
      }
      report.rows.push_back(row);
    }
  }
  std::stable_sort(report.rows.begin(), report.rows.end(), [](const TimingRow& a, const TimingRow& b) {
    if (a.cloud_size != b.cloud_size) return a.cloud_size < b.cloud_size;
    return a.mean_s < b.mean_s;
  });
  return report;
}

const TimingRow* TimingReport::row(const std::string& metric, std::size_t size) const {
  for (const TimingRow& r : rows) {
    if (r.metric == metric && r.cloud_size == size) return &r;
  }
  return nullptr;
}

nlohmann::json TimingReport::to_json() const {
  nlohmann::json rows_j = nlohmann::json::array();
  for (const TimingRow& r : rows) {
    rows_j.push_back({{"metric", r.metric},
                      {"size", r.cloud_size},
                      {"repetitions", r.repetitions},
                      {"mean_s", r.mean_s},
                      {"std_s", r.std_s},
                      {"status", r.status}});
  }
  return nlohmann::json{{"report", "timing"}, {"seed", seed}, {"rows", rows_j}};
}

std::string TimingReport::to_csv() const {
  std::string out = "metric,size,repetitions,mean_s,std_s,status\n";
  for (const TimingRow& r : rows) {
    out += r.metric + "," + std::to_string(r.cloud_size) + "," + std::to_string(r.repetitions) +
           "," + csv_num(r.mean_s) + "," + csv_num(r.std_s) + "," + r.status + "\n";
  }
  return out;
}

// --- pairwise ------------------------------------------------------------------

PairwiseReport pairwise_compare(const ScanSet& real, const ScanSet& sim,
                                const std::vector<metrics::MetricSpec>& specs,
                                const RunOptions& opts) {
  PairwiseReport report;
  std::vector<std::pair<const ScanSet::Entry*, const ScanSet::Entry*>> pairs;
  for (const auto& r : real.entries()) {
    const auto* s = sim.find(r.id);
    if (s) {
      pairs.push_back({&r, s});
    } else {
      report.unmatched.push_back(r.id + " (real only)");
    }
  }
  for (const auto& s : sim.entries()) {
    if (!real.find(s.id)) report.unmatched.push_back(s.id + " (sim only)");
  }

  std::vector<std::vector<PairwiseRow>> per_pair(pairs.size());
  parallel_for(pairs.size(), opts.jobs, [&](std::size_t pi) {
    const auto& [r, s] = pairs[pi];
    for (const auto& spec : specs) {
      PairwiseRow row;
      row.id = r->id;
      row.metric = spec.name();
      try {
        const auto res = metrics::evaluate(spec, r->cloud, s->cloud);
        row.value = res.value;
        row.wall_time_s = res.wall_time_s;
      } catch (const std::exception& e) {
        row.error = e.what();
      }
      per_pair[pi].push_back(std::move(row));
    }
  });
  for (auto& rows : per_pair) {
    for (auto& row : rows) report.rows.push_back(std::move(row));
  }

  for (const auto& spec : specs) {
    std::vector<double> vals;
    for (const PairwiseRow& row : report.rows) {
      if (row.metric == spec.name() && !row.error) vals.push_back(row.value);
    }
    if (!vals.empty()) {
      const double m = mean_of(vals);
      report.summary[spec.name()] = {m, stddev_of(vals, m)};
    }
  }
  return report;
}

nlohmann::json PairwiseReport::to_json() const {
  nlohmann::json rows_j = nlohmann::json::array();
  for (const PairwiseRow& r : rows) {
    nlohmann::json j{{"id", r.id}, {"metric", r.metric}};
    if (r.error) {
      j["error"] = *r.error;
    } else {
      j["value"] = r.value;
      j["wall_time_s"] = r.wall_time_s;
    }
    rows_j.push_back(std::move(j));
  }
  nlohmann::json summary_j = nlohmann::json::object();
  for (const auto& [metric, ms] : summary) {
    summary_j[metric] = {{"mean", ms.first}, {"std", ms.second}};
  }
  return nlohmann::json{{"report", "pairwise"},
                        {"rows", rows_j},
                        {"summary", summary_j},
                        {"unmatched", unmatched}};
}

std::string PairwiseReport::to_csv() const {
  std::string out = "id,metric,value,error\n";
  for (const PairwiseRow& r : rows) {
    out += r.id + "," + r.metric + "," + (r.error ? "" : csv_num(r.value)) + "," +
           (r.error ? *r.error : "") + "\n";
  }
  for (const auto& [metric, ms] : summary) {
    out += "__mean__," + metric + "," + csv_num(ms.first) + ",\n";
    out += "__std__," + metric + "," + csv_num(ms.second) + ",\n";
  }
  return out;
}

// --- battery -------------------------------------------------------------------

std::vector<metrics::MetricSpec> default_metric_battery() {
  using metrics::MetricKind;
  using metrics::MetricSpec;
  using metrics::SamplingSpec;
  std::vector<MetricSpec> specs;

  MetricSpec bev;
  bev.kind = MetricKind::bev;
  specs.push_back(bev);

  MetricSpec cham;
  cham.kind = MetricKind::chamfer;
  specs.push_back(cham);

  MetricSpec cham_vds = cham;
  cham_vds.pre_downsample = 1.0;
  specs.push_back(cham_vds);

  for (const int n : {100, 1000, 10000}) {
    MetricSpec hist;
    hist.kind = MetricKind::histogram;
    hist.sampling.mode = SamplingSpec::Mode::random;
    hist.sampling.n = n;
    specs.push_back(hist);
  }
  for (const double cell : {1.0, 2.0}) {
    MetricSpec hist;
    hist.kind = MetricKind::histogram;
    hist.sampling.mode = SamplingSpec::Mode::voxel;
    hist.sampling.cell = cell;
    specs.push_back(hist);
  }

  MetricSpec icp;
  icp.kind = MetricKind::icp;
  specs.push_back(icp);

  MetricSpec viou;
  viou.kind = MetricKind::voxel_iou;
  specs.push_back(viou);

  for (const double alpha : {1000.0, 100.0, 10.0, 1.0}) {
    MetricSpec d;
    d.kind = MetricKind::dcd;
    d.alpha = alpha;
    specs.push_back(d);
  }
  return specs;
}

}  // namespace lidarcmp::harness
