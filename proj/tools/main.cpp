// lidarcmp command line: compare, perturb, sweep, accuracy, selftest, bench,
// pairwise, plot.
//
// Exit codes: 0 success, 64 usage, 65 format/validation, 66 I/O,
// 70 precondition. Per-cell metric failures inside harness runs are embedded
// in the report, not exit codes.

#include <CLI11.hpp>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "lidarcmp/harness.hpp"
#include "lidarcmp/io.hpp"
#include "lidarcmp/metrics.hpp"
#include "lidarcmp/perturb.hpp"
#include "lidarcmp/svg_plot.hpp"
#include "lidarcmp/types.hpp"

namespace {

constexpr int kExitUsage = 64;
constexpr int kExitFormat = 65;
constexpr int kExitIo = 66;
constexpr int kExitPrecondition = 70;

/// Missing argument after config-file layering; maps to the usage exit code.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void require_arg(const std::string& value, const char* flag) {
  if (value.empty()) throw UsageError(std::string("missing required option ") + flag);
}

namespace fs = std::filesystem;
using nlohmann::json;
using namespace lidarcmp;

fs::path resolve_out_dir(const std::string& flag_value) {
  if (!flag_value.empty()) return flag_value;
  if (const char* env = std::getenv("LIDARCMP_OUT_DIR")) return env;
  return ".";
}

std::vector<double> parse_doubles(const std::string& csv) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= csv.size()) {
    const std::size_t comma = csv.find(',', start);
    const std::string tok = csv.substr(start, comma == std::string::npos ? comma : comma - start);
    if (!tok.empty()) out.push_back(std::stod(tok));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

std::vector<metrics::MetricSpec> parse_metrics(const std::string& csv) {
  if (csv.empty() || csv == "all") return harness::default_metric_battery();
  std::vector<metrics::MetricSpec> specs;
  std::size_t start = 0;
  while (start <= csv.size()) {
    const std::size_t comma = csv.find(',', start);
    const std::string tok = csv.substr(start, comma == std::string::npos ? comma : comma - start);
    if (!tok.empty()) specs.push_back(metrics::MetricSpec::parse(tok));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (specs.empty()) throw PreconditionError("no metrics given");
  return specs;
}

harness::ScanSet load_scans(const std::string& path) {
  if (fs::is_directory(path)) return harness::ScanSet::load_directory(path);
  return harness::ScanSet::load_manifest(path);
}

json load_config(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path);
  try {
    json cfg;
    in >> cfg;
    return cfg;
  } catch (const json::exception& e) {
    throw FormatError("config " + path + ": " + e.what());
  }
}

/// Config-file values fill in flags the user did not pass; flags win.
template <class T>
void layer(const json& cfg, CLI::App* cmd, const std::string& flag, const std::string& key,
           T& var) {
  if (cmd->count(flag) == 0 && cfg.contains(key)) var = cfg.at(key).get<T>();
}

void write_reports(const fs::path& dir, const std::string& name, const std::string& csv,
                   const json& report, const json& config) {
  fs::create_directories(dir);
  write_text_atomic(dir / (name + ".csv"), csv);
  write_text_atomic(dir / (name + ".json"), report.dump(2) + "\n");
  write_text_atomic(dir / (name + ".config.json"), config.dump(2) + "\n");
  std::cerr << "wrote " << (dir / name).string() << ".{csv,json,config.json}\n";
}

struct CompareArgs {
  std::string path_a, path_b;
  std::string metric = "dcd:alpha=1";
  double alpha = 1.0;
  int bins = 256;
  double order = 1.0;
  int sample_n = 1000;
  std::uint64_t sample_seed = 0;
  double sample_cell = 1.0;
  std::string sampling;
  double voxel_size = 0.5;
  double cell_size = 0.5;
  double vds = 0.0;
  double trigger = 0.9;
  CLI::App* cmd = nullptr;
};

int run_compare(const CompareArgs& a) {
  const PointCloud ca = load_cloud(a.path_a);
  const PointCloud cb = load_cloud(a.path_b);

  if (a.metric == "two_step") {
    const auto r = metrics::two_step_compare(ca, cb, a.trigger);
    std::cout << r.to_json().dump(2) << "\n";
    return 0;
  }

  metrics::MetricSpec spec = metrics::MetricSpec::parse(a.metric);
  if (a.cmd->count("--alpha")) spec.alpha = a.alpha;
  if (a.cmd->count("--bins")) spec.bins = a.bins;
  if (a.cmd->count("--order")) spec.minkowski_order = a.order;
  if (a.cmd->count("--sampling")) {
    spec.sampling.mode = a.sampling == "voxel" ? metrics::SamplingSpec::Mode::voxel
                                               : metrics::SamplingSpec::Mode::random;
  }
  if (a.cmd->count("--n")) spec.sampling.n = a.sample_n;
  if (a.cmd->count("--sampling-seed")) spec.sampling.seed = a.sample_seed;
  if (a.cmd->count("--sampling-cell")) spec.sampling.cell = a.sample_cell;
  if (a.cmd->count("--voxel-size")) spec.voxel_size = a.voxel_size;
  if (a.cmd->count("--cell-size")) spec.cell_size = a.cell_size;
  if (a.cmd->count("--vds")) spec.pre_downsample = a.vds;
  spec.validate();

  const auto result = metrics::evaluate(spec, ca, cb);
  std::cout << result.to_json().dump(2) << "\n";
  return 0;
}

struct PerturbArgs {
  std::string input, output;
  std::string kind = "noise";
  std::uint64_t seed = 0;
  double std_dev = 0.0;
  long count = 0;
  long clusters = 0;
  long max_points_per_cluster = 1000;
  double max_radius = 1.0;
  double max_center_dist = 20.0;
  double fraction = 1.0;
  double cell = 1.0;
  std::string rotate, translate, shear;
  std::string scale;
  std::string format;
  CLI::App* cmd = nullptr;
};

perturb::PerturbationSpec build_perturbation(const PerturbArgs& a) {
  using Kind = perturb::PerturbationSpec::Kind;
  perturb::PerturbationSpec spec;
  spec.kind = perturb::PerturbationSpec::kind_from_name(a.kind);
  spec.seed = a.seed;
  spec.std_dev = a.std_dev;
  spec.count = a.count;
  spec.n_clusters = a.clusters;
  spec.max_points_per_cluster = a.max_points_per_cluster;
  spec.max_radius = a.max_radius;
  spec.max_center_dist = a.max_center_dist;
  spec.fraction = a.fraction;
  spec.cell = a.cell;
  if (spec.kind == Kind::transform) {
    // applied to each point in this order: scale, shear, rotate, translate
    Affine t = Affine::identity();
    if (!a.scale.empty()) {
      const auto v = parse_doubles(a.scale);
      t = (v.size() == 1 ? Affine::scaling(v[0]) : Affine::scaling(v.at(0), v.at(1), v.at(2))) * t;
    }
    if (!a.shear.empty()) {
      const auto v = parse_doubles(a.shear);
      if (v.size() != 6) throw PreconditionError("--shear expects xy,xz,yx,yz,zx,zy");
      t = Affine::shear(v[0], v[1], v[2], v[3], v[4], v[5]) * t;
    }
    if (!a.rotate.empty()) {
      const auto v = parse_doubles(a.rotate);
      if (v.size() != 3) throw PreconditionError("--rotate expects rx,ry,rz radians");
      t = Affine::rotation_euler(v[0], v[1], v[2]) * t;
    }
    if (!a.translate.empty()) {
      const auto v = parse_doubles(a.translate);
      if (v.size() != 3) throw PreconditionError("--translate expects x,y,z meters");
      t = Affine::translation_of({v[0], v[1], v[2]}) * t;
    }
    spec.transform = t;
  }
  spec.validate();
  return spec;
}

int run_perturb(const PerturbArgs& a) {
  const PointCloud in = load_cloud(a.input);
  const CloudFormat in_format = detect_format(a.input);
  const auto spec = build_perturbation(a);
  const PointCloud out = perturb::apply(in, spec);

  const CloudFormat out_format = a.format.empty() ? in_format : format_from_name(a.format);
  save(out, a.output, out_format);

  json config{{"command", "perturb"},
              {"input", a.input},
              {"output", a.output},
              {"format", format_name(out_format)},
              {"spec", spec.to_json()}};
  write_text_atomic(a.output + ".config.json", config.dump(2) + "\n");
  std::cerr << "wrote " << a.output << " (" << out.size() << " points)\n";
  return 0;
}

struct HarnessArgs {
  std::string scans;
  std::string scans_b;  // pairwise only
  std::string metrics_csv = "all";
  std::string modifier = "noise";
  std::string levels;
  double min_level = 0.0, max_level = 2.0;
  int steps = 11;
  std::vector<std::string> modifiers;  // accuracy
  std::string sizes = "1000,10000,100000";
  int reps = 5;
  double timeout = 120.0;
  std::uint64_t seed = 0;
  int jobs = 0;
  std::string out_dir;
  std::string config_path;
  bool print_json = false;
  long max_points_per_cluster = 1000;
  double max_radius = 10.0;
  double max_center_dist = 20.0;
  CLI::App* cmd = nullptr;
};

void layer_common(HarnessArgs& a, const json& cfg) {
  layer(cfg, a.cmd, "--scans", "scans", a.scans);
  layer(cfg, a.cmd, "--metrics", "metrics", a.metrics_csv);
  layer(cfg, a.cmd, "--seed", "seed", a.seed);
  layer(cfg, a.cmd, "--jobs", "jobs", a.jobs);
  layer(cfg, a.cmd, "--out-dir", "out_dir", a.out_dir);
}

int run_sweep(HarnessArgs& a) {
  const json cfg = load_config(a.config_path);
  layer_common(a, cfg);
  layer(cfg, a.cmd, "--modifier", "modifier", a.modifier);
  layer(cfg, a.cmd, "--levels", "levels", a.levels);
  layer(cfg, a.cmd, "--min", "min", a.min_level);
  layer(cfg, a.cmd, "--max", "max", a.max_level);
  layer(cfg, a.cmd, "--steps", "steps", a.steps);
  require_arg(a.scans, "--scans");

  const auto scans = load_scans(a.scans);
  const auto specs = parse_metrics(a.metrics_csv);
  harness::ModifierSpec mod;
  mod.kind = harness::ModifierSpec::kind_from_name(a.modifier);
  mod.max_points_per_cluster = a.max_points_per_cluster;
  mod.max_radius = a.max_radius;
  mod.max_center_dist = a.max_center_dist;

  std::vector<double> levels;
  if (!a.levels.empty()) {
    levels = parse_doubles(a.levels);
  } else {
    if (a.steps < 2) throw PreconditionError("--steps must be >= 2");
    for (int i = 0; i < a.steps; ++i) {
      levels.push_back(a.min_level + (a.max_level - a.min_level) * i / (a.steps - 1));
    }
  }

  harness::RunOptions opts{a.seed, a.jobs};
  const auto report = harness::sensitivity_sweep(scans, mod, levels, specs, opts);

  json config{{"command", "sweep"},       {"scans", a.scans}, {"modifier", a.modifier},
              {"levels", levels},         {"metrics", a.metrics_csv},
              {"seed", a.seed},           {"jobs", a.jobs}};
  write_reports(resolve_out_dir(a.out_dir), "sweep", report.to_csv(), report.to_json(), config);

  if (a.print_json) {
    std::cout << report.to_json().dump(2) << "\n";
  } else {
    std::printf("%-28s %12s\n", "metric", "spearman_rho");
    for (const auto& name : report.metric_names) {
      std::printf("%-28s %12.4f\n", name.c_str(), report.spearman_rho.at(name));
    }
  }
  return 0;
}

int run_accuracy(HarnessArgs& a) {
  const json cfg = load_config(a.config_path);
  layer_common(a, cfg);
  if (a.cmd->count("--modifier") == 0 && cfg.contains("modifiers")) {
    a.modifiers = cfg.at("modifiers").get<std::vector<std::string>>();
  }
  if (a.modifiers.empty()) a.modifiers = {"identity"};
  require_arg(a.scans, "--scans");

  const auto scans = load_scans(a.scans);
  const auto specs = parse_metrics(a.metrics_csv);
  std::vector<harness::ModifierSpec> mods;
  for (const auto& text : a.modifiers) {
    auto m = harness::ModifierSpec::parse(text);
    m.max_points_per_cluster = a.max_points_per_cluster;
    m.max_radius = a.max_radius;
    m.max_center_dist = a.max_center_dist;
    mods.push_back(m);
  }

  harness::RunOptions opts{a.seed, a.jobs};
  const auto report = harness::accuracy_eval(scans, mods, specs, opts);

  json config{{"command", "accuracy"},    {"scans", a.scans}, {"modifiers", a.modifiers},
              {"metrics", a.metrics_csv}, {"seed", a.seed},   {"jobs", a.jobs}};
  write_reports(resolve_out_dir(a.out_dir), "accuracy", report.to_csv(), report.to_json(), config);

  if (a.print_json) {
    std::cout << report.to_json().dump(2) << "\n";
  } else {
    std::printf("%-28s %-20s %8s\n", "metric", "modifier", "accuracy");
    for (const auto& row : report.rows) {
      std::printf("%-28s %-20s %8.3f\n", row.metric.c_str(), row.modifier.c_str(), row.accuracy);
    }
  }
  return 0;
}

int run_selftest(HarnessArgs& a) {
  const json cfg = load_config(a.config_path);
  layer_common(a, cfg);
  require_arg(a.scans, "--scans");

  const auto scans = load_scans(a.scans);
  const auto specs = parse_metrics(a.metrics_csv);
  harness::RunOptions opts{a.seed, a.jobs};
  const auto report = harness::condition_selftest(scans, specs, opts);

  json config{{"command", "selftest"},
              {"scans", a.scans},
              {"metrics", a.metrics_csv},
              {"seed", a.seed},
              {"jobs", a.jobs}};
  write_reports(resolve_out_dir(a.out_dir), "selftest", report.to_csv(), report.to_json(), config);

  if (a.print_json) {
    std::cout << report.to_json().dump(2) << "\n";
  } else {
    std::printf("%-28s %-6s %-9s %-12s %-11s %-6s\n", "metric", "self", "symmetry", "sensitivity",
                "efficiency", "range");
    for (const auto& row : report.rows) {
      std::printf("%-28s %-6s %-9s %-12s %-11s %-6s\n", row.metric.c_str(),
                  row.self_consistency.c_str(), row.symmetry.c_str(), row.sensitivity.c_str(),
                  row.efficiency.c_str(), row.range.c_str());
    }
  }
  return 0;
}

int run_bench(HarnessArgs& a) {
  const json cfg = load_config(a.config_path);
  layer(cfg, a.cmd, "--metrics", "metrics", a.metrics_csv);
  layer(cfg, a.cmd, "--sizes", "sizes", a.sizes);
  layer(cfg, a.cmd, "--reps", "reps", a.reps);
  layer(cfg, a.cmd, "--timeout", "timeout", a.timeout);
  layer(cfg, a.cmd, "--seed", "seed", a.seed);
  layer(cfg, a.cmd, "--out-dir", "out_dir", a.out_dir);

  const auto specs = parse_metrics(a.metrics_csv);
  std::vector<std::size_t> sizes;
  for (const double v : parse_doubles(a.sizes)) sizes.push_back(static_cast<std::size_t>(v));

  harness::RunOptions opts{a.seed, a.jobs};
  const auto report = harness::timing_bench(specs, sizes, a.reps, opts, a.timeout);

  json config{{"command", "bench"}, {"metrics", a.metrics_csv}, {"sizes", a.sizes},
              {"reps", a.reps},     {"timeout", a.timeout},     {"seed", a.seed}};
  write_reports(resolve_out_dir(a.out_dir), "bench", report.to_csv(), report.to_json(), config);

  if (a.print_json) {
    std::cout << report.to_json().dump(2) << "\n";
  } else {
    std::printf("%-28s %10s %12s %12s %s\n", "metric", "size", "mean_s", "std_s", "status");
    for (const auto& row : report.rows) {
      std::printf("%-28s %10zu %12.6f %12.6f %s\n", row.metric.c_str(), row.cloud_size, row.mean_s,
                  row.std_s, row.status.c_str());
    }
  }
  return 0;
}

int run_pairwise(HarnessArgs& a) {
  const json cfg = load_config(a.config_path);
  layer(cfg, a.cmd, "--real", "real", a.scans);
  layer(cfg, a.cmd, "--sim", "sim", a.scans_b);
  layer(cfg, a.cmd, "--metrics", "metrics", a.metrics_csv);
  layer(cfg, a.cmd, "--out-dir", "out_dir", a.out_dir);
  require_arg(a.scans, "--real");
  require_arg(a.scans_b, "--sim");

  const auto real = load_scans(a.scans);
  const auto sim = load_scans(a.scans_b);
  const auto specs = parse_metrics(a.metrics_csv);
  harness::RunOptions opts{a.seed, a.jobs};
  const auto report = harness::pairwise_compare(real, sim, specs, opts);

  json config{{"command", "pairwise"},
              {"real", a.scans},
              {"sim", a.scans_b},
              {"metrics", a.metrics_csv}};
  write_reports(resolve_out_dir(a.out_dir), "pairwise", report.to_csv(), report.to_json(), config);

  if (a.print_json) {
    std::cout << report.to_json().dump(2) << "\n";
  } else {
    std::printf("%-28s %12s %12s\n", "metric", "mean", "std");
    for (const auto& [metric, ms] : report.summary) {
      std::printf("%-28s %12.4f %12.4f\n", metric.c_str(), ms.first, ms.second);
    }
    for (const auto& id : report.unmatched) std::printf("unmatched: %s\n", id.c_str());
  }
  return 0;
}

struct PlotArgs {
  std::string report;
  std::string kind = "sensitivity_curves";
  std::string output;
};

int run_plot(const PlotArgs& a) {
  std::ifstream in(a.report);
  if (!in) throw IoError("cannot open report " + a.report);
  json report;
  try {
    in >> report;
  } catch (const json::exception& e) {
    throw FormatError("report " + a.report + ": " + e.what());
  }
  const std::string svg = svg::render(report, a.kind);
  write_text_atomic(a.output, svg);
  std::cerr << "wrote " << a.output << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lidarcmp: geometric similarity metrics and evaluation harness for LiDAR scans"};
  app.require_subcommand(1);

  CompareArgs cmp;
  CLI::App* compare = app.add_subcommand("compare", "Compare two clouds with one metric");
  cmp.cmd = compare;
  compare->add_option("a", cmp.path_a, "first cloud (.ply/.bin)")->required();
  compare->add_option("b", cmp.path_b, "second cloud (.ply/.bin)")->required();
  compare->add_option("--metric", cmp.metric,
                      "metric spec: chamfer|dcd|emd|histogram|icp|voxel_iou|bev|two_step, with "
                      "optional :key=value options (e.g. dcd:alpha=10)");
  compare->add_option("--alpha", cmp.alpha, "dcd sensitivity");
  compare->add_option("--bins", cmp.bins, "histogram bins");
  compare->add_option("--order", cmp.order, "histogram Minkowski order");
  compare->add_option("--sampling", cmp.sampling, "histogram sampling: random|voxel");
  compare->add_option("--n", cmp.sample_n, "histogram random-sample size");
  compare->add_option("--sampling-seed", cmp.sample_seed, "histogram sampling seed");
  compare->add_option("--sampling-cell", cmp.sample_cell, "histogram voxel sampling cell (m)");
  compare->add_option("--voxel-size", cmp.voxel_size, "voxel_iou cell (m)");
  compare->add_option("--cell-size", cmp.cell_size, "bev cell (m)");
  compare->add_option("--vds", cmp.vds, "voxel pre-downsample cell for chamfer/dcd (m)");
  compare->add_option("--trigger", cmp.trigger, "two_step dcd trigger");

  PerturbArgs prt;
  CLI::App* perturb_cmd = app.add_subcommand("perturb", "Apply a seeded perturbation to a cloud");
  prt.cmd = perturb_cmd;
  perturb_cmd->add_option("input", prt.input, "input cloud")->required();
  perturb_cmd
      ->add_option("--kind", prt.kind,
                   "noise|random_outliers|clustered_outliers|downsample_random|"
                   "downsample_voxel|transform|identity")
      ->required();
  perturb_cmd->add_option("--out,-o", prt.output, "output cloud path")->required();
  perturb_cmd->add_option("--seed", prt.seed, "64-bit seed");
  perturb_cmd->add_option("--std", prt.std_dev, "noise sigma per axis (m)");
  perturb_cmd->add_option("--count", prt.count, "random outlier count");
  perturb_cmd->add_option("--clusters", prt.clusters, "cluster count");
  perturb_cmd->add_option("--max-points-per-cluster", prt.max_points_per_cluster);
  perturb_cmd->add_option("--max-radius", prt.max_radius, "max cluster radius (m)");
  perturb_cmd->add_option("--max-center-dist", prt.max_center_dist,
                          "cluster centers within this ball of the centroid (m)");
  perturb_cmd->add_option("--fraction", prt.fraction, "random downsample keep fraction");
  perturb_cmd->add_option("--cell", prt.cell, "voxel downsample cell (m)");
  perturb_cmd->add_option("--rotate", prt.rotate, "euler rx,ry,rz (radians)");
  perturb_cmd->add_option("--translate", prt.translate, "x,y,z (m)");
  perturb_cmd->add_option("--scale", prt.scale, "s or sx,sy,sz");
  perturb_cmd->add_option("--shear", prt.shear, "xy,xz,yx,yz,zx,zy");
  perturb_cmd->add_option("--format", prt.format, "ply_ascii|ply_binary|kitti_bin");

  auto add_common = [&](CLI::App* cmd, HarnessArgs& a) {
    a.cmd = cmd;
    cmd->add_option("--metrics", a.metrics_csv,
                    "comma-separated metric specs, or 'all' for the full battery");
    cmd->add_option("--seed", a.seed, "master seed");
    cmd->add_option("--jobs", a.jobs, "worker threads (0 = all cores)");
    cmd->add_option("--out-dir", a.out_dir, "output directory (default $LIDARCMP_OUT_DIR or .)");
    cmd->add_option("--config", a.config_path, "JSON config; flags override file values");
    cmd->add_flag("--json", a.print_json, "print the report JSON to stdout");
  };

  HarnessArgs sweep_args;
  CLI::App* sweep = app.add_subcommand("sweep", "Sensitivity sweep of metrics vs modifier level");
  add_common(sweep, sweep_args);
  sweep->add_option("--scans", sweep_args.scans, "scan manifest JSON or directory");
  sweep->add_option("--modifier", sweep_args.modifier,
                    "noise|random_outliers|clustered_outliers|downsample_random|downsample_voxel|"
                    "translate|rotate|scale|skew");
  sweep->add_option("--levels", sweep_args.levels, "explicit comma-separated level grid");
  sweep->add_option("--min", sweep_args.min_level, "grid start");
  sweep->add_option("--max", sweep_args.max_level, "grid end");
  sweep->add_option("--steps", sweep_args.steps, "grid size");
  sweep->add_option("--max-points-per-cluster", sweep_args.max_points_per_cluster);
  sweep->add_option("--max-radius", sweep_args.max_radius);
  sweep->add_option("--max-center-dist", sweep_args.max_center_dist);

  HarnessArgs acc_args;
  CLI::App* accuracy = app.add_subcommand("accuracy", "Pair-identification accuracy per metric");
  add_common(accuracy, acc_args);
  accuracy->add_option("--scans", acc_args.scans, "scan manifest JSON or directory");
  accuracy->add_option("--modifier", acc_args.modifiers,
                       "modifier kind:level (repeatable), e.g. noise:0.2 translate:0.5");
  accuracy->add_option("--max-points-per-cluster", acc_args.max_points_per_cluster);
  accuracy->add_option("--max-radius", acc_args.max_radius);
  accuracy->add_option("--max-center-dist", acc_args.max_center_dist);

  HarnessArgs self_args;
  CLI::App* selftest = app.add_subcommand("selftest", "Metric condition matrix");
  add_common(selftest, self_args);
  selftest->add_option("--scans", self_args.scans, "scan manifest JSON or directory");

  HarnessArgs bench_args;
  CLI::App* bench = app.add_subcommand("bench", "Wall-time benchmark on synthetic clouds");
  add_common(bench, bench_args);
  bench->add_option("--sizes", bench_args.sizes, "comma-separated cloud sizes");
  bench->add_option("--reps", bench_args.reps, "repetitions per metric (>= 3)");
  bench->add_option("--timeout", bench_args.timeout, "per-call timeout probe (s)");

  HarnessArgs pair_args;
  CLI::App* pairwise = app.add_subcommand("pairwise", "Compare matching ids across two scan sets");
  add_common(pairwise, pair_args);
  pairwise->add_option("--real", pair_args.scans, "real scans: manifest or directory");
  pairwise->add_option("--sim", pair_args.scans_b, "simulated scans: manifest or directory");

  PlotArgs plot_args;
  CLI::App* plot = app.add_subcommand("plot", "Render a report JSON as SVG");
  plot->add_option("report", plot_args.report, "report .json produced by a harness command")
      ->required();
  plot->add_option("--kind", plot_args.kind,
                   "sensitivity_curves|accuracy_heatmap|timing_bars|distribution_hist");
  plot->add_option("--out,-o", plot_args.output, "output .svg path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*compare) return run_compare(cmp);
    if (*perturb_cmd) return run_perturb(prt);
    if (*sweep) return run_sweep(sweep_args);
    if (*accuracy) return run_accuracy(acc_args);
    if (*selftest) return run_selftest(self_args);
    if (*bench) return run_bench(bench_args);
    if (*pairwise) return run_pairwise(pair_args);
    if (*plot) return run_plot(plot_args);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return kExitIo;
  } catch (const FormatError& e) {
    std::cerr << "format error: " << e.what() << "\n";
    return kExitFormat;
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kExitFormat;
  } catch (const PreconditionError& e) {
    std::cerr << "precondition error: " << e.what() << "\n";
    return kExitPrecondition;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kExitUsage;
}
