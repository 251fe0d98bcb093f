#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "lidarcmp/metrics.hpp"
#include "lidarcmp/perturb.hpp"
#include "lidarcmp/types.hpp"

namespace lidarcmp::harness {

/// Named collection of scans loaded from a manifest or a directory.
class ScanSet {
 public:
  struct Entry {
    std::string id;
    PointCloud cloud;
  };

  void add(std::string id, PointCloud cloud);

  /// Manifest: {"scans": [{"id", "path", "format"?, "pose"?}]} with paths
  /// relative to the manifest file.
  static ScanSet load_manifest(const std::filesystem::path& manifest);

  /// Every *.ply / *.bin in the directory, id = filename stem.
  static ScanSet load_directory(const std::filesystem::path& dir);

  const std::vector<Entry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  const Entry* find(const std::string& id) const;

 private:
  std::vector<Entry> entries_;
};

/// A sweep modifier: a perturbation kind whose strength is scanned over a
/// level grid. Levels map onto PerturbationSpec fields per kind: noise ->
/// std_dev, random/clustered outliers -> count, downsample_random ->
/// fraction, downsample_voxel -> cell, translate -> distance along a seeded
/// random direction, rotate -> angle about a seeded random axis, scale ->
/// uniform factor, skew -> xy shear coefficient.
struct ModifierSpec {
  enum class Kind {
    identity,
    noise,
    random_outliers,
    clustered_outliers,
    downsample_random,
    downsample_voxel,
    translate,
    rotate,
    scale,
    skew,
  };
  Kind kind = Kind::identity;
  double level = 0.0;

  // clustered_outliers shape parameters
  long max_points_per_cluster = 1000;
  double max_radius = 10.0;
  double max_center_dist = 20.0;

  std::string kind_name() const;
  static Kind kind_from_name(const std::string& name);
  static ModifierSpec parse(const std::string& text);  // "noise:0.5", "translate:0.2"
  nlohmann::json to_json() const;
};

/// Builds the concrete perturbation for one cell; `cell_seed` drives both the
/// perturbation stream and any random direction/axis the modifier needs.
perturb::PerturbationSpec modifier_to_perturbation(const ModifierSpec& mod,
                                                   std::uint64_t cell_seed);

/// Deterministic per-cell seed: master folded with scan id, level index and
/// modifier kind so any single cell can be replayed in isolation.
std::uint64_t cell_seed(std::uint64_t master, const std::string& scan_id, std::size_t level_index,
                        const std::string& modifier_kind);

struct RunOptions {
  std::uint64_t seed = 0;
  int jobs = 0;  // 0 = hardware concurrency
};

struct SweepCell {
  std::string scan_id;
  std::size_t level_index = 0;
  std::string metric;
  double value = 0.0;
  std::optional<std::string> error;
};

struct SweepRow {
  std::string metric;
  double level = 0.0;
  double mean = 0.0;
  double stddev = 0.0;
  std::size_t n_ok = 0;
  std::size_t n_err = 0;
};

struct SweepReport {
  std::string modifier;
  std::vector<double> levels;                 // strictly increasing
  std::vector<std::string> metric_names;      // input order
  std::vector<SweepRow> rows;                 // one per (metric, level)
  std::map<std::string, double> spearman_rho; // per metric, over all cells
  std::vector<SweepCell> cells;               // raw values, error cells included
  std::uint64_t seed = 0;

  nlohmann::json to_json() const;
  std::string to_csv() const;

  const SweepRow* row(const std::string& metric, std::size_t level_index) const;
  /// Mean-value curve for one metric in level order; NaN where a level had
  /// no successful cells.
  std::vector<double> mean_curve(const std::string& metric) const;
};

/// For each scan and level: perturb with a level-scaled spec (the prototype's
/// level field is replaced per grid entry) and evaluate every metric against
/// the original. Metric failures are recorded per cell, never fatal.
/// Comparisons run f(original, perturbed); for ICP that means source =
/// original, target = perturbed.
SweepReport sensitivity_sweep(const ScanSet& scans, const ModifierSpec& modifier,
                              const std::vector<double>& levels,
                              const std::vector<metrics::MetricSpec>& specs,
                              const RunOptions& opts = {});

struct AccuracyRow {
  std::string metric;
  std::string modifier;
  double level = 0.0;
  double accuracy = 0.0;  // hits / scans; ties count as misses
  std::size_t hits = 0;
  std::size_t total = 0;
  std::size_t n_err = 0;
};

struct AccuracyReport {
  std::vector<AccuracyRow> rows;
  std::uint64_t seed = 0;

  nlohmann::json to_json() const;
  std::string to_csv() const;
  const AccuracyRow* row(const std::string& metric, const std::string& modifier) const;
};

/// Perturbs each scan, compares it against every original with each metric,
/// and scores a hit when the best value (min for distances, max for
/// similarities) lands on the true source.
AccuracyReport accuracy_eval(const ScanSet& scans, const ModifierSpec& modifier,
                             const std::vector<metrics::MetricSpec>& specs,
                             const RunOptions& opts = {});

/// Multi-modifier convenience; rows accumulate in call order.
AccuracyReport accuracy_eval(const ScanSet& scans, const std::vector<ModifierSpec>& modifiers,
                             const std::vector<metrics::MetricSpec>& specs,
                             const RunOptions& opts = {});

struct SelftestRow {
  std::string metric;
  std::string self_consistency;  // "pass" / "fail"
  std::string symmetry;          // "pass" / "fail" / "exempt"
  std::string sensitivity;       // responds to a small perturbation
  std::string efficiency;        // single evaluation under the time budget
  std::string range;             // declared range containment, or "n/a"
  double self_value = 0.0;       // observed f(a, a)
  double max_asymmetry = 0.0;

  bool all_pass() const;
};

struct SelftestReport {
  std::vector<SelftestRow> rows;
  double time_budget_s = 60.0;
  std::uint64_t seed = 0;

  nlohmann::json to_json() const;
  std::string to_csv() const;
  const SelftestRow* row(const std::string& metric) const;
};

/// Executable check of the five metric conditions: self-consistency,
/// symmetry (ICP exempt), sensitivity, efficiency, range. Failures are data,
/// not errors.
SelftestReport condition_selftest(const ScanSet& scans,
                                  const std::vector<metrics::MetricSpec>& specs,
                                  const RunOptions& opts = {});

struct TimingRow {
  std::string metric;
  std::size_t cloud_size = 0;
  int repetitions = 0;
  double mean_s = 0.0;
  double std_s = 0.0;
  std::string status;  // "ok" or "timeout"
};

struct TimingReport {
  std::vector<TimingRow> rows;  // sorted by size, then fastest first
  std::uint64_t seed = 0;

  nlohmann::json to_json() const;
  std::string to_csv() const;
  const TimingRow* row(const std::string& metric, std::size_t size) const;
};

/// Times each metric on synthetic uniform cloud pairs of the given sizes.
/// One warm-up call is discarded; a warm-up exceeding `timeout_s` marks the
/// row "timeout" and skips the repetitions.
TimingReport timing_bench(const std::vector<metrics::MetricSpec>& specs,
                          const std::vector<std::size_t>& sizes, int repetitions,
                          const RunOptions& opts = {}, double timeout_s = 120.0);

struct PairwiseRow {
  std::string id;
  std::string metric;
  double value = 0.0;
  double wall_time_s = 0.0;
  std::optional<std::string> error;
};

struct PairwiseReport {
  std::vector<PairwiseRow> rows;
  std::map<std::string, std::pair<double, double>> summary;  // metric -> (mean, std)
  std::vector<std::string> unmatched;  // ids present on one side only

  nlohmann::json to_json() const;
  std::string to_csv() const;
};

/// Compares scans with matching ids across the two sets, one row per
/// (id, metric); ids missing a counterpart are listed and skipped.
PairwiseReport pairwise_compare(const ScanSet& real, const ScanSet& sim,
                                const std::vector<metrics::MetricSpec>& specs,
                                const RunOptions& opts = {});

/// Spearman rank correlation with average ranks for ties; 0 when either
/// side has no rank variance.
double spearman_rho(const std::vector<double>& x, const std::vector<double>& y);

/// The paper's metric battery: bev, chamfer (raw and voxel-1), histogram
/// (random 100/1k/10k, voxel 1/2), icp, voxel_iou, dcd alpha 1/10/100/1000.
std::vector<metrics::MetricSpec> default_metric_battery();

}  // namespace lidarcmp::harness
