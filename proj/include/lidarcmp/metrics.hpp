#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

#include "lidarcmp/affine.hpp"
#include "lidarcmp/types.hpp"

namespace lidarcmp::metrics {

/// 0 means identical for distances, 1 means identical for similarities.
enum class Orientation { distance, similarity };

inline double identity_value(Orientation o) { return o == Orientation::similarity ? 1.0 : 0.0; }

enum class MetricKind { chamfer, dcd, emd, histogram, icp, voxel_iou, bev };

MetricKind metric_kind_from_name(const std::string& name);
std::string metric_kind_name(MetricKind kind);

struct IcpParams {
  int max_iterations = 50;
  double convergence_tol = 1e-6;        // change in mean correspondence error, meters
  double max_correspondence_dist = 2.0; // inlier radius, meters

  void validate() const;
};

struct SamplingSpec {
  enum class Mode { random, voxel };
  Mode mode = Mode::random;
  int n = 1000;             // random mode: sample size
  std::uint64_t seed = 0;   // random mode
  double cell = 1.0;        // voxel mode: cell edge, meters
};

struct MetricSpec {
  MetricKind kind = MetricKind::chamfer;
  double alpha = 1.0;                    // dcd
  SamplingSpec sampling{};               // histogram
  int bins = 256;                        // histogram
  double minkowski_order = 1.0;          // histogram
  double voxel_size = 0.5;               // voxel_iou
  double cell_size = 0.5;                // bev
  IcpParams icp{};
  std::optional<double> pre_downsample;  // voxel cell applied to both clouds first
  std::size_t emd_cap = 4096;

  void validate() const;

  /// Short stable label, e.g. "dcd[alpha=1]", "histogram[random,n=1000]".
  std::string name() const;

  Orientation orientation() const;

  nlohmann::json params_json() const;

  /// Parses the CLI's compact form: name[:key=value]*, e.g.
  /// "dcd:alpha=100", "histogram:sampling=voxel:cell=1".
  static MetricSpec parse(const std::string& text);
  static MetricSpec from_json(const nlohmann::json& j);
};

struct MetricResult {
  double value = 0.0;
  Orientation orientation = Orientation::distance;
  double wall_time_s = 0.0;
  MetricSpec spec{};
  nlohmann::json extra;  // metric-specific detail (emd total, icp iterations...)

  /// Stable wire format: {metric, params, value, orientation, wall_time_s}.
  nlohmann::json to_json() const;
};

/// Eq.-style symmetric sum of mean *squared* nearest-neighbor distances,
/// in m^2. `pre_downsample` voxel-downsamples both clouds first.
MetricResult chamfer(const PointCloud& a, const PointCloud& b,
                     std::optional<double> pre_downsample = std::nullopt);

/// Density-aware chamfer distance, bounded [0,1]. The per-target count n
/// is the number of opposing-cloud points whose nearest neighbor is that
/// target (floored at 1); the kernel is exp(-alpha * unsquared distance).
MetricResult dcd(const PointCloud& a, const PointCloud& b, double alpha = 1.0,
                 std::optional<double> pre_downsample = std::nullopt);

/// Exact earth mover's distance between equal-size clouds: minimum over
/// bijections of the summed unsquared Euclidean distances, computed by an
/// O(n^3) assignment solver. `value` is the mean per point; the total is in
/// extra["total"]. Sizes above `size_cap` are refused.
MetricResult emd(const PointCloud& a, const PointCloud& b, std::size_t size_cap = 4096);

/// Pairwise-distance histogram comparison. Each cloud independently: sample
/// (random n with seed, or voxel downsample), compute all pairwise
/// distances, normalize by that cloud's own maximum pairwise distance, bin
/// into `bins` equal-width bins over [0,1], normalize counts to unit sum.
/// value = Minkowski distance of the given order between the two frequency
/// vectors, scaled by `bins`.
MetricResult histogram_distance(const PointCloud& a, const PointCloud& b,
                                const SamplingSpec& sampling = {}, int bins = 256,
                                double minkowski_order = 1.0);

struct IcpResult {
  double rmse = 0.0;            // over inlier correspondences, final iteration
  int iterations = 0;
  bool converged = false;
  std::size_t inliers = 0;
  Affine transform;             // maps source into the target frame
};

/// Point-to-point ICP from an identity initialization; value is the final
/// inlier RMSE. Not symmetric in (source, target). Throws PreconditionError
/// if an iteration finds zero inliers (message carries the iteration).
MetricResult icp_rmse(const PointCloud& source, const PointCloud& target,
                      const IcpParams& params = {});

/// Full registration detail behind icp_rmse.
IcpResult icp_align(const PointCloud& source, const PointCloud& target,
                    const IcpParams& params = {});

/// IoU of occupied voxel sets over a shared origin-anchored grid.
MetricResult voxel_iou(const PointCloud& a, const PointCloud& b, double voxel_size = 0.5);

/// L1 distance between the two clouds' normalized top-down (x-y) occupancy
/// histograms on a shared grid anchored at the union bounds; range [0,2].
MetricResult bev_distance(const PointCloud& a, const PointCloud& b, double cell_size = 0.5);

/// Runs the spec'd metric with wall-clock timing.
MetricResult evaluate(const MetricSpec& spec, const PointCloud& a, const PointCloud& b);

struct TwoStepResult {
  double dcd_alpha1 = 0.0;
  std::optional<double> chamfer;  // computed only when the trigger fires
  bool similar = false;
  double trigger = 0.9;

  nlohmann::json to_json() const;
};

/// Two-step comparison: DCD(alpha=1) first; when it exceeds `trigger`, a
/// chamfer distance grades how far apart the scans are.
TwoStepResult two_step_compare(const PointCloud& a, const PointCloud& b, double trigger = 0.9);

struct TransferResult {
  PointCloud cloud;
  double matched_fraction = 0.0;
  std::size_t matched = 0;
};

/// Copies intensity onto `sim` from each point's nearest `real` point within
/// `radius` (closed ball). Unmatched points keep sim's own intensity, or 0
/// when sim had none.
TransferResult transfer_intensity(const PointCloud& sim, const PointCloud& real,
                                  double radius = 1.0);

}  // namespace lidarcmp::metrics
