#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "lidarcmp/affine.hpp"
#include "lidarcmp/types.hpp"

namespace lidarcmp::perturb {

/// A seeded, parameterized scan modifier. All randomness comes from the
/// pinned SplitMix64 stream (see rng.hpp), so a spec + seed reproduces the
/// same cloud on any platform.
struct PerturbationSpec {
  enum class Kind {
    identity,
    noise,
    random_outliers,
    clustered_outliers,
    downsample_random,
    downsample_voxel,
    transform,
  };

  Kind kind = Kind::identity;
  std::uint64_t seed = 0;

  double std_dev = 0.0;                  // noise: per-axis sigma, meters
  long count = 0;                        // random_outliers
  long n_clusters = 0;                   // clustered_outliers
  long max_points_per_cluster = 1000;    //   size drawn uniform in [1, max]
  double max_radius = 1.0;               //   cluster radius in (0, max], meters
  double max_center_dist = 20.0;         //   centers within this ball of the centroid
  double fraction = 1.0;                 // downsample_random, (0, 1]
  double cell = 1.0;                     // downsample_voxel, meters
  Affine transform = Affine::identity(); // transform

  void validate() const;
  std::string kind_name() const;

  /// Wire schema shared with the harness and CLI: {kind, params..., seed}.
  nlohmann::json to_json() const;
  static PerturbationSpec from_json(const nlohmann::json& j);

  static Kind kind_from_name(const std::string& name);
};

PointCloud apply(const PointCloud& cloud, const PerturbationSpec& spec);

/// Independent Gaussian(0, std) added to every coordinate; draws consumed
/// point by point in x, y, z order.
PointCloud add_noise(const PointCloud& cloud, double std_dev, std::uint64_t seed);

/// Appends `count` points uniform within bounds(cloud), after the original
/// points. Outliers get intensity 0 when the cloud carries intensity.
PointCloud add_random_outliers(const PointCloud& cloud, long count, std::uint64_t seed);

/// Appends clusters: center uniform in a ball of max_center_dist around the
/// centroid, size uniform in [1, max_points_per_cluster], radius uniform in
/// (0, max_radius], points uniform within the cluster ball.
PointCloud add_clustered_outliers(const PointCloud& cloud, long n_clusters,
                                  long max_points_per_cluster, double max_radius,
                                  double max_center_dist, std::uint64_t seed);

/// Uniform sample without replacement of round(fraction * n) points,
/// order-preserving. Throws PreconditionError when the result would be empty.
PointCloud downsample_random(const PointCloud& cloud, double fraction, std::uint64_t seed);

/// One centroid per occupied voxel (intensity averaged); voxels ordered by
/// first appearance in the input. Deterministic, no seed.
PointCloud downsample_voxel(const PointCloud& cloud, double cell);

/// p -> L p + t for every point; intensity unchanged. Throws on a singular
/// linear part.
PointCloud apply_transform(const PointCloud& cloud, const Affine& t);

}  // namespace lidarcmp::perturb
