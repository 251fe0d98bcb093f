#pragma once

#include <cstdint>

#include "lidarcmp/types.hpp"

namespace lidarcmp {

/// Uniform cloud in an origin-centered cube of the given half-extent, with
/// intensity. Used by the timing benchmark.
PointCloud make_uniform_cloud(std::size_t n, double half_extent, std::uint64_t seed);

struct LidarScanOptions {
  std::size_t ground_points = 14000;  // concentric rings on the ground plane
  std::size_t wall_points = 6000;     // vertical structures
  int rings = 32;
  double max_range = 40.0;            // meters
  double sensor_height = 1.8;
  int walls = 8;                      // random vertical rectangles per scan
  bool with_intensity = true;
};

/// Synthetic scan resembling a spinning LiDAR: ground-plane rings plus a few
/// seeded vertical walls. Different seeds give structurally distinct scans
/// over a shared ring pattern.
PointCloud make_lidar_scan(std::uint64_t seed, const LidarScanOptions& opts = {});

/// Single origin-centered ring of `n` points at the given radius (z = 0).
PointCloud make_ring_scan(std::size_t n, double radius);

}  // namespace lidarcmp
