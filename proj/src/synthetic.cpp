#include "lidarcmp/synthetic.hpp"

#include <cmath>

#include "lidarcmp/rng.hpp"

namespace lidarcmp {

PointCloud make_uniform_cloud(std::size_t n, double half_extent, std::uint64_t seed) {
  SplitMix64 rng(seed);
  PointCloud cloud;
  cloud.points.reserve(n);
  cloud.intensity.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    cloud.points.push_back({rng.uniform(-half_extent, half_extent),
                            rng.uniform(-half_extent, half_extent),
                            rng.uniform(-half_extent, half_extent)});
    cloud.intensity.push_back(rng.uniform());
  }
  return cloud;
}

PointCloud make_lidar_scan(std::uint64_t seed, const LidarScanOptions& opts) {
  SplitMix64 rng(seed);
  PointCloud cloud;
  cloud.points.reserve(opts.ground_points + opts.wall_points);
  if (opts.with_intensity) cloud.intensity.reserve(opts.ground_points + opts.wall_points);

  // Ground rings: ranges follow the channel elevation pattern of a spinning
  // sensor, azimuth jittered so scans are not lattice-aligned.
  const std::size_t per_ring = opts.ground_points / static_cast<std::size_t>(opts.rings);
  for (int ring = 0; ring < opts.rings; ++ring) {
    // Elevation angles spread below the horizon; nearer rings are denser.
    const double frac = (ring + 1.0) / opts.rings;
    const double radius = opts.max_range * frac * frac;
    for (std::size_t i = 0; i < per_ring; ++i) {
      const double az = 2.0 * M_PI * (static_cast<double>(i) + rng.uniform()) /
                        static_cast<double>(per_ring);
      cloud.points.push_back({radius * std::cos(az), radius * std::sin(az),
                              -opts.sensor_height + 0.02 * rng.gaussian()});
      if (opts.with_intensity) cloud.intensity.push_back(0.3 + 0.1 * rng.uniform());
    }
  }

  // Vertical walls: seeded rectangles facing the sensor at random azimuths.
  const std::size_t per_wall =
      opts.walls > 0 ? opts.wall_points / static_cast<std::size_t>(opts.walls) : 0;
  for (int w = 0; w < opts.walls; ++w) {
    const double az = rng.uniform(0.0, 2.0 * M_PI);
    const double range = rng.uniform(0.25 * opts.max_range, 0.9 * opts.max_range);
    const double width = rng.uniform(2.0, 8.0);
    const double height = rng.uniform(2.0, 6.0);
    const Vec3 center{range * std::cos(az), range * std::sin(az), 0.0};
    const Vec3 along{-std::sin(az), std::cos(az), 0.0};
    for (std::size_t i = 0; i < per_wall; ++i) {
      const double u = rng.uniform(-0.5, 0.5) * width;
      const double v = rng.uniform(0.0, height) - opts.sensor_height;
      cloud.points.push_back(
          {center.x + u * along.x + 0.01 * rng.gaussian(),
           center.y + u * along.y + 0.01 * rng.gaussian(), v});
      if (opts.with_intensity) cloud.intensity.push_back(0.5 + 0.2 * rng.uniform());
    }
  }
  return cloud;
}

PointCloud make_ring_scan(std::size_t n, double radius) {
  PointCloud cloud;
  cloud.points.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double az = 2.0 * M_PI * static_cast<double>(i) / static_cast<double>(n);
    cloud.points.push_back({radius * std::cos(az), radius * std::sin(az), 0.0});
  }
  return cloud;
}

}  // namespace lidarcmp
