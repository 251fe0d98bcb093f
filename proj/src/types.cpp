#include "lidarcmp/types.hpp"

#include <cmath>
#include <string>

namespace lidarcmp {

void Odometry::validate() const {
  const double n = std::sqrt(rotation[0] * rotation[0] + rotation[1] * rotation[1] +
                             rotation[2] * rotation[2] + rotation[3] * rotation[3]);
  if (std::abs(n - 1.0) > 1e-9) {
    throw ValidationError("odometry quaternion norm is " + std::to_string(n) + ", expected 1");
  }
}

void PointCloud::validate() const {
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!points[i].finite()) {
      throw ValidationError("non-finite coordinate at point " + std::to_string(i));
    }
  }
  if (!intensity.empty() && intensity.size() != points.size()) {
    throw ValidationError("intensity length " + std::to_string(intensity.size()) +
                          " does not match point count " + std::to_string(points.size()));
  }
  if (pose) pose->validate();
}

Aabb bounds(const PointCloud& cloud) {
  if (cloud.empty()) throw PreconditionError("bounds: empty cloud");
  Aabb box{cloud.points.front(), cloud.points.front()};
  for (const Vec3& p : cloud.points) {
    box.min.x = std::min(box.min.x, p.x);
    box.min.y = std::min(box.min.y, p.y);
    box.min.z = std::min(box.min.z, p.z);
    box.max.x = std::max(box.max.x, p.x);
    box.max.y = std::max(box.max.y, p.y);
    box.max.z = std::max(box.max.z, p.z);
  }
  return box;
}

Vec3 centroid(const PointCloud& cloud) {
  if (cloud.empty()) throw PreconditionError("centroid: empty cloud");
  Vec3 sum{0, 0, 0};
  for (const Vec3& p : cloud.points) sum += p;
  return sum / static_cast<double>(cloud.size());
}

}  // namespace lidarcmp
