#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace lidarcmp {

/// Base for all library errors; CLI maps the subclasses to exit codes.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Filesystem-level failure (missing file, unwritable path, short read).
struct IoError : Error {
  using Error::Error;
};

/// Malformed file contents. Carries the byte offset where parsing stopped
/// when it is known.
struct FormatError : Error {
  explicit FormatError(const std::string& msg, long long offset = -1)
      : Error(offset >= 0 ? msg + " (byte offset " + std::to_string(offset) + ")" : msg),
        byte_offset(offset) {}
  long long byte_offset;
};

/// Data violates an invariant (non-finite coordinate, length mismatch...).
struct ValidationError : Error {
  using Error::Error;
};

/// An operation was called outside its precondition (empty cloud, size
/// mismatch, bad parameter).
struct PreconditionError : Error {
  using Error::Error;
};

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  double& operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }
  double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
  Vec3& operator+=(const Vec3& o) {
    x += o.x;
    y += o.y;
    z += o.z;
    return *this;
  }
  bool operator==(const Vec3& o) const { return x == o.x && y == o.y && z == o.z; }

  double norm_sq() const { return x * x + y * y + z * z; }
  double norm() const { return std::sqrt(norm_sq()); }
  bool finite() const { return std::isfinite(x) && std::isfinite(y) && std::isfinite(z); }
};

inline double dist_sq(const Vec3& a, const Vec3& b) { return (a - b).norm_sq(); }
inline double dist(const Vec3& a, const Vec3& b) { return std::sqrt(dist_sq(a, b)); }

/// Rounds to float32 and widens back. The volatile store blocks the GCC 11
/// vectorizer from eliding the narrowing (observed at -O3), which file
/// round-trip guarantees depend on.
inline double narrow_f32(double v) {
  volatile float f = static_cast<float>(v);
  return static_cast<double>(f);
}

/// Sensor pose at capture time: translation in meters, unit quaternion
/// (x, y, z, w).
struct Odometry {
  Vec3 translation{0, 0, 0};
  std::array<double, 4> rotation{0, 0, 0, 1};

  /// Quaternion norm must be 1 within 1e-9.
  void validate() const;
};

/// Axis-aligned bounding box, min <= max component-wise.
struct Aabb {
  Vec3 min;
  Vec3 max;

  Vec3 extent() const { return max - min; }
  double diagonal() const { return extent().norm(); }
  bool contains(const Vec3& p) const {
    return p.x >= min.x && p.x <= max.x && p.y >= min.y && p.y <= max.y && p.z >= min.z &&
           p.z <= max.z;
  }
};

/// One LiDAR scan: ordered 3D points in meters with optional per-point
/// intensity. Immutable by convention once built; metrics never mutate it.
struct PointCloud {
  std::vector<Vec3> points;
  std::vector<double> intensity;  // empty, or same length as points
  std::string frame_id;
  std::optional<Odometry> pose;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  bool has_intensity() const { return !intensity.empty(); }

  /// Throws ValidationError on non-finite coordinates (naming the row) or
  /// an intensity length mismatch. Empty clouds are valid here; metrics
  /// reject them at entry instead.
  void validate() const;
};

/// Tight bounding box. Throws PreconditionError on an empty cloud.
Aabb bounds(const PointCloud& cloud);

/// Arithmetic mean of the points. Throws PreconditionError on empty.
Vec3 centroid(const PointCloud& cloud);

}  // namespace lidarcmp
