#pragma once

#include <array>

#include "lidarcmp/types.hpp"

namespace lidarcmp {

/// 3x3 linear part (rotation/scale/shear) plus a translation, meters.
/// Row-major: apply(p) = linear * p + translation.
struct Affine {
  std::array<std::array<double, 3>, 3> linear{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};
  Vec3 translation{0, 0, 0};

  static Affine identity() { return {}; }

  /// Rotations applied in x, y, z order (radians): R = Rz * Ry * Rx.
  static Affine rotation_euler(double rx, double ry, double rz);
  /// Rodrigues rotation about a unit axis.
  static Affine rotation_axis_angle(const Vec3& axis, double angle);
  static Affine scaling(double s) { return scaling(s, s, s); }
  static Affine scaling(double sx, double sy, double sz);
  /// Unit shear: ones on the diagonal, the given off-diagonal coefficients.
  static Affine shear(double xy, double xz, double yx, double yz, double zx, double zy);
  static Affine translation_of(const Vec3& t);

  Vec3 apply(const Vec3& p) const {
    return {linear[0][0] * p.x + linear[0][1] * p.y + linear[0][2] * p.z + translation.x,
            linear[1][0] * p.x + linear[1][1] * p.y + linear[1][2] * p.z + translation.y,
            linear[2][0] * p.x + linear[2][1] * p.y + linear[2][2] * p.z + translation.z};
  }

  double det() const;

  /// Composition: (a * b).apply(p) == a.apply(b.apply(p)).
  friend Affine operator*(const Affine& a, const Affine& b);
};

}  // namespace lidarcmp
