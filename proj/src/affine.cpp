#include "lidarcmp/affine.hpp"

#include <cmath>

namespace lidarcmp {

Affine Affine::rotation_euler(double rx, double ry, double rz) {
  const double cx = std::cos(rx), sx = std::sin(rx);
  const double cy = std::cos(ry), sy = std::sin(ry);
  const double cz = std::cos(rz), sz = std::sin(rz);
  Affine X, Y, Z;
  X.linear = {{{1, 0, 0}, {0, cx, -sx}, {0, sx, cx}}};
  Y.linear = {{{cy, 0, sy}, {0, 1, 0}, {-sy, 0, cy}}};
  Z.linear = {{{cz, -sz, 0}, {sz, cz, 0}, {0, 0, 1}}};
  return Z * Y * X;
}

Affine Affine::rotation_axis_angle(const Vec3& axis, double angle) {
  const double c = std::cos(angle), s = std::sin(angle), t = 1.0 - c;
  const double x = axis.x, y = axis.y, z = axis.z;
  Affine a;
  a.linear = {{{t * x * x + c, t * x * y - s * z, t * x * z + s * y},
               {t * x * y + s * z, t * y * y + c, t * y * z - s * x},
               {t * x * z - s * y, t * y * z + s * x, t * z * z + c}}};
  return a;
}

Affine Affine::scaling(double sx, double sy, double sz) {
  Affine a;
  a.linear = {{{sx, 0, 0}, {0, sy, 0}, {0, 0, sz}}};
  return a;
}

Affine Affine::shear(double xy, double xz, double yx, double yz, double zx, double zy) {
  Affine a;
  a.linear = {{{1, xy, xz}, {yx, 1, yz}, {zx, zy, 1}}};
  return a;
}

Affine Affine::translation_of(const Vec3& t) {
  Affine a;
  a.translation = t;
  return a;
}

double Affine::det() const {
  const auto& m = linear;
  return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
         m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
         m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

Affine operator*(const Affine& a, const Affine& b) {
  Affine r;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      r.linear[i][j] = a.linear[i][0] * b.linear[0][j] + a.linear[i][1] * b.linear[1][j] +
                       a.linear[i][2] * b.linear[2][j];
    }
  }
  r.translation = a.apply(b.translation);
  return r;
}

}  // namespace lidarcmp
