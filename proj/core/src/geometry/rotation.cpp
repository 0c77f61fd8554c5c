#include "hoi/geometry/rotation.h"

#include <cmath>

namespace hoi {

Mat3 skew(const Vec3& a) {
  Mat3 m;
  m << 0.0, -a.z(), a.y(), a.z(), 0.0, -a.x(), -a.y(), a.x(), 0.0;
  return m;
}

Quat expMap(const Vec3& omega) {
  const double theta = omega.norm();
  if (theta == 0.0) {
    return Quat::Identity();
  }
  const double half = 0.5 * theta;
  // sin(x)/x series below 1e-4 keeps the small-angle branch accurate to ~1e-17.
  const double k = theta < 1e-4 ? 0.5 - theta * theta / 48.0 : std::sin(half) / theta;
  Quat q(std::cos(half), k * omega.x(), k * omega.y(), k * omega.z());
  q.normalize();
  return q;
}

Vec3 logMap(const Quat& qIn) {
  Quat q = qIn;
  if (q.w() < 0.0) {
    q.coeffs() = -q.coeffs();
  }
  const Vec3 v = q.vec();
  const double s = v.norm();
  if (s == 0.0) {
    return Vec3::Zero();
  }
  const double theta = 2.0 * std::atan2(s, q.w());
  return v * (theta / s);
}

double geodesicAngle(const Quat& a, const Quat& b) {
  return logMap(a.conjugate() * b).norm();
}

Quat slerp(const Quat& a, const Quat& b, double t) {
  Quat bb = b;
  if (a.dot(b) < 0.0) {
    bb.coeffs() = -bb.coeffs();
  }
  const Vec3 delta = logMap(a.conjugate() * bb);
  Quat q = a * expMap(t * delta);
  q.normalize();
  return q;
}

}  // namespace hoi
