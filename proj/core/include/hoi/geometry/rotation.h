#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace hoi {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Quat = Eigen::Quaterniond;

/// Cross-product matrix: skew(a) * b == a.cross(b).
Mat3 skew(const Vec3& a);

/// Exponential map from a rotation vector (axis * angle, radians) to a unit
/// quaternion. Exact for zero input: returns the identity bit-for-bit.
Quat expMap(const Vec3& omega);

/// Logarithm of a unit quaternion; the result has norm in [0, pi].
Vec3 logMap(const Quat& q);

/// Geodesic angle (radians, in [0, pi]) of the relative rotation a^-1 b.
double geodesicAngle(const Quat& a, const Quat& b);

/// Normalized spherical interpolation along the shorter arc.
Quat slerp(const Quat& a, const Quat& b, double t);

}  // namespace hoi
