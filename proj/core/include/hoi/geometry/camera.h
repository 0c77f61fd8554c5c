#pragma once

#include "hoi/geometry/rotation.h"

namespace hoi {

/// Points closer than this (meters, along +z) are not projectable.
inline constexpr double kDepthEpsilon = 1e-6;

/// Pinhole intrinsics. The camera frame is the world frame: +z looks forward.
struct CameraModel {
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 0;
  int height = 0;

  /// Throws InvalidArgument when the intrinsics violate their invariants.
  void validate() const;

  /// Throws BehindCamera when p.z() <= kDepthEpsilon.
  Vec2 project(const Vec3& p) const;

  /// d(project)/dp, 2x3. Same precondition as project().
  Eigen::Matrix<double, 2, 3> projectJacobian(const Vec3& p) const;

  Vec3 unproject(const Vec2& uv, double depth) const;

  /// Intrinsics for an image resampled by `factor` (e.g. 0.5 halves resolution).
  CameraModel scaled(double factor) const;

  bool inImage(const Vec2& uv) const {
    return uv.x() >= 0.0 && uv.y() >= 0.0 && uv.x() < width && uv.y() < height;
  }

  bool operator==(const CameraModel&) const = default;
};

Vec2 project(const CameraModel& cam, const Vec3& p);

}  // namespace hoi
