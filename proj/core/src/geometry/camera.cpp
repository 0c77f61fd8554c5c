#include "hoi/geometry/camera.h"

#include <algorithm>
#include <cmath>

#include "hoi/common/error.h"

namespace hoi {

void CameraModel::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "camera focal lengths must be positive");
  }
  if (width <= 0 || height <= 0) {
    throw Error(ErrorCode::InvalidArgument, "camera image size must be positive");
  }
  if (!(cx >= 0.0 && cx < width && cy >= 0.0 && cy < height)) {
    throw Error(ErrorCode::InvalidArgument, "principal point outside the image");
  }
}

Vec2 CameraModel::project(const Vec3& p) const {
  if (!(p.z() > kDepthEpsilon)) {
    throw Error(ErrorCode::BehindCamera, "point at depth " + std::to_string(p.z()));
  }
  return {fx * p.x() / p.z() + cx, fy * p.y() / p.z() + cy};
}

Eigen::Matrix<double, 2, 3> CameraModel::projectJacobian(const Vec3& p) const {
  if (!(p.z() > kDepthEpsilon)) {
    throw Error(ErrorCode::BehindCamera, "point at depth " + std::to_string(p.z()));
  }
  const double iz = 1.0 / p.z();
  Eigen::Matrix<double, 2, 3> j;
  j << fx * iz, 0.0, -fx * p.x() * iz * iz, 0.0, fy * iz, -fy * p.y() * iz * iz;
  return j;
}

Vec3 CameraModel::unproject(const Vec2& uv, double depth) const {
  return {(uv.x() - cx) / fx * depth, (uv.y() - cy) / fy * depth, depth};
}

CameraModel CameraModel::scaled(double factor) const {
  CameraModel c;
  c.fx = fx * factor;
  c.fy = fy * factor;
  c.cx = cx * factor;
  c.cy = cy * factor;
  c.width = std::max(1, static_cast<int>(std::lround(width * factor)));
  c.height = std::max(1, static_cast<int>(std::lround(height * factor)));
  return c;
}

Vec2 project(const CameraModel& cam, const Vec3& p) {
  return cam.project(p);
}

}  // namespace hoi
