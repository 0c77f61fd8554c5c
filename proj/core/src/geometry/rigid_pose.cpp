#include "hoi/geometry/rigid_pose.h"

#include <cmath>

#include "hoi/common/error.h"

namespace hoi {

namespace {

Quat normalized(const Quat& q) {
  const double n = q.norm();
  if (!std::isfinite(n) || n == 0.0) {
    throw Error(ErrorCode::NonFinite, "rotation quaternion has zero or non-finite norm");
  }
  if (std::abs(n - 1.0) <= 1e-15) {
    return q;
  }
  return Quat(q.coeffs() / n);
}

}  // namespace

RigidPose::RigidPose(const Quat& rotation, const Vec3& translation, double scale)
    : rotation_(normalized(rotation)), translation_(translation) {
  setScale(scale);
}

void RigidPose::setRotation(const Quat& q) {
  rotation_ = normalized(q);
}

void RigidPose::setScale(double s) {
  if (!(s > 0.0) || !std::isfinite(s)) {
    throw Error(ErrorCode::InvalidArgument, "pose scale must be positive and finite");
  }
  scale_ = s;
}

void RigidPose::rotateLeft(const Vec3& omega) {
  rotation_ = expMap(omega) * rotation_;
  rotation_.normalize();
}

RigidPose RigidPose::inverse() const {
  const Quat rInv = rotation_.conjugate();
  return RigidPose(rInv, -(rInv * translation_) / scale_, 1.0 / scale_);
}

RigidPose operator*(const RigidPose& a, const RigidPose& b) {
  return RigidPose(a.rotation_ * b.rotation_,
                   a.scale_ * (a.rotation_ * b.translation_) + a.translation_,
                   a.scale_ * b.scale_);
}

bool RigidPose::operator==(const RigidPose& other) const {
  return rotation_.coeffs() == other.rotation_.coeffs() && translation_ == other.translation_ &&
         scale_ == other.scale_;
}

Vec3 transformPoint(const RigidPose& pose, const Vec3& p) {
  return pose.transformPoint(p);
}

}  // namespace hoi
