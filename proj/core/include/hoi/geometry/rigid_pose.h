#pragma once

#include "hoi/geometry/rotation.h"

namespace hoi {

/// Similarity transform applied as x -> rotation * (scale * x) + translation.
/// Scale is per-sequence for object meshes; the rigid solvers never change it.
class RigidPose {
 public:
  RigidPose() = default;
  RigidPose(const Quat& rotation, const Vec3& translation, double scale = 1.0);

  static RigidPose identity() {
    return {};
  }

  const Quat& rotation() const {
    return rotation_;
  }
  const Vec3& translation() const {
    return translation_;
  }
  double scale() const {
    return scale_;
  }

  void setRotation(const Quat& q);
  void setTranslation(const Vec3& t) {
    translation_ = t;
  }
  void setScale(double s);

  /// Left-multiplies the rotation by expMap(omega); the quaternion is renormalized.
  void rotateLeft(const Vec3& omega);

  Vec3 transformPoint(const Vec3& p) const {
    return rotation_ * (scale_ * p) + translation_;
  }

  /// World point to object-local coordinates.
  Vec3 inverseTransformPoint(const Vec3& x) const {
    return (rotation_.conjugate() * (x - translation_)) / scale_;
  }

  RigidPose inverse() const;

  /// (a * b).transformPoint(p) == a.transformPoint(b.transformPoint(p)).
  friend RigidPose operator*(const RigidPose& a, const RigidPose& b);

  bool operator==(const RigidPose& other) const;

 private:
  Quat rotation_ = Quat::Identity();
  Vec3 translation_ = Vec3::Zero();
  double scale_ = 1.0;
};

Vec3 transformPoint(const RigidPose& pose, const Vec3& p);

}  // namespace hoi
