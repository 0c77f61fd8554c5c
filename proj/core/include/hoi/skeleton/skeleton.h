#pragma once

#include <compare>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "hoi/geometry/rotation.h"

namespace hoi {

/// Number of contact keypoints in the human joint tree.
inline constexpr int kNumHumanKeypoints = 74;

struct Joint {
  std::string name;
  int parent = -1;  // -1 for the root
  Vec3 offset = Vec3::Zero();  // rest offset from the parent joint, parent frame (m)
  double capsuleRadius = 0.0;  // radius of the bone parent->this; 0 disables
};

/// Contact keypoint named "<part>/<sub-part>", rigidly attached to a joint.
struct Keypoint {
  std::string name;
  int joint = 0;
  Vec3 offset = Vec3::Zero();  // in the owning joint's frame (m)

  std::string part() const;
  std::string subPart() const;
};

struct KeypointId {
  int index = 0;

  auto operator<=>(const KeypointId&) const = default;
};

/// Kinematic tree. Joints are stored parents-first (parent index < own index);
/// the single root is joint 0.
class SkeletonModel {
 public:
  SkeletonModel() = default;
  SkeletonModel(std::vector<Joint> joints, std::vector<Keypoint> keypoints);

  /// The shipped 24-joint humanoid with the 74 joint-tree keypoints.
  static const SkeletonModel& defaultHumanoid();

  const std::vector<Joint>& joints() const {
    return joints_;
  }
  const std::vector<Keypoint>& keypoints() const {
    return keypoints_;
  }
  int numJoints() const {
    return static_cast<int>(joints_.size());
  }
  int numKeypoints() const {
    return static_cast<int>(keypoints_.size());
  }

  std::optional<int> jointIndex(const std::string& name) const;
  /// First keypoint carrying `name` ("part/sub").
  std::optional<KeypointId> keypoint(const std::string& name) const;
  /// Throws InvalidArgument for out-of-range ids.
  KeypointId checkedKeypoint(int index) const;

  /// True when `ancestor` lies on the path from `joint` to the root (inclusive).
  bool isAncestorOrSelf(int ancestor, int joint) const;

  /// Two-level joint tree: parts in first-appearance order with their keypoints.
  std::vector<std::pair<std::string, std::vector<KeypointId>>> jointTree() const;

  /// Throws InvariantViolation unless the model carries exactly the 74
  /// joint-tree keypoints.
  void requireHumanKeypointSet() const;

 private:
  std::vector<Joint> joints_;
  std::vector<Keypoint> keypoints_;
  std::vector<std::vector<char>> ancestorOrSelf_;
};

/// Per-joint local rotations (relative to the parent frame) and root translation.
struct SkeletonPose {
  std::vector<Quat> rotations;
  Vec3 rootTranslation = Vec3::Zero();

  static SkeletonPose identity(const SkeletonModel& model);

  /// Throws InvalidArgument on size mismatch or non-unit quaternions.
  void validate(const SkeletonModel& model) const;

  bool operator==(const SkeletonPose& other) const;
};

struct FkResult {
  std::vector<Quat> jointRotations;  // world
  std::vector<Vec3> jointPositions;  // world
  std::vector<Vec3> keypoints;       // world
};

FkResult forwardKinematics(const SkeletonModel& model, const SkeletonPose& pose);

/// Joints allowed to move: for each active keypoint, its owning joint and
/// ancestors, `depth` joints in total along the chain.
std::set<int> chainMask(const SkeletonModel& model, const std::set<KeypointId>& activeKeypoints,
                        int depth = 3);

/// Capsule around the bone from joint `parentJoint` to joint `childJoint`,
/// rigidly attached to the parent's frame.
struct Capsule {
  int frameJoint = 0;
  int childJoint = 0;
  Vec3 a = Vec3::Zero();
  Vec3 b = Vec3::Zero();
  double radius = 0.0;
  Quat frame = Quat::Identity();  // world rotation of frameJoint
};

std::vector<Capsule> capsules(const SkeletonModel& model, const FkResult& fk);

/// Closest point on segment [a, b] to p.
Vec3 closestPointOnSegment(const Vec3& p, const Vec3& a, const Vec3& b);

/// Deterministic surface samples on a capsule (rings along the axis plus cap poles).
/// The ring basis is fixed in the capsule frame, so samples move rigidly with it.
std::vector<Vec3> sampleCapsule(const Capsule& capsule, int rings = 4, int perRing = 8);

struct IkTarget {
  KeypointId keypoint;
  Vec3 position = Vec3::Zero();
};

struct IkOptions {
  double damping = 0.1;
  int maxIterations = 30;
  double tolerance = 1e-4;
};

struct IkResult {
  SkeletonPose pose;
  std::vector<double> objectiveTrace;  // sum of squared residuals, entry 0 = input
  int iterations = 0;
  bool converged = false;

  double finalObjective() const {
    return objectiveTrace.back();
  }
};

/// Damped least squares on the masked joints' rotations. The objective is
/// non-increasing: steps that do not decrease it are rejected and the
/// damping raised. Joints outside `mask` are copied through untouched.
IkResult solveLimbIk(const SkeletonModel& model, const SkeletonPose& pose,
                     const std::vector<IkTarget>& targets, const std::set<int>& mask,
                     const IkOptions& options = {});

SkeletonModel loadSkeleton(const std::filesystem::path& path);
void saveSkeleton(const SkeletonModel& model, const std::filesystem::path& path);
std::string skeletonToJson(const SkeletonModel& model);
SkeletonModel skeletonFromJson(const std::string& text);

}  // namespace hoi
