#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hoi/geometry/camera.h"
#include "hoi/geometry/rigid_pose.h"

namespace hoi {

/// Object point (object-local) that should coincide with a world target,
/// typically a human keypoint.
struct Correspondence3D3D {
  Vec3 objectPoint = Vec3::Zero();
  Vec3 target = Vec3::Zero();
  double weight = 1.0;
};

/// Object point (object-local) whose projection should land on a tracked pixel.
struct Correspondence3D2D {
  Vec3 objectPoint = Vec3::Zero();
  Vec2 target = Vec2::Zero();
  double weight = 1e-4;
};

struct RigidSolverOptions {
  double initialLambda = 1e-3;
  double lambdaUp = 10.0;
  double lambdaDown = 0.1;
  int maxIterations = 100;
  double relativeCostTolerance = 1e-10;
  double gradientTolerance = 1e-8;
};

struct SolveReport {
  RigidPose pose;
  double initialCost = 0.0;
  double cost3D = 0.0;  // 0.5 * sum |r3D|^2 at the final pose
  double cost2D = 0.0;
  int iterations = 0;
  bool converged = false;
  std::string termination;
  int num3D = 0;  // correspondences with positive weight
  int num2D = 0;
  std::vector<std::string> warnings;

  double cost() const {
    return cost3D + cost2D;
  }
};

/// Pose parameters are ordered [rotation increment (3), translation (3)];
/// the rotation increment left-multiplies: R <- expMap(delta) R.
using Jacobian3 = Eigen::Matrix<double, 3, 6>;
using Jacobian2 = Eigen::Matrix<double, 2, 6>;

Vec3 residual3D(const RigidPose& pose, const Correspondence3D3D& c);
Jacobian3 jacobian3D(const RigidPose& pose, const Correspondence3D3D& c);
Vec2 residual2D(const RigidPose& pose, const Correspondence3D2D& c, const CameraModel& camera);
Jacobian2 jacobian2D(const RigidPose& pose, const Correspondence3D2D& c, const CameraModel& camera);

/// Applies a parameter increment [rotation (3), translation (3)] to a pose.
RigidPose applyIncrement(const RigidPose& pose, const Eigen::Matrix<double, 6, 1>& delta);

/// Weighted Levenberg-Marquardt over rotation and translation; scale is held.
/// Throws UnderConstrained (< 6 residual rows), BehindCamera, NonFinite, or
/// InvalidArgument (2D correspondences without a camera, negative weights).
std::pair<RigidPose, SolveReport> solveRigidPose(const RigidPose& init,
                                                 const std::vector<Correspondence3D3D>& c33,
                                                 const std::vector<Correspondence3D2D>& c32,
                                                 const std::optional<CameraModel>& camera,
                                                 const RigidSolverOptions& options = {});

struct FrameCorrespondences {
  std::vector<Correspondence3D3D> c33;
  std::vector<Correspondence3D2D> c32;

  int annotationCount() const;
  int residualRows() const;
};

struct StaticPoseResult {
  RigidPose pose;
  int frame = -1;
  SolveReport report;
};

/// Static-object strategy: solves the frame with the most annotations
/// (earliest on ties) among frames with enough residual rows and returns
/// that pose for the whole sequence. `initialPoses` is per-frame or empty
/// (identity).
StaticPoseResult estimateStaticPose(const std::vector<FrameCorrespondences>& frames,
                                    const std::optional<CameraModel>& camera,
                                    const std::vector<RigidPose>& initialPoses = {},
                                    const RigidSolverOptions& options = {});

}  // namespace hoi
