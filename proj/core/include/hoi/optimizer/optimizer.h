#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "hoi/geometry/camera.h"
#include "hoi/geometry/mesh.h"
#include "hoi/geometry/rigid_pose.h"
#include "hoi/silhouette/silhouette.h"
#include "hoi/skeleton/skeleton.h"

namespace hoi {

/// Object point (object-local) that should touch a human keypoint while the
/// frame lies in [start, end).
struct ContactPair {
  KeypointId keypoint;
  Vec3 objectPoint = Vec3::Zero();
  int start = 0;
  int end = 1;

  bool activeAt(int frame) const {
    return frame >= start && frame < end;
  }
  bool operator==(const ContactPair&) const = default;
};

std::vector<ContactPair> activePairs(const std::vector<ContactPair>& pairs, int frame);

struct LossWeights {
  double contact = 1.0;
  double collision = 0.5;
  double mask = 0.1;
  double alpha = 1.0;  // silhouette MSE
  double beta = 0.01;  // edge term
  double lambdaHumanToObject = 2.0;
  double epsilon = 1e-3;  // contact-weight stabilizer (m)

  /// Throws InvalidArgument for negative or non-finite entries.
  void validate() const;
};

struct FrameState {
  SkeletonPose human;
  RigidPose object;

  bool operator==(const FrameState&) const = default;
};

/// Gradient with respect to local increments: joint rotations use the
/// right-multiplied exponential map (q <- q exp(w)); the object rotation is
/// left-multiplied (R <- exp(w) R).
struct FrameGradient {
  std::vector<Vec3> joints;
  Vec3 objectRotation = Vec3::Zero();
  Vec3 objectTranslation = Vec3::Zero();

  static FrameGradient zero(int numJoints);
  FrameGradient& operator+=(const FrameGradient& other);
  FrameGradient operator*(double s) const;
  double squaredNorm() const;
};

struct LossValue {
  double value = 0.0;
  FrameGradient gradient;
};

/// w_i = (d_i + eps)^2 / sum_j (d_j + eps)^2; all zero when the sum is zero.
std::vector<double> contactWeights(const std::vector<double>& distances, double epsilon);

/// sum_i w_i d_i^2 over the given pairs, with the weights held fixed in the
/// gradient. Zero when there are no pairs.
LossValue contactLoss(const SkeletonModel& model, const std::vector<ContactPair>& pairs, const FrameState& state,
                      double epsilon);

struct CollisionLoss : LossValue {
  double humanToObject = 0.0;  // sum of squared depths of capsule samples inside the object
  double objectToHuman = 0.0;  // sum of squared depths of object vertices inside capsules
  std::vector<std::string> warnings;
};

/// lambda * L_h->o + L_o->h. Open meshes skip the h->o direction with a warning.
CollisionLoss collisionLoss(const SkeletonModel& model, const TriangleMesh& mesh, const FrameState& state,
                            double lambdaHumanToObject);

/// Ground-truth silhouettes for one frame at loss resolution, with the edge
/// distance fields precomputed.
class MaskTarget {
 public:
  MaskTarget(const CameraModel& camera, std::optional<MaskImage> human, std::optional<MaskImage> object);

  const CameraModel& camera() const {
    return camera_;
  }
  const std::optional<MaskImage>& human() const {
    return human_;
  }
  const std::optional<MaskImage>& object() const {
    return object_;
  }
  const DistanceField& humanEdgeDistance() const {
    return humanDistance_;
  }
  const DistanceField& objectEdgeDistance() const {
    return objectDistance_;
  }

 private:
  CameraModel camera_;
  std::optional<MaskImage> human_;
  std::optional<MaskImage> object_;
  DistanceField humanDistance_;
  DistanceField objectDistance_;
};

struct MaskLoss {
  double value = 0.0;
  double humanMse = 0.0;
  double objectMse = 0.0;
  double humanEdge = 0.0;
  double objectEdge = 0.0;
  std::vector<std::string> notes;  // skipped terms
};

/// alpha * (MSE(M~h, Mh) + MSE(M~o, Mo)) + beta * (sum Eh Wh + sum Eo Wo), where
/// M~ is the rendered silhouette with the other entity's ground truth cut out.
MaskLoss maskLoss(const SkeletonModel& model, const TriangleMesh& mesh, const FrameState& state,
                  const MaskTarget& target, double alpha, double beta);

/// Central differences of maskLoss over the six object pose increments.
FrameGradient maskLossGradient(const SkeletonModel& model, const TriangleMesh& mesh, const FrameState& state,
                               const MaskTarget& target, double alpha, double beta, double step = 1e-3);

/// Everything refineFrame needs for one frame.
struct FrameProblem {
  const SkeletonModel* model = nullptr;
  const TriangleMesh* mesh = nullptr;
  std::vector<ContactPair> pairs;  // active in this frame
  LossWeights weights;
  const MaskTarget* masks = nullptr;  // optional
};

struct LossBreakdown {
  double contact = 0.0;
  double collision = 0.0;
  double mask = 0.0;
  double total = 0.0;
  std::vector<std::string> notes;
};

/// w_c L_contact + w_coll L_collision + w_m L_mask; terms with zero weight are
/// not evaluated.
LossBreakdown evaluateLoss(const FrameProblem& problem, const FrameState& state);
std::pair<LossBreakdown, FrameGradient> evaluateLossAndGradient(const FrameProblem& problem, const FrameState& state);

struct RefineOptions {
  int iterations = 20;
  double translationStep = 1e-2;  // m
  double rotationStep = 5e-3;     // rad
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adamEpsilon = 1e-8;
  bool staticObject = false;  // freeze object pose
};

struct RefineResult {
  FrameState state;
  std::vector<double> lossTrace;  // total loss at each iterate, entry 0 = input
  int bestIteration = 0;
  std::vector<std::string> diagnostics;
};

/// Adam over the rotations of `jointMask` and the object pose (unless
/// static). The root translation and joints outside the mask are never
/// written. Returns the iterate with the lowest loss.
RefineResult refineFrame(const FrameProblem& problem, const FrameState& initial, const std::set<int>& jointMask,
                         const RefineOptions& options = {});

/// States strictly between a (parameter 0) and b (parameter 1) at i / k for
/// i = 1..k-1: slerp for rotations, lerp for translations. Scale is taken from a.
std::vector<FrameState> interpolateFrames(const FrameState& a, const FrameState& b, int k);

/// Channels filtered by smoothSequence. An empty `joints` set with
/// allJoints = true filters every joint rotation.
struct SmoothChannels {
  bool object = true;
  bool rootTranslation = true;
  bool allJoints = true;
  std::set<int> joints;
};

struct SmoothResult {
  std::vector<FrameState> states;
  std::vector<std::string> warnings;
};

/// Zero-phase second-order Butterworth low-pass over translations and
/// exponential-map rotation coordinates (taken relative to each channel's
/// chordal mean). Fewer than 7 frames return the input with a warning.
SmoothResult smoothSequence(const std::vector<FrameState>& states, double cutoffHz, double fps,
                            const SmoothChannels& channels = {});

/// Zero-phase low-pass of one scalar signal (exposed for tests and tools).
std::vector<double> lowPassZeroPhase(const std::vector<double>& signal, double cutoffHz, double fps);

}  // namespace hoi
