#pragma once

#include <cstdint>
#include <vector>

#include "hoi/optimizer/optimizer.h"

namespace hoi {

/// Reconstructed or simulated motion: per-frame states, frame rate, and the
/// contact table (pairs with their active frame ranges).
struct MotionSequence {
  std::vector<FrameState> frames;
  double fps = 30.0;
  std::vector<ContactPair> contacts;

  /// Throws InvalidArgument for an empty sequence, fps <= 0, invalid poses or
  /// contact pairs with bad keypoints or empty ranges.
  void validate(const SkeletonModel& model) const;
};

/// World joint positions indexed [frame][joint].
using JointTrack = std::vector<std::vector<Vec3>>;

JointTrack jointTrack(const SkeletonModel& model, const MotionSequence& seq);

/// Mean over frames and joints of the joint-position error (m). Throws
/// LengthMismatch when frame or joint counts differ.
double mpjpe(const JointTrack& sim, const JointTrack& ref);
double mpjpe(const SkeletonModel& model, const MotionSequence& sim, const MotionSequence& ref);

/// Per-frame mean joint-position error.
std::vector<double> mpjpePerFrame(const JointTrack& sim, const JointTrack& ref);

/// Sum of squared distances between transformed object points and their
/// human keypoints for the given pairs (m^2).
double frameContactScore(const SkeletonModel& model, const FrameState& state, const std::vector<ContactPair>& pairs);

/// frameContactScore summed over frames with the pairs active in each frame.
double contactScore(const SkeletonModel& model, const MotionSequence& seq);
std::vector<double> contactScorePerFrame(const SkeletonModel& model, const MotionSequence& seq);

/// Joint-averaged RMS of the third forward difference of position (unit
/// frame steps). Throws SequenceTooShort below 4 frames.
double jitter(const JointTrack& track);
double jitter(const SkeletonModel& model, const MotionSequence& seq);

/// Kinematic state of a set of bodies (human joints or the single object).
struct BodyState {
  std::vector<Vec3> positions;
  std::vector<Quat> rotations;
  std::vector<Vec3> velocities;
  std::vector<Vec3> angularVelocities;
};

struct TrackingState {
  BodyState human;
  BodyState object;
};

/// Per-frame tracking states with forward-difference velocities at the
/// sequence fps; the last frame repeats the previous velocity. World-frame
/// angular velocity from log(R_{t+1} R_t^T) * fps.
std::vector<TrackingState> trackingStates(const SkeletonModel& model, const MotionSequence& seq);

struct TrackingWeights {
  double position = 100.0;
  double rotation = 10.0;
  double velocity = 0.1;
  double angularVelocity = 0.01;
};

struct TrackingTerms {
  double humanPose = 0.0;
  double objectPose = 0.0;
  double humanVelocity = 0.0;
  double objectVelocity = 0.0;
  double reward = 1.0;
};

/// exp(-(E_p^h + E_p^o + E_v^h + E_v^o)); rotation differences are geodesic
/// angles. Throws ShapeMismatch when body counts differ.
TrackingTerms trackingTerms(const TrackingState& sim, const TrackingState& ref, const TrackingWeights& w = {});
double trackingReward(const TrackingState& sim, const TrackingState& ref, const TrackingWeights& w = {});

/// Per-frame, per-keypoint binary contact indicators.
using ContactLabels = std::vector<std::vector<std::uint8_t>>;

/// Sum of |ref - sim| * ref. Throws ShapeMismatch on differing shapes and
/// InvalidArgument on non-binary entries.
double labelReward(const ContactLabels& ref, const ContactLabels& sim);

/// -lambda * frameContactScore for one frame's interaction graph.
double kpContactReward(const SkeletonModel& model, const FrameState& state, const std::vector<ContactPair>& pairs,
                       double lambda = 1.0);

struct MetricsReport {
  double mpjpe = 0.0;       // m
  double contactSim = 0.0;  // m^2
  double contactRef = 0.0;  // m^2
  double jitterSim = 0.0;
  double jitterRef = 0.0;
  std::vector<double> mpjpeTrace;
  std::vector<double> contactTrace;  // simulated sequence
  std::vector<std::string> notes;
};

/// All metrics of `sim` against `ref`. Jitter is reported as 0 with a note for
/// sequences shorter than 4 frames.
MetricsReport evaluateMotion(const SkeletonModel& model, const MotionSequence& sim, const MotionSequence& ref);

}  // namespace hoi
