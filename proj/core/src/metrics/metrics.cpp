#include "hoi/metrics/metrics.h"

#include <cmath>

#include "hoi/common/error.h"

namespace hoi {

namespace {

void requireSameShape(const JointTrack& a, const JointTrack& b) {
  if (a.size() != b.size()) throw Error(ErrorCode::LengthMismatch, "sequences have different frame counts");
  for (std::size_t t = 0; t < a.size(); ++t) {
    if (a[t].size() != b[t].size()) throw Error(ErrorCode::LengthMismatch, "sequences have different joint counts");
  }
}

double sumSquared(const std::vector<Vec3>& a, const std::vector<Vec3>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]).squaredNorm();
  return s;
}

double sumSquaredAngles(const std::vector<Quat>& a, const std::vector<Quat>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::pow(geodesicAngle(a[i], b[i]), 2);
  return s;
}

void requireSameBodies(const BodyState& a, const BodyState& b) {
  if (a.positions.size() != b.positions.size() || a.rotations.size() != b.rotations.size() ||
      a.velocities.size() != b.velocities.size() || a.angularVelocities.size() != b.angularVelocities.size()) {
    throw Error(ErrorCode::ShapeMismatch, "tracking states have different body counts");
  }
}

void fillVelocities(std::vector<TrackingState>& states, BodyState TrackingState::*body, double fps) {
  const std::size_t n = states.size();
  for (std::size_t t = 0; t < n; ++t) {
    BodyState& b = states[t].*body;
    b.velocities.assign(b.positions.size(), Vec3::Zero());
    b.angularVelocities.assign(b.rotations.size(), Vec3::Zero());
    if (n < 2) continue;
    const std::size_t t0 = t + 1 < n ? t : t - 1;
    const BodyState& cur = states[t0].*body;
    const BodyState& next = states[t0 + 1].*body;
    for (std::size_t i = 0; i < b.positions.size(); ++i) b.velocities[i] = (next.positions[i] - cur.positions[i]) * fps;
    for (std::size_t i = 0; i < b.rotations.size(); ++i) {
      b.angularVelocities[i] = logMap(next.rotations[i] * cur.rotations[i].conjugate()) * fps;
    }
  }
}

}  // namespace

void MotionSequence::validate(const SkeletonModel& model) const {
  if (frames.empty()) throw Error(ErrorCode::InvalidArgument, "motion sequence has no frames");
  if (!(fps > 0.0) || !std::isfinite(fps)) throw Error(ErrorCode::InvalidArgument, "fps must be positive");
  for (const FrameState& f : frames) f.human.validate(model);
  for (const ContactPair& p : contacts) {
    model.checkedKeypoint(p.keypoint.index);
    if (p.start >= p.end) throw Error(ErrorCode::InvalidArgument, "contact pair has an empty frame range");
  }
}

JointTrack jointTrack(const SkeletonModel& model, const MotionSequence& seq) {
  JointTrack out;
  out.reserve(seq.frames.size());
  for (const FrameState& f : seq.frames) out.push_back(forwardKinematics(model, f.human).jointPositions);
  return out;
}

std::vector<double> mpjpePerFrame(const JointTrack& sim, const JointTrack& ref) {
  requireSameShape(sim, ref);
  std::vector<double> out;
  for (std::size_t t = 0; t < sim.size(); ++t) {
    double s = 0.0;
    for (std::size_t j = 0; j < sim[t].size(); ++j) s += (ref[t][j] - sim[t][j]).norm();
    out.push_back(sim[t].empty() ? 0.0 : s / static_cast<double>(sim[t].size()));
  }
  return out;
}

double mpjpe(const JointTrack& sim, const JointTrack& ref) {
  requireSameShape(sim, ref);
  double s = 0.0;
  std::size_t count = 0;
  for (std::size_t t = 0; t < sim.size(); ++t) {
    for (std::size_t j = 0; j < sim[t].size(); ++j) s += (ref[t][j] - sim[t][j]).norm();
    count += sim[t].size();
  }
  return count == 0 ? 0.0 : s / static_cast<double>(count);
}

double mpjpe(const SkeletonModel& model, const MotionSequence& sim, const MotionSequence& ref) {
  if (sim.frames.size() != ref.frames.size()) {
    throw Error(ErrorCode::LengthMismatch, "sequences have different frame counts");
  }
  return mpjpe(jointTrack(model, sim), jointTrack(model, ref));
}

double frameContactScore(const SkeletonModel& model, const FrameState& state, const std::vector<ContactPair>& pairs) {
  if (pairs.empty()) return 0.0;
  const FkResult fk = forwardKinematics(model, state.human);
  double s = 0.0;
  for (const ContactPair& p : pairs) {
    const int k = model.checkedKeypoint(p.keypoint.index).index;
    s += (state.object.transformPoint(p.objectPoint) - fk.keypoints[k]).squaredNorm();
  }
  return s;
}

std::vector<double> contactScorePerFrame(const SkeletonModel& model, const MotionSequence& seq) {
  std::vector<double> out;
  for (std::size_t t = 0; t < seq.frames.size(); ++t) {
    out.push_back(frameContactScore(model, seq.frames[t], activePairs(seq.contacts, static_cast<int>(t))));
  }
  return out;
}

double contactScore(const SkeletonModel& model, const MotionSequence& seq) {
  double s = 0.0;
  for (double v : contactScorePerFrame(model, seq)) s += v;
  return s;
}

double jitter(const JointTrack& track) {
  const std::size_t n = track.size();
  if (n < 4) throw Error(ErrorCode::SequenceTooShort, "jitter needs at least 4 frames");
  const std::size_t joints = track.front().size();
  for (const auto& f : track) {
    if (f.size() != joints) throw Error(ErrorCode::LengthMismatch, "frames have different joint counts");
  }
  if (joints == 0) return 0.0;
  double total = 0.0;
  for (std::size_t j = 0; j < joints; ++j) {
    double s = 0.0;
    for (std::size_t t = 3; t < n; ++t) {
      s += (track[t][j] - 3.0 * track[t - 1][j] + 3.0 * track[t - 2][j] - track[t - 3][j]).squaredNorm();
    }
    total += std::sqrt(s / static_cast<double>(n - 3));
  }
  return total / static_cast<double>(joints);
}

double jitter(const SkeletonModel& model, const MotionSequence& seq) {
  return jitter(jointTrack(model, seq));
}

std::vector<TrackingState> trackingStates(const SkeletonModel& model, const MotionSequence& seq) {
  if (!(seq.fps > 0.0)) throw Error(ErrorCode::InvalidArgument, "fps must be positive");
  std::vector<TrackingState> out;
  for (const FrameState& f : seq.frames) {
    const FkResult fk = forwardKinematics(model, f.human);
    TrackingState s;
    s.human.positions = fk.jointPositions;
    s.human.rotations = fk.jointRotations;
    s.object.positions = {f.object.translation()};
    s.object.rotations = {f.object.rotation()};
    out.push_back(std::move(s));
  }
  fillVelocities(out, &TrackingState::human, seq.fps);
  fillVelocities(out, &TrackingState::object, seq.fps);
  return out;
}

TrackingTerms trackingTerms(const TrackingState& sim, const TrackingState& ref, const TrackingWeights& w) {
  requireSameBodies(sim.human, ref.human);
  requireSameBodies(sim.object, ref.object);
  auto pose = [&](const BodyState& s, const BodyState& r) {
    return w.position * sumSquared(r.positions, s.positions) + w.rotation * sumSquaredAngles(r.rotations, s.rotations);
  };
  auto velocity = [&](const BodyState& s, const BodyState& r) {
    return w.velocity * sumSquared(r.velocities, s.velocities) +
           w.angularVelocity * sumSquared(r.angularVelocities, s.angularVelocities);
  };
  TrackingTerms t;
  t.humanPose = pose(sim.human, ref.human);
  t.objectPose = pose(sim.object, ref.object);
  t.humanVelocity = velocity(sim.human, ref.human);
  t.objectVelocity = velocity(sim.object, ref.object);
  t.reward = std::exp(-(t.humanPose + t.objectPose + t.humanVelocity + t.objectVelocity));
  return t;
}

double trackingReward(const TrackingState& sim, const TrackingState& ref, const TrackingWeights& w) {
  return trackingTerms(sim, ref, w).reward;
}

double labelReward(const ContactLabels& ref, const ContactLabels& sim) {
  if (ref.size() != sim.size()) throw Error(ErrorCode::ShapeMismatch, "label tables have different frame counts");
  double s = 0.0;
  for (std::size_t t = 0; t < ref.size(); ++t) {
    if (ref[t].size() != sim[t].size()) {
      throw Error(ErrorCode::ShapeMismatch, "label tables have different keypoint counts");
    }
    for (std::size_t k = 0; k < ref[t].size(); ++k) {
      if (ref[t][k] > 1 || sim[t][k] > 1) throw Error(ErrorCode::InvalidArgument, "contact labels must be 0 or 1");
      s += std::abs(static_cast<int>(ref[t][k]) - static_cast<int>(sim[t][k])) * ref[t][k];
    }
  }
  return s;
}

double kpContactReward(const SkeletonModel& model, const FrameState& state, const std::vector<ContactPair>& pairs,
                       double lambda) {
  return -lambda * frameContactScore(model, state, pairs);
}

MetricsReport evaluateMotion(const SkeletonModel& model, const MotionSequence& sim, const MotionSequence& ref) {
  sim.validate(model);
  ref.validate(model);
  const JointTrack simTrack = jointTrack(model, sim);
  const JointTrack refTrack = jointTrack(model, ref);
  MetricsReport r;
  r.mpjpeTrace = mpjpePerFrame(simTrack, refTrack);
  r.mpjpe = mpjpe(simTrack, refTrack);
  r.contactTrace = contactScorePerFrame(model, sim);
  for (double v : r.contactTrace) r.contactSim += v;
  r.contactRef = contactScore(model, ref);
  if (sim.frames.size() >= 4) {
    r.jitterSim = jitter(simTrack);
    r.jitterRef = jitter(refTrack);
  } else {
    r.notes.push_back("fewer than 4 frames; jitter not computed");
  }
  return r;
}

}  // namespace hoi
