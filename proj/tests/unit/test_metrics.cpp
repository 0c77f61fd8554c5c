#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include <hoi/common/error.h>
#include <hoi/metrics/metrics.h>

#include "test_support.h"

using namespace hoi;

namespace {

JointTrack randomTrack(std::mt19937_64& rng, int frames, int joints) {
  JointTrack t(frames);
  for (auto& f : t) {
    for (int j = 0; j < joints; ++j) f.push_back(hoi::testing::randomVec(rng, -1, 1));
  }
  return t;
}

MotionSequence randomMotion(const SkeletonModel& model, std::mt19937_64& rng, int frames) {
  MotionSequence seq;
  for (int t = 0; t < frames; ++t) {
    FrameState s{SkeletonPose::identity(model), hoi::testing::randomPose(rng, 3.0, 1.0)};
    for (Quat& q : s.human.rotations) q = hoi::testing::randomRotation(rng, 0.5);
    s.human.rootTranslation = hoi::testing::randomVec(rng, -1, 1);
    seq.frames.push_back(s);
  }
  std::uniform_int_distribution<int> kp(0, model.numKeypoints() - 1);
  for (int i = 0; i < 5; ++i) {
    seq.contacts.push_back({KeypointId{kp(rng)}, hoi::testing::randomVec(rng, -0.2, 0.2), i % 3, frames - i % 2});
  }
  return seq;
}

TrackingState singleBodyState(const Vec3& p, const Quat& q, const Vec3& v, const Vec3& w) {
  TrackingState s;
  s.human = {{p}, {q}, {v}, {w}};
  s.object = {{Vec3::Zero()}, {Quat::Identity()}, {Vec3::Zero()}, {Vec3::Zero()}};
  return s;
}

}  // namespace

TEST(Mpjpe, IdenticalIsZeroAndOffsetIsOffset) {
  std::mt19937_64 rng(1);
  const JointTrack a = randomTrack(rng, 5, 4);
  EXPECT_EQ(mpjpe(a, a), 0.0);
  JointTrack b = a;
  for (auto& f : b) {
    for (Vec3& p : f) p += Vec3(0.1, 0, 0);
  }
  EXPECT_NEAR(mpjpe(a, b), 0.1, 1e-15);
}

TEST(Mpjpe, MatchesHandComputedMean) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const JointTrack a = randomTrack(rng, 3, 2);
    const JointTrack b = randomTrack(rng, 3, 2);
    const double expected = ((a[0][0] - b[0][0]).norm() + (a[0][1] - b[0][1]).norm() + (a[1][0] - b[1][0]).norm() +
                             (a[1][1] - b[1][1]).norm() + (a[2][0] - b[2][0]).norm() + (a[2][1] - b[2][1]).norm()) /
                            6.0;
    EXPECT_NEAR(mpjpe(a, b), expected, 1e-12);
  }
}

TEST(Mpjpe, IsPseudometric) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const JointTrack a = randomTrack(rng, 4, 3);
    const JointTrack b = randomTrack(rng, 4, 3);
    const JointTrack c = randomTrack(rng, 4, 3);
    EXPECT_EQ(mpjpe(a, b), mpjpe(b, a));
    EXPECT_LE(mpjpe(a, c), mpjpe(a, b) + mpjpe(b, c) + 1e-12);
  }
}

TEST(Mpjpe, LengthMismatchThrows) {
  std::mt19937_64 rng(4);
  try {
    mpjpe(randomTrack(rng, 3, 2), randomTrack(rng, 4, 2));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::LengthMismatch);
  }
  EXPECT_THROW(mpjpe(randomTrack(rng, 3, 2), randomTrack(rng, 3, 3)), Error);
}

TEST(ContactScore, ClosedContactsGiveZero) {
  const SkeletonModel& model = SkeletonModel::defaultHumanoid();
  MotionSequence seq;
  FrameState s{SkeletonPose::identity(model), RigidPose()};
  const KeypointId kp = *model.keypoint("leftHand/palm");
  s.object.setTranslation(forwardKinematics(model, s.human).keypoints[kp.index]);
  seq.frames.assign(10, s);
  seq.contacts = {{kp, Vec3::Zero(), 0, 10}};
  EXPECT_NEAR(contactScore(model, seq), 0.0, 1e-30);
}

TEST(ContactScore, ConstantDistanceExample) {
  const SkeletonModel& model = SkeletonModel::defaultHumanoid();
  MotionSequence seq;
  FrameState s{SkeletonPose::identity(model), RigidPose()};
  const KeypointId kp = *model.keypoint("upperSpine/front");
  s.object.setTranslation(forwardKinematics(model, s.human).keypoints[kp.index]);
  seq.frames.assign(12, s);
  seq.contacts = {{kp, Vec3(0, 0.1, 0), 1, 11}};
  EXPECT_NEAR(contactScore(model, seq), 0.1, 1e-12);
  EXPECT_EQ(contactScorePerFrame(model, seq).front(), 0.0);
}

TEST(ContactScore, MatchesRecomputationAndRigidInvariance) {
  const SkeletonModel& model = SkeletonModel::defaultHumanoid();
  std::mt19937_64 rng(5);
  const MotionSequence seq = randomMotion(model, rng, 8);
  double expected = 0.0;
  for (int t = 0; t < 8; ++t) {
    const FkResult fk = forwardKinematics(model, seq.frames[t].human);
    for (const ContactPair& p : seq.contacts) {
      if (t >= p.start && t < p.end) {
        expected += (seq.frames[t].object.transformPoint(p.objectPoint) - fk.keypoints[p.keypoint.index]).squaredNorm();
      }
    }
  }
  const double score = contactScore(model, seq);
  EXPECT_NEAR(score, expected, 1e-12);

  // Same global rigid motion applied to human root and object.
  const RigidPose g = hoi::testing::randomPose(rng, 3.0, 2.0);
  MotionSequence moved = seq;
  for (FrameState& f : moved.frames) {
    f.human.rotations[0] = g.rotation() * f.human.rotations[0];
    const Vec3 rootOffset = model.joints()[0].offset;
    f.human.rootTranslation = g.transformPoint(f.human.rootTranslation + rootOffset) - rootOffset;
    f.object = g * f.object;
  }
  EXPECT_NEAR(contactScore(model, moved), score, 1e-10 * std::max(1.0, score));
}

TEST(Jitter, PolynomialExamples) {
  JointTrack linear, quadratic, cubic;
  for (int t = 0; t < 10; ++t) {
    linear.push_back({Vec3(2 * t, -t, 1.0)});
    quadratic.push_back({Vec3(t * t, 0, 0)});
    cubic.push_back({Vec3(t * t * t, 0, 0)});
  }
  EXPECT_EQ(jitter(linear), 0.0);
  EXPECT_EQ(jitter(quadratic), 0.0);
  EXPECT_NEAR(jitter(cubic), 6.0, 1e-12);
}

TEST(Jitter, AffineMotionInvariance) {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    const JointTrack a = randomTrack(rng, 12, 3);
    JointTrack b = a;
    const Vec3 p0 = hoi::testing::randomVec(rng, -1, 1);
    const Vec3 v = hoi::testing::randomVec(rng, -1, 1);
    for (int t = 0; t < 12; ++t) {
      for (Vec3& p : b[t]) p += p0 + v * t;
    }
    EXPECT_NEAR(jitter(a), jitter(b), 1e-12);
  }
}

TEST(Jitter, TooShortThrows) {
  std::mt19937_64 rng(7);
  try {
    jitter(randomTrack(rng, 3, 2));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SequenceTooShort);
  }
  EXPECT_NO_THROW(jitter(randomTrack(rng, 4, 2)));
}

TEST(TrackingReward, IdenticalIsOne) {
  const SkeletonModel& model = SkeletonModel::defaultHumanoid();
  std::mt19937_64 rng(8);
  const std::vector<TrackingState> s = trackingStates(model, randomMotion(model, rng, 5));
  for (const TrackingState& x : s) EXPECT_EQ(trackingReward(x, x), 1.0);
}

TEST(TrackingReward, LnTwoEnergyGivesHalf) {
  const TrackingState ref = singleBodyState(Vec3::Zero(), Quat::Identity(), Vec3::Zero(), Vec3::Zero());
  // lambda_p * d^2 = ln 2.
  const double d = std::sqrt(std::log(2.0) / 100.0);
  const TrackingState sim = singleBodyState(Vec3(d, 0, 0), Quat::Identity(), Vec3::Zero(), Vec3::Zero());
  EXPECT_NEAR(trackingReward(sim, ref), 0.5, 1e-15);
  // Same energy split between rotation and angular velocity.
  const double angle = std::sqrt(0.5 * std::log(2.0) / 10.0);
  const double omega = std::sqrt(0.5 * std::log(2.0) / 0.01);
  const TrackingState mixed = singleBodyState(Vec3::Zero(), Quat(Eigen::AngleAxisd(angle, Vec3::UnitY())),
                                              Vec3::Zero(), Vec3(0, 0, omega));
  EXPECT_NEAR(trackingReward(mixed, ref), 0.5, 1e-12);
}

TEST(TrackingReward, EachTermStrictlyDecreasesReward) {
  const TrackingState ref = singleBodyState(Vec3::Zero(), Quat::Identity(), Vec3::Zero(), Vec3::Zero());
  const TrackingState base = singleBodyState(Vec3(0.01, 0, 0), Quat(Eigen::AngleAxisd(0.1, Vec3::UnitX())),
                                             Vec3(0.2, 0, 0), Vec3(0, 0.3, 0));
  const double r = trackingReward(base, ref);
  EXPECT_GT(r, 0.0);
  EXPECT_LT(r, 1.0);
  TrackingState worse = base;
  worse.human.positions[0] *= 2;
  EXPECT_LT(trackingReward(worse, ref), r);
  worse = base;
  worse.human.rotations[0] = Quat(Eigen::AngleAxisd(0.2, Vec3::UnitX()));
  EXPECT_LT(trackingReward(worse, ref), r);
  worse = base;
  worse.human.velocities[0] *= 2;
  EXPECT_LT(trackingReward(worse, ref), r);
  worse = base;
  worse.human.angularVelocities[0] *= 2;
  EXPECT_LT(trackingReward(worse, ref), r);
  worse = base;
  worse.object.positions[0] = Vec3(0, 0.05, 0);
  EXPECT_LT(trackingReward(worse, ref), r);
}

TEST(TrackingReward, ShapeMismatchThrows) {
  TrackingState a = singleBodyState(Vec3::Zero(), Quat::Identity(), Vec3::Zero(), Vec3::Zero());
  TrackingState b = a;
  b.human.positions.push_back(Vec3::Zero());
  EXPECT_THROW(trackingReward(a, b), Error);
}

TEST(TrackingStates, ForwardDifferenceVelocities) {
  const SkeletonModel& model = SkeletonModel::defaultHumanoid();
  MotionSequence seq;
  seq.fps = 30.0;
  for (int t = 0; t < 4; ++t) {
    FrameState s{SkeletonPose::identity(model), RigidPose()};
    s.object = RigidPose(Quat(Eigen::AngleAxisd(0.01 * t, Vec3::UnitZ())), Vec3(0.02 * t, 0, 0));
    seq.frames.push_back(s);
  }
  const std::vector<TrackingState> st = trackingStates(model, seq);
  for (int t = 0; t < 4; ++t) {
    EXPECT_NEAR((st[t].object.velocities[0] - Vec3(0.6, 0, 0)).norm(), 0.0, 1e-12);
    EXPECT_NEAR((st[t].object.angularVelocities[0] - Vec3(0, 0, 0.3)).norm(), 0.0, 1e-12);
    EXPECT_EQ(st[t].human.velocities[5], Vec3::Zero());
  }
}

TEST(LabelReward, Examples) {
  EXPECT_EQ(labelReward({{1, 0, 1}}, {{1, 0, 1}}), 0.0);
  EXPECT_EQ(labelReward({{1, 1, 0}}, {{0, 1, 1}}), 1.0);
  EXPECT_EQ(labelReward({{0, 0, 0}, {0, 0, 0}}, {{1, 0, 1}, {1, 1, 1}}), 0.0);
}

TEST(LabelReward, IgnoresEntriesWithoutReferenceContact) {
  std::mt19937_64 rng(9);
  std::bernoulli_distribution coin(0.5);
  for (int trial = 0; trial < 50; ++trial) {
    ContactLabels ref(4, std::vector<std::uint8_t>(6)), sim = ref;
    for (int t = 0; t < 4; ++t) {
      for (int k = 0; k < 6; ++k) {
        ref[t][k] = coin(rng);
        sim[t][k] = coin(rng);
      }
    }
    ContactLabels flipped = sim;
    for (int t = 0; t < 4; ++t) {
      for (int k = 0; k < 6; ++k) {
        if (ref[t][k] == 0) flipped[t][k] = 1 - flipped[t][k];
      }
    }
    EXPECT_EQ(labelReward(ref, sim), labelReward(ref, flipped));
  }
}

TEST(LabelReward, ShapeMismatchThrows) {
  try {
    labelReward({{1, 0}}, {{1, 0, 0}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ShapeMismatch);
  }
  EXPECT_THROW(labelReward({{1}}, {{1}, {0}}), Error);
  EXPECT_THROW(labelReward({{2}}, {{1}}), Error);
}

TEST(KpContactReward, MatchesFrameContactScore) {
  const SkeletonModel& model = SkeletonModel::defaultHumanoid();
  std::mt19937_64 rng(10);
  const MotionSequence seq = randomMotion(model, rng, 6);
  const std::vector<double> perFrame = contactScorePerFrame(model, seq);
  for (int t = 0; t < 6; ++t) {
    const std::vector<ContactPair> active = activePairs(seq.contacts, t);
    EXPECT_EQ(kpContactReward(model, seq.frames[t], active, 2.5), -2.5 * perFrame[t]);
    EXPECT_EQ(kpContactReward(model, seq.frames[t], active, 0.0), 0.0);
    EXPECT_LE(kpContactReward(model, seq.frames[t], active), 0.0);
  }
}

TEST(EvaluateMotion, ReportsAllMetrics) {
  const SkeletonModel& model = SkeletonModel::defaultHumanoid();
  std::mt19937_64 rng(11);
  const MotionSequence a = randomMotion(model, rng, 6);
  const MetricsReport r = evaluateMotion(model, a, a);
  EXPECT_EQ(r.mpjpe, 0.0);
  EXPECT_EQ(r.contactSim, r.contactRef);
  EXPECT_EQ(r.jitterSim, r.jitterRef);
  EXPECT_EQ(r.mpjpeTrace.size(), 6u);
  MotionSequence shortSeq = a;
  shortSeq.frames.resize(3);
  EXPECT_EQ(evaluateMotion(model, shortSeq, shortSeq).notes.size(), 1u);
}
