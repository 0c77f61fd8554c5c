#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <numbers>
#include <random>

#include <hoi/common/error.h>
#include <hoi/optimizer/optimizer.h>

#include "oracles.h"

using namespace hoi;

namespace {

SkeletonModel pointModel() {
  std::vector<Joint> joints = {{"root", -1, Vec3::Zero(), 0.0}};
  std::vector<Keypoint> kps = {{"root/a", 0, Vec3::Zero()}, {"root/b", 0, Vec3::Zero()}};
  return SkeletonModel(joints, kps);
}

SkeletonModel singleBone(double radius) {
  std::vector<Joint> joints = {{"root", -1, Vec3::Zero(), 0.0}, {"tip", 0, Vec3(1, 0, 0), radius}};
  return SkeletonModel(joints, {{"tip/end", 1, Vec3::Zero()}});
}

FrameState identityState(const SkeletonModel& model) {
  return {SkeletonPose::identity(model), RigidPose()};
}

// Tetrahedron with one vertex at p; the others lie at least 0.5 from the x axis.
TriangleMesh spike(const Vec3& p) {
  std::vector<Vec3> v = {p, p + Vec3(0, 0.5, 0.3), p + Vec3(-0.2, 0.5, -0.3), p + Vec3(0.2, 0.5, -0.3)};
  return TriangleMesh(v, {Face{0, 2, 1}, Face{0, 1, 3}, Face{0, 3, 2}, Face{1, 2, 3}});
}

FrameState randomState(const SkeletonModel& model, std::mt19937_64& rng, double maxAngle) {
  return hoi::testing::randomFrameState(model, rng, maxAngle);
}

void expectGradientMatches(const FrameGradient& analytic, const FrameState& s,
                           const std::function<double(const FrameState&)>& f) {
  EXPECT_LT(hoi::testing::gradientError(analytic, s, f), 1e-4);
}

// Independent collision oracle: every capsule sample and every object vertex
// tested against every shape.
double bruteForceCollision(const SkeletonModel& model, const TriangleMesh& mesh, const FrameState& s,
                           double lambda) {
  const FkResult fk = forwardKinematics(model, s.human);
  const std::vector<Capsule> caps = capsules(model, fk);
  double h2o = 0.0;
  for (const Capsule& c : caps) {
    for (const Vec3& x : sampleCapsule(c)) {
      const Vec3 local = s.object.inverseTransformPoint(x);
      if (contains(mesh, local)) {
        const double depth = s.object.scale() * surfaceDistance(mesh, local).distance;
        h2o += depth * depth;
      }
    }
  }
  double o2h = 0.0;
  for (const Vec3& v0 : mesh.vertices()) {
    const Vec3 v = s.object.transformPoint(v0);
    double depth = 0.0;
    for (const Capsule& c : caps) {
      const Vec3 axis = c.b - c.a;
      const double t = std::clamp((v - c.a).dot(axis) / axis.squaredNorm(), 0.0, 1.0);
      depth = std::max(depth, c.radius - (v - (c.a + t * axis)).norm());
    }
    o2h += depth * depth;
  }
  return lambda * h2o + o2h;
}

FrameState forearmOverlap(std::mt19937_64& rng) {
  return hoi::testing::forearmOverlap(rng);
}

}  // namespace

TEST(ContactLoss, WeightsExample) {
  const std::vector<double> w = contactWeights({1.0, 3.0}, 0.0);
  EXPECT_NEAR(w[0], 0.1, 1e-15);
  EXPECT_NEAR(w[1], 0.9, 1e-15);
}

TEST(ContactLoss, TwoPairExample) {
  const SkeletonModel model = pointModel();
  std::vector<ContactPair> pairs = {{KeypointId{0}, Vec3(1, 0, 0)}, {KeypointId{1}, Vec3(0, 3, 0)}};
  EXPECT_NEAR(contactLoss(model, pairs, identityState(model), 0.0).value, 8.2, 1e-12);
}

TEST(ContactLoss, SinglePairIsSquaredDistance) {
  const SkeletonModel model = pointModel();
  std::vector<ContactPair> pairs = {{KeypointId{0}, Vec3(0.3, -0.4, 1.2)}};
  EXPECT_NEAR(contactLoss(model, pairs, identityState(model), 0.0).value, 0.09 + 0.16 + 1.44, 1e-14);
}

TEST(ContactLoss, CoincidentOrMissingPairsGiveZero) {
  const SkeletonModel model = pointModel();
  EXPECT_EQ(contactLoss(model, {{KeypointId{0}, Vec3::Zero()}}, identityState(model), 0.0).value, 0.0);
  const LossValue none = contactLoss(model, {}, identityState(model), 1e-3);
  EXPECT_EQ(none.value, 0.0);
  EXPECT_EQ(none.gradient.squaredNorm(), 0.0);
}

TEST(ContactLoss, ActivePairsRespectFrameRange) {
  std::vector<ContactPair> pairs = {{KeypointId{0}, Vec3::Zero(), 0, 3}, {KeypointId{1}, Vec3::Zero(), 3, 5}};
  EXPECT_EQ(activePairs(pairs, 2).size(), 1u);
  EXPECT_EQ(activePairs(pairs, 3).front().keypoint.index, 1);
  EXPECT_TRUE(activePairs(pairs, 5).empty());
}

TEST(ContactLoss, GradientMatchesFiniteDifferencesWithFrozenWeights) {
  const SkeletonModel& model = SkeletonModel::defaultHumanoid();
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> kp(0, model.numKeypoints() - 1);
  for (int trial = 0; trial < 100; ++trial) {
    const FrameState s = randomState(model, rng, 0.6);
    std::vector<ContactPair> pairs;
    for (int i = 0; i < 1 + trial % 4; ++i) {
      pairs.push_back({KeypointId{kp(rng)}, hoi::testing::randomVec(rng, -0.2, 0.2)});
    }
    const FkResult fk = forwardKinematics(model, s.human);
    std::vector<double> d;
    for (const ContactPair& p : pairs) {
      d.push_back((s.object.transformPoint(p.objectPoint) - fk.keypoints[p.keypoint.index]).norm());
    }
    const std::vector<double> w = contactWeights(d, 1e-3);
    auto frozen = [&](const FrameState& x) { return hoi::testing::frozenContactLoss(model, pairs, w, x); };
    expectGradientMatches(contactLoss(model, pairs, s, 1e-3).gradient, s, frozen);
  }
}

TEST(CollisionLoss, DisjointShapesGiveZero) {
  const SkeletonModel model = singleBone(0.1);
  const CollisionLoss c = collisionLoss(model, makeBox(Vec3(0.2, 0.2, 0.2)), {SkeletonPose::identity(model),
                                        RigidPose(Quat::Identity(), Vec3(0, 2, 0))}, 2.0);
  EXPECT_EQ(c.value, 0.0);
  EXPECT_EQ(c.gradient.squaredNorm(), 0.0);
}

TEST(CollisionLoss, VertexOnCapsuleAxisContributesRadiusSquared) {
  const SkeletonModel model = singleBone(0.1);
  const CollisionLoss c = collisionLoss(model, spike(Vec3(0.5, 0, 0)), identityState(model), 0.0);
  EXPECT_NEAR(c.objectToHuman, 0.01, 1e-15);
  EXPECT_NEAR(c.value, 0.01, 1e-15);
}

TEST(CollisionLoss, OpenMeshSkipsHumanToObjectWithWarning) {
  const SkeletonModel model = singleBone(0.1);
  const TriangleMesh open({Vec3(0.5, 0, 0), Vec3(0.5, 1, 0), Vec3(0.5, 0, 1)}, {Face{0, 1, 2}});
  const CollisionLoss c = collisionLoss(model, open, identityState(model), 2.0);
  EXPECT_EQ(c.humanToObject, 0.0);
  EXPECT_NEAR(c.objectToHuman, 0.01, 1e-15);
  EXPECT_EQ(c.warnings.size(), 1u);
}

TEST(CollisionLoss, MatchesBruteForceOracle) {
  const SkeletonModel& model = SkeletonModel::defaultHumanoid();
  const TriangleMesh box = makeBox(Vec3(0.06, 0.05, 0.08));
  std::mt19937_64 rng(5);
  int overlapping = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const FrameState s = forearmOverlap(rng);
    const CollisionLoss c = collisionLoss(model, box, s, 2.0);
    EXPECT_NEAR(c.value, bruteForceCollision(model, box, s, 2.0), 1e-9);
    overlapping += c.value > 0.0;
  }
  EXPECT_GT(overlapping, 50);
}

TEST(CollisionLoss, GradientMatchesFiniteDifferences) {
  const SkeletonModel& model = SkeletonModel::defaultHumanoid();
  const TriangleMesh box = makeBox(Vec3(0.06, 0.05, 0.08));
  std::mt19937_64 rng(9);
  int audited = 0;
  while (audited < 100) {
    const FrameState s = forearmOverlap(rng);
    const CollisionLoss c = collisionLoss(model, box, s, 2.0);
    if (c.value == 0.0) continue;
    expectGradientMatches(c.gradient, s, [&](const FrameState& x) { return collisionLoss(model, box, x, 2.0).value; });
    ++audited;
  }
}

TEST(MaskLoss, IdenticalRenderGivesZero) {
  const CameraModel cam{80, 80, 32, 24, 64, 48};
  const SkeletonModel& model = SkeletonModel::defaultHumanoid();
  const TriangleMesh quad({Vec3(-5, -5, 1), Vec3(5, -5, 1), Vec3(5, 5, 1), Vec3(-5, 5, 1)},
                          {Face{0, 1, 2}, Face{0, 2, 3}});
  const FrameState s = identityState(model);
  const MaskTarget full(cam, std::nullopt, rasterizeSilhouette(quad, s.object, cam));
  const MaskLoss covered = maskLoss(model, quad, s, full, 1.0, 0.01);
  EXPECT_EQ(covered.value, 0.0);
  EXPECT_EQ(covered.notes.size(), 2u);  // human mask missing, no object edges

  FrameState away = s;
  away.object.setTranslation(Vec3(0, 0, -3));
  const MaskTarget empty(cam, std::nullopt, MaskImage(64, 48, 0.0));
  EXPECT_EQ(maskLoss(model, quad, away, empty, 1.0, 0.01).value, 0.0);
}

TEST(MaskLoss, FullRenderAgainstEmptyTruthIsOne) {
  const CameraModel cam{80, 80, 32, 24, 64, 48};
  const TriangleMesh quad({Vec3(-5, -5, 1), Vec3(5, -5, 1), Vec3(5, 5, 1), Vec3(-5, 5, 1)},
                          {Face{0, 1, 2}, Face{0, 2, 3}});
  const MaskTarget target(cam, std::nullopt, MaskImage(64, 48, 0.0));
  EXPECT_TRUE(target.objectEdgeDistance().empty());
  const MaskLoss loss = maskLoss(SkeletonModel::defaultHumanoid(), quad,
                                 identityState(SkeletonModel::defaultHumanoid()), target, 1.0, 0.01);
  EXPECT_EQ(loss.objectMse, 1.0);
  EXPECT_EQ(loss.objectEdge, 0.0);
  EXPECT_EQ(loss.value, 1.0);
}

TEST(MaskLoss, TargetRejectsMismatchedMasks) {
  const CameraModel cam{80, 80, 32, 24, 64, 48};
  EXPECT_THROW(MaskTarget(cam, MaskImage(10, 10), std::nullopt), Error);
}

TEST(MaskLoss, FiniteDifferenceGradientPointsDownhill) {
  const CameraModel cam{80, 80, 32, 24, 64, 48};
  const TriangleMesh box = makeBox(Vec3(0.1, 0.1, 0.1));
  const SkeletonModel& model = SkeletonModel::defaultHumanoid();
  FrameState truth = identityState(model);
  truth.object = RigidPose(Quat::Identity(), Vec3(0, 0, 1));
  const MaskTarget target(cam, std::nullopt, binarize(rasterizeSilhouette(box, truth.object, cam)));
  FrameState s = truth;
  s.object.setTranslation(Vec3(0.03, -0.02, 1));
  const FrameGradient g = maskLossGradient(model, box, s, target, 1.0, 0.01);
  EXPECT_GT(g.objectTranslation.x(), 0.0);
  EXPECT_LT(g.objectTranslation.y(), 0.0);
  FrameState moved = s;
  moved.object.setTranslation(s.object.translation() - 1e-3 * g.objectTranslation.normalized());
  EXPECT_LT(maskLoss(model, box, moved, target, 1.0, 0.01).value, maskLoss(model, box, s, target, 1.0, 0.01).value);
}

TEST(TotalLoss, ScalingWeightsScalesLoss) {
  const SkeletonModel& model = SkeletonModel::defaultHumanoid();
  const TriangleMesh box = makeBox(Vec3(0.06, 0.05, 0.08));
  std::mt19937_64 rng(3);
  const CameraModel cam{80, 80, 32, 24, 64, 48};
  for (int trial = 0; trial < 20; ++trial) {
    const FrameState s = forearmOverlap(rng);
    FrameState far = s;
    far.object.setTranslation(Vec3(0, 0, 1));
    const MaskTarget target(cam, MaskImage(64, 48, 1.0), binarize(rasterizeSilhouette(box, far.object, cam)));
    FrameProblem p{&model, &box, {{KeypointId{trial}, Vec3(0.01, 0, 0)}}, {}, &target};
    const double base = evaluateLoss(p, s).total;
    p.weights.contact *= 2;
    p.weights.collision *= 2;
    p.weights.mask *= 2;
    EXPECT_EQ(evaluateLoss(p, s).total, 2.0 * base);
  }
}

TEST(TotalLoss, NegativeWeightsRejected) {
  LossWeights w;
  w.beta = -1.0;
  EXPECT_THROW(w.validate(), Error);
}

TEST(Refine, ZeroWeightsAreIdentity) {
  const SkeletonModel& model = SkeletonModel::defaultHumanoid();
  const TriangleMesh box = makeBox(Vec3(0.06, 0.05, 0.08));
  std::mt19937_64 rng(4);
  const FrameState s = forearmOverlap(rng);
  FrameProblem p{&model, &box, {{KeypointId{3}, Vec3(0.1, 0, 0)}}, {}, nullptr};
  p.weights.contact = p.weights.collision = p.weights.mask = 0.0;
  std::set<int> all;
  for (int j = 0; j < model.numJoints(); ++j) all.insert(j);
  const RefineResult r = refineFrame(p, s, all);
  EXPECT_EQ(r.state, s);
  EXPECT_EQ(r.lossTrace.size(), 21u);
}

TEST(Refine, ContactOffsetClosesAndFrozenJointsStayBitExact) {
  const SkeletonModel& model = SkeletonModel::defaultHumanoid();
  const TriangleMesh box = makeBox(Vec3(0.03, 0.03, 0.03));
  std::mt19937_64 rng(21);
  FrameState s = identityState(model);
  for (Quat& q : s.human.rotations) q = hoi::testing::randomRotation(rng, 0.2);
  const KeypointId palm = *model.keypoint("leftHand/palm");
  const Vec3 objectPoint(0, 0.03, 0);
  const Vec3 kp = forwardKinematics(model, s.human).keypoints[palm.index];
  // Object placed so the contact point sits 5 cm from the palm keypoint.
  s.object = RigidPose(Quat::Identity(), kp - objectPoint + Vec3(0.03, 0.0, 0.04));
  FrameProblem p{&model, &box, {{palm, objectPoint}}, {}, nullptr};
  const std::set<int> mask = chainMask(model, {palm});
  const RefineResult r = refineFrame(p, s, mask);
  const Vec3 after = forwardKinematics(model, r.state.human).keypoints[palm.index];
  EXPECT_LT((r.state.object.transformPoint(objectPoint) - after).norm(), 0.01);
  for (int j = 0; j < model.numJoints(); ++j) {
    if (!mask.count(j)) EXPECT_TRUE(r.state.human.rotations[j].coeffs() == s.human.rotations[j].coeffs()) << j;
  }
  EXPECT_TRUE(r.state.human.rootTranslation == s.human.rootTranslation);
  EXPECT_LE(r.lossTrace[r.bestIteration], r.lossTrace.front());
}

TEST(Refine, StaticObjectStaysBitExact) {
  const SkeletonModel& model = SkeletonModel::defaultHumanoid();
  const TriangleMesh box = makeBox(Vec3(0.06, 0.05, 0.08));
  std::mt19937_64 rng(8);
  const FrameState s = forearmOverlap(rng);
  const KeypointId palm = *model.keypoint("leftHand/palm");
  FrameProblem p{&model, &box, {{palm, Vec3(0.06, 0, 0)}}, {}, nullptr};
  RefineOptions o;
  o.staticObject = true;
  const RefineResult r = refineFrame(p, s, chainMask(model, {palm}), o);
  EXPECT_TRUE(r.state.object == s.object);
  EXPECT_LT(r.lossTrace[r.bestIteration], r.lossTrace.front());
}

TEST(Refine, ZeroLossInputIsUnchanged) {
  const SkeletonModel& model = SkeletonModel::defaultHumanoid();
  const TriangleMesh box = makeBox(Vec3(0.03, 0.03, 0.03));
  FrameState s = identityState(model);
  const KeypointId palm = *model.keypoint("leftHand/palm");
  const Vec3 kp = forwardKinematics(model, s.human).keypoints[palm.index];
  s.object = RigidPose(Quat::Identity(), kp + Vec3(0, -0.5, 0));
  FrameProblem p{&model, &box, {{palm, Vec3(0, 0.5, 0)}}, {}, nullptr};
  p.weights.epsilon = 0.0;
  const RefineResult r = refineFrame(p, s, chainMask(model, {palm}));
  EXPECT_EQ(r.lossTrace.front(), 0.0);
  EXPECT_EQ(r.state, s);
}

TEST(Interpolate, Examples) {
  const SkeletonModel model = singleBone(0.1);
  FrameState a = identityState(model);
  FrameState b = a;
  b.object = RigidPose(Quat(Eigen::AngleAxisd(std::numbers::pi / 2, Vec3::UnitZ())), Vec3(0.3, 0, 0));
  const std::vector<FrameState> mid = interpolateFrames(a, b, 3);
  ASSERT_EQ(mid.size(), 2u);
  EXPECT_NEAR((mid[0].object.translation() - Vec3(0.1, 0, 0)).norm(), 0.0, 1e-15);
  EXPECT_NEAR((mid[1].object.translation() - Vec3(0.2, 0, 0)).norm(), 0.0, 1e-15);
  const Quat r30(Eigen::AngleAxisd(std::numbers::pi / 6, Vec3::UnitZ()));
  const Quat r60(Eigen::AngleAxisd(std::numbers::pi / 3, Vec3::UnitZ()));
  EXPECT_LT(hoi::testing::rotationError(mid[0].object.rotation(), r30), 1e-12);
  EXPECT_LT(hoi::testing::rotationError(mid[1].object.rotation(), r60), 1e-12);
  for (const FrameState& s : interpolateFrames(a, a, 4)) EXPECT_EQ(s, a);
}

TEST(Interpolate, SubsamplingReproducesKeyframes) {
  const SkeletonModel& model = SkeletonModel::defaultHumanoid();
  std::mt19937_64 rng(2);
  std::vector<FrameState> keys;
  for (int i = 0; i < 4; ++i) keys.push_back(randomState(model, rng, 0.5));
  std::vector<FrameState> seq;
  for (std::size_t i = 0; i + 1 < keys.size(); ++i) {
    seq.push_back(keys[i]);
    for (FrameState& s : interpolateFrames(keys[i], keys[i + 1], 3)) seq.push_back(s);
  }
  seq.push_back(keys.back());
  ASSERT_EQ(seq.size(), 10u);
  for (std::size_t i = 0; i < keys.size(); ++i) EXPECT_TRUE(seq[3 * i] == keys[i]);
}

TEST(Smooth, ConstantSequenceUnchanged) {
  const SkeletonModel& model = SkeletonModel::defaultHumanoid();
  std::mt19937_64 rng(6);
  const std::vector<FrameState> seq(40, randomState(model, rng, 1.0));
  const SmoothResult r = smoothSequence(seq, 4.0, 30.0);
  for (std::size_t i = 0; i < seq.size(); ++i) {
    EXPECT_LT((r.states[i].object.translation() - seq[i].object.translation()).norm(), 1e-9);
    EXPECT_LT(hoi::testing::rotationError(r.states[i].object.rotation(), seq[i].object.rotation()), 1e-9);
    for (int j = 0; j < model.numJoints(); ++j) {
      EXPECT_LT(hoi::testing::rotationError(r.states[i].human.rotations[j], seq[i].human.rotations[j]), 1e-9);
    }
  }
}

TEST(Smooth, PassbandSinusoidKeepsAmplitude) {
  const double fps = 30.0, cutoff = 4.0, f = 0.1 * cutoff;
  std::vector<double> x;
  for (int i = 0; i < 300; ++i) x.push_back(std::sin(2 * std::numbers::pi * f * i / fps));
  const std::vector<double> y = lowPassZeroPhase(x, cutoff, fps);
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_LT(std::abs(y[i] - x[i]), 0.01);
}

TEST(Smooth, StopbandIsAttenuated) {
  std::vector<double> x;
  for (int i = 0; i < 300; ++i) x.push_back(std::sin(2 * std::numbers::pi * 12.0 * i / 30.0));
  const std::vector<double> y = lowPassZeroPhase(x, 4.0, 30.0);
  for (std::size_t i = 30; i + 30 < y.size(); ++i) EXPECT_LT(std::abs(y[i]), 0.05);
}

TEST(Smooth, NoisyLineGetsSmoother) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> noise(0.0, 0.01);
  std::vector<double> x;
  for (int i = 0; i < 90; ++i) x.push_back(0.01 * i + noise(rng));
  auto roughness = [](const std::vector<double>& v) {
    double s = 0.0;
    for (std::size_t i = 3; i < v.size(); ++i) s += std::pow(v[i] - 3 * v[i - 1] + 3 * v[i - 2] - v[i - 3], 2);
    return s;
  };
  EXPECT_LT(roughness(lowPassZeroPhase(x, 4.0, 30.0)), roughness(x));
}

TEST(Smooth, TimeReversalSymmetric) {
  const SkeletonModel& model = SkeletonModel::defaultHumanoid();
  std::mt19937_64 rng(12);
  std::vector<FrameState> seq;
  FrameState s = randomState(model, rng, 0.5);
  for (int i = 0; i < 45; ++i) {
    for (Quat& q : s.human.rotations) q = (q * expMap(hoi::testing::randomVec(rng, -0.05, 0.05))).normalized();
    s.object.rotateLeft(hoi::testing::randomVec(rng, -0.05, 0.05));
    s.object.setTranslation(s.object.translation() + hoi::testing::randomVec(rng, -0.01, 0.01));
    s.human.rootTranslation += hoi::testing::randomVec(rng, -0.01, 0.01);
    seq.push_back(s);
  }
  const std::vector<FrameState> forward = smoothSequence(seq, 4.0, 30.0).states;
  const std::vector<FrameState> backward = smoothSequence({seq.rbegin(), seq.rend()}, 4.0, 30.0).states;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    const FrameState& a = forward[i];
    const FrameState& b = backward[seq.size() - 1 - i];
    EXPECT_LT((a.object.translation() - b.object.translation()).norm(), 1e-9);
    EXPECT_LT((a.human.rootTranslation - b.human.rootTranslation).norm(), 1e-9);
    EXPECT_LT(hoi::testing::rotationError(a.object.rotation(), b.object.rotation()), 1e-9);
    for (int j = 0; j < model.numJoints(); ++j) {
      EXPECT_LT(hoi::testing::rotationError(a.human.rotations[j], b.human.rotations[j]), 1e-9);
    }
  }
}

TEST(Smooth, ShortSequenceFallsBackWithWarning) {
  const SkeletonModel model = singleBone(0.1);
  std::vector<FrameState> seq(6, identityState(model));
  seq[2].object.setTranslation(Vec3(1, 0, 0));
  const SmoothResult r = smoothSequence(seq, 4.0, 30.0);
  EXPECT_EQ(r.states, seq);
  EXPECT_EQ(r.warnings.size(), 1u);
}

TEST(Smooth, RestrictedChannelsLeaveOthersBitExact) {
  const SkeletonModel& model = SkeletonModel::defaultHumanoid();
  std::mt19937_64 rng(13);
  std::vector<FrameState> seq;
  for (int i = 0; i < 20; ++i) seq.push_back(randomState(model, rng, 0.3));
  SmoothChannels ch;
  ch.rootTranslation = false;
  ch.allJoints = false;
  ch.joints = {9};
  const SmoothResult r = smoothSequence(seq, 4.0, 30.0, ch);
  for (std::size_t i = 0; i < seq.size(); ++i) {
    EXPECT_TRUE(r.states[i].human.rootTranslation == seq[i].human.rootTranslation);
    for (int j = 0; j < model.numJoints(); ++j) {
      if (j != 9) EXPECT_TRUE(r.states[i].human.rotations[j].coeffs() == seq[i].human.rotations[j].coeffs());
    }
  }
}

TEST(Smooth, InvalidCutoffRejected) {
  EXPECT_THROW(lowPassZeroPhase(std::vector<double>(10, 0.0), 15.0, 30.0), Error);
  EXPECT_THROW(lowPassZeroPhase(std::vector<double>(10, 0.0), 0.0, 30.0), Error);
}
