#include <cmath>

#include "hoi/common/error.h"
#include "hoi/optimizer/optimizer.h"

namespace hoi {

namespace {

// Adds the gradient of a world point attached to `owner` (moving rigidly with
// it) to every joint that moves it.
void accumulateJointGradient(const SkeletonModel& model, const FkResult& fk, int owner, const Vec3& x,
                             const Vec3& g, std::vector<Vec3>& out) {
  for (int m = owner; m >= 0; m = model.joints()[m].parent) {
    out[m] += fk.jointRotations[m].conjugate() * (x - fk.jointPositions[m]).cross(g);
  }
}

double meanSquaredError(const MaskImage& a, const MaskImage& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.values().size(); ++i) {
    const double d = a.values()[i] - b.values()[i];
    s += d * d;
  }
  return a.values().empty() ? 0.0 : s / static_cast<double>(a.values().size());
}

double edgeTerm(const MaskImage& rendered, const DistanceField& weights) {
  if (weights.empty()) return 0.0;
  const MaskImage edges = extractEdges(rendered);
  double s = 0.0;
  for (std::size_t i = 0; i < edges.values().size(); ++i) s += edges.values()[i] * weights.values()[i];
  return s;
}

void checkMaskSize(const MaskImage& m, const CameraModel& cam) {
  if (m.width() != cam.width || m.height() != cam.height) {
    throw Error(ErrorCode::DimensionMismatch, "ground-truth mask does not match the loss camera");
  }
}

struct EntityTerm {
  double mse = 0.0;
  double edge = 0.0;
};

EntityTerm entityTerm(const MaskImage& rendered, const MaskImage& truth, const std::optional<MaskImage>& other,
                      const DistanceField& edgeDistance) {
  const MaskImage visible = other ? occlusionMask(rendered, *other) : rendered;
  return {meanSquaredError(visible, truth), edgeTerm(visible, edgeDistance)};
}

EntityTerm objectTerm(const TriangleMesh& mesh, const RigidPose& pose, const MaskTarget& target) {
  const MaskImage rendered = rasterizeSilhouette(mesh, pose, target.camera());
  return entityTerm(rendered, *target.object(), target.human(), target.objectEdgeDistance());
}

}  // namespace

std::vector<ContactPair> activePairs(const std::vector<ContactPair>& pairs, int frame) {
  std::vector<ContactPair> out;
  for (const ContactPair& p : pairs) {
    if (p.activeAt(frame)) out.push_back(p);
  }
  return out;
}

void LossWeights::validate() const {
  for (double w : {contact, collision, mask, alpha, beta, lambdaHumanToObject, epsilon}) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw Error(ErrorCode::InvalidArgument, "loss weights must be finite and non-negative");
    }
  }
}

FrameGradient FrameGradient::zero(int numJoints) {
  FrameGradient g;
  g.joints.assign(numJoints, Vec3::Zero());
  return g;
}

FrameGradient& FrameGradient::operator+=(const FrameGradient& other) {
  if (joints.size() != other.joints.size()) {
    throw Error(ErrorCode::DimensionMismatch, "gradient joint counts differ");
  }
  for (std::size_t j = 0; j < joints.size(); ++j) joints[j] += other.joints[j];
  objectRotation += other.objectRotation;
  objectTranslation += other.objectTranslation;
  return *this;
}

FrameGradient FrameGradient::operator*(double s) const {
  FrameGradient g = *this;
  for (Vec3& j : g.joints) j *= s;
  g.objectRotation *= s;
  g.objectTranslation *= s;
  return g;
}

double FrameGradient::squaredNorm() const {
  double s = objectRotation.squaredNorm() + objectTranslation.squaredNorm();
  for (const Vec3& j : joints) s += j.squaredNorm();
  return s;
}

std::vector<double> contactWeights(const std::vector<double>& distances, double epsilon) {
  std::vector<double> w(distances.size(), 0.0);
  double total = 0.0;
  for (double d : distances) total += (d + epsilon) * (d + epsilon);
  if (!(total > 0.0)) return w;
  for (std::size_t i = 0; i < distances.size(); ++i) {
    w[i] = (distances[i] + epsilon) * (distances[i] + epsilon) / total;
  }
  return w;
}

LossValue contactLoss(const SkeletonModel& model, const std::vector<ContactPair>& pairs, const FrameState& state,
                      double epsilon) {
  LossValue out;
  out.gradient = FrameGradient::zero(model.numJoints());
  if (pairs.empty()) return out;
  const FkResult fk = forwardKinematics(model, state.human);

  std::vector<Vec3> diffs;
  std::vector<double> distances;
  for (const ContactPair& p : pairs) {
    const Vec3 diff = state.object.transformPoint(p.objectPoint) - fk.keypoints[model.checkedKeypoint(p.keypoint.index).index];
    diffs.push_back(diff);
    distances.push_back(diff.norm());
  }
  const std::vector<double> w = contactWeights(distances, epsilon);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    out.value += w[i] * distances[i] * distances[i];
    const Vec3 g = 2.0 * w[i] * diffs[i];
    const Vec3 a = state.object.rotation() * (state.object.scale() * pairs[i].objectPoint);
    out.gradient.objectTranslation += g;
    out.gradient.objectRotation += a.cross(g);
    const Keypoint& kp = model.keypoints()[pairs[i].keypoint.index];
    const Vec3 x = fk.keypoints[pairs[i].keypoint.index];
    accumulateJointGradient(model, fk, kp.joint, x, -g, out.gradient.joints);
  }
  return out;
}

CollisionLoss collisionLoss(const SkeletonModel& model, const TriangleMesh& mesh, const FrameState& state,
                            double lambdaHumanToObject) {
  CollisionLoss out;
  out.gradient = FrameGradient::zero(model.numJoints());
  if (mesh.empty()) return out;
  const FkResult fk = forwardKinematics(model, state.human);
  const std::vector<Capsule> caps = capsules(model, fk);
  const RigidPose& obj = state.object;
  const Vec3 t = obj.translation();

  // Human samples inside the object.
  if (!mesh.isWatertight()) {
    out.warnings.push_back("object mesh is not watertight; human-to-object collision skipped");
  } else {
    for (const Capsule& c : caps) {
      for (const Vec3& x : sampleCapsule(c)) {
        const Vec3 local = obj.inverseTransformPoint(x);
        if (!mesh.bounds().contains(local) || !mesh.contains(local)) continue;
        const Vec3 surface = obj.transformPoint(mesh.closestPoint(local).point);
        const Vec3 diff = x - surface;
        out.humanToObject += diff.squaredNorm();
        const Vec3 g = 2.0 * lambdaHumanToObject * diff;
        accumulateJointGradient(model, fk, c.frameJoint, x, g, out.gradient.joints);
        out.gradient.objectTranslation -= g;
        out.gradient.objectRotation += g.cross(surface - t);
      }
    }
  }

  // Object vertices inside a capsule; the deepest capsule counts.
  for (const Vec3& v0 : mesh.vertices()) {
    const Vec3 v = obj.transformPoint(v0);
    double depth = 0.0;
    int which = -1;
    Vec3 nearest = Vec3::Zero();
    for (std::size_t k = 0; k < caps.size(); ++k) {
      const Vec3 q = closestPointOnSegment(v, caps[k].a, caps[k].b);
      const double d = caps[k].radius - (v - q).norm();
      if (d > depth) {
        depth = d;
        which = static_cast<int>(k);
        nearest = q;
      }
    }
    if (which < 0) continue;
    out.objectToHuman += depth * depth;
    const double dist = (v - nearest).norm();
    if (dist == 0.0) continue;  // on the axis the direction is undefined
    const Vec3 g = -2.0 * depth * (v - nearest) / dist;
    out.gradient.objectTranslation += g;
    out.gradient.objectRotation += (v - t).cross(g);
    accumulateJointGradient(model, fk, caps[which].frameJoint, v, -g, out.gradient.joints);
  }
  out.value = lambdaHumanToObject * out.humanToObject + out.objectToHuman;
  return out;
}

MaskTarget::MaskTarget(const CameraModel& camera, std::optional<MaskImage> human, std::optional<MaskImage> object)
    : camera_(camera), human_(std::move(human)), object_(std::move(object)) {
  camera_.validate();
  if (human_) {
    checkMaskSize(*human_, camera_);
    humanDistance_ = distanceTransform(extractEdges(*human_));
  }
  if (object_) {
    checkMaskSize(*object_, camera_);
    objectDistance_ = distanceTransform(extractEdges(*object_));
  }
}

MaskLoss maskLoss(const SkeletonModel& model, const TriangleMesh& mesh, const FrameState& state,
                  const MaskTarget& target, double alpha, double beta) {
  MaskLoss out;
  if (target.human()) {
    const FkResult fk = forwardKinematics(model, state.human);
    const MaskImage rendered = rasterizeSilhouette(humanProxyMesh(capsules(model, fk)), RigidPose(), target.camera());
    const EntityTerm h = entityTerm(rendered, *target.human(), target.object(), target.humanEdgeDistance());
    out.humanMse = h.mse;
    out.humanEdge = h.edge;
    if (target.humanEdgeDistance().empty()) out.notes.push_back("human ground-truth mask has no edges");
  } else {
    out.notes.push_back("human mask missing");
  }
  if (target.object()) {
    const EntityTerm o = objectTerm(mesh, state.object, target);
    out.objectMse = o.mse;
    out.objectEdge = o.edge;
    if (target.objectEdgeDistance().empty()) out.notes.push_back("object ground-truth mask has no edges");
  } else {
    out.notes.push_back("object mask missing");
  }
  out.value = alpha * (out.humanMse + out.objectMse) + beta * (out.humanEdge + out.objectEdge);
  return out;
}

FrameGradient maskLossGradient(const SkeletonModel& model, const TriangleMesh& mesh, const FrameState& state,
                               const MaskTarget& target, double alpha, double beta, double step) {
  FrameGradient g = FrameGradient::zero(model.numJoints());
  if (!target.object()) return g;
  auto value = [&](const RigidPose& pose) {
    const EntityTerm o = objectTerm(mesh, pose, target);
    return alpha * o.mse + beta * o.edge;
  };
  for (int k = 0; k < 6; ++k) {
    RigidPose plus = state.object;
    RigidPose minus = state.object;
    Vec3 d = Vec3::Zero();
    d[k % 3] = step;
    if (k < 3) {
      plus.rotateLeft(d);
      minus.rotateLeft(-d);
    } else {
      plus.setTranslation(plus.translation() + d);
      minus.setTranslation(minus.translation() - d);
    }
    const double derivative = (value(plus) - value(minus)) / (2.0 * step);
    if (k < 3) {
      g.objectRotation[k] = derivative;
    } else {
      g.objectTranslation[k - 3] = derivative;
    }
  }
  return g;
}

LossBreakdown evaluateLoss(const FrameProblem& problem, const FrameState& state) {
  const LossWeights& w = problem.weights;
  LossBreakdown out;
  if (w.contact > 0.0) {
    out.contact = contactLoss(*problem.model, problem.pairs, state, w.epsilon).value;
  }
  if (w.collision > 0.0) {
    CollisionLoss c = collisionLoss(*problem.model, *problem.mesh, state, w.lambdaHumanToObject);
    out.collision = c.value;
    out.notes = std::move(c.warnings);
  }
  if (w.mask > 0.0 && problem.masks) {
    MaskLoss m = maskLoss(*problem.model, *problem.mesh, state, *problem.masks, w.alpha, w.beta);
    out.mask = m.value;
    out.notes.insert(out.notes.end(), m.notes.begin(), m.notes.end());
  }
  out.total = w.contact * out.contact + w.collision * out.collision + w.mask * out.mask;
  return out;
}

std::pair<LossBreakdown, FrameGradient> evaluateLossAndGradient(const FrameProblem& problem,
                                                                const FrameState& state) {
  const LossWeights& w = problem.weights;
  LossBreakdown out;
  FrameGradient grad = FrameGradient::zero(problem.model->numJoints());
  if (w.contact > 0.0) {
    const LossValue c = contactLoss(*problem.model, problem.pairs, state, w.epsilon);
    out.contact = c.value;
    grad += c.gradient * w.contact;
  }
  if (w.collision > 0.0) {
    CollisionLoss c = collisionLoss(*problem.model, *problem.mesh, state, w.lambdaHumanToObject);
    out.collision = c.value;
    out.notes = std::move(c.warnings);
    grad += c.gradient * w.collision;
  }
  if (w.mask > 0.0 && problem.masks) {
    MaskLoss m = maskLoss(*problem.model, *problem.mesh, state, *problem.masks, w.alpha, w.beta);
    out.mask = m.value;
    out.notes.insert(out.notes.end(), m.notes.begin(), m.notes.end());
    grad += maskLossGradient(*problem.model, *problem.mesh, state, *problem.masks, w.alpha, w.beta) * w.mask;
  }
  out.total = w.contact * out.contact + w.collision * out.collision + w.mask * out.mask;
  return {out, grad};
}

}  // namespace hoi
