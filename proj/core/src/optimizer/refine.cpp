#include <cmath>

#include "hoi/common/error.h"
#include "hoi/optimizer/optimizer.h"

namespace hoi {

namespace {

struct AdamMoments {
  Vec3 m = Vec3::Zero();
  Vec3 v = Vec3::Zero();

  // Returns the step for gradient g at 1-based iteration k.
  Vec3 step(const Vec3& g, double lr, const RefineOptions& o, int k) {
    m = o.beta1 * m + (1.0 - o.beta1) * g;
    v = o.beta2 * v + (1.0 - o.beta2) * g.cwiseProduct(g);
    const Vec3 mHat = m / (1.0 - std::pow(o.beta1, k));
    const Vec3 vHat = v / (1.0 - std::pow(o.beta2, k));
    return -lr * mHat.array() / (vHat.array().sqrt() + o.adamEpsilon);
  }
};

void checkProblem(const FrameProblem& problem, const FrameState& initial) {
  if (!problem.model || !problem.mesh) {
    throw Error(ErrorCode::InvalidArgument, "frame problem needs a skeleton model and an object mesh");
  }
  problem.weights.validate();
  initial.human.validate(*problem.model);
  for (const ContactPair& p : problem.pairs) problem.model->checkedKeypoint(p.keypoint.index);
}

}  // namespace

RefineResult refineFrame(const FrameProblem& problem, const FrameState& initial, const std::set<int>& jointMask,
                         const RefineOptions& options) {
  checkProblem(problem, initial);
  if (options.iterations < 0 || !(options.translationStep >= 0.0) || !(options.rotationStep >= 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "refine options must be non-negative");
  }
  const int numJoints = problem.model->numJoints();
  for (int j : jointMask) {
    if (j < 0 || j >= numJoints) throw Error(ErrorCode::InvalidArgument, "joint mask index out of range");
  }

  RefineResult result;
  result.state = initial;
  FrameState current = initial;
  std::vector<AdamMoments> jointMoments(numJoints);
  AdamMoments objectRotation;
  AdamMoments objectTranslation;
  double best = std::numeric_limits<double>::infinity();

  for (int it = 0; it <= options.iterations; ++it) {
    auto [loss, grad] = evaluateLossAndGradient(problem, current);
    if (it == 0) result.diagnostics = loss.notes;
    if (!std::isfinite(loss.total)) {
      result.diagnostics.push_back("non-finite loss at iteration " + std::to_string(it) + "; stopped");
      break;
    }
    result.lossTrace.push_back(loss.total);
    if (loss.total < best) {
      best = loss.total;
      result.state = current;
      result.bestIteration = it;
    }
    if (it == options.iterations) break;

    const int k = it + 1;
    for (int j : jointMask) {
      const Vec3 s = jointMoments[j].step(grad.joints[j], options.rotationStep, options, k);
      if (s.isZero(0.0)) continue;
      current.human.rotations[j] = (current.human.rotations[j] * expMap(s)).normalized();
    }
    if (!options.staticObject) {
      const Vec3 r = objectRotation.step(grad.objectRotation, options.rotationStep, options, k);
      if (!r.isZero(0.0)) current.object.rotateLeft(r);
      const Vec3 t = objectTranslation.step(grad.objectTranslation, options.translationStep, options, k);
      if (!t.isZero(0.0)) current.object.setTranslation(current.object.translation() + t);
    }
  }
  return result;
}

}  // namespace hoi
