#include "hoi/solver/rigid_solver.h"

#include <cmath>

#include <Eigen/Eigenvalues>

#include "hoi/common/error.h"

namespace hoi {

namespace {

using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;

int positive(double w) {
  return w > 0.0 ? 1 : 0;
}

void checkInputs(const RigidPose& init, const std::vector<Correspondence3D3D>& c33,
                 const std::vector<Correspondence3D2D>& c32, const std::optional<CameraModel>& camera) {
  if (!init.translation().allFinite() || !init.rotation().coeffs().allFinite()) {
    throw Error(ErrorCode::NonFinite, "initial pose is not finite");
  }
  for (const auto& c : c33) {
    if (!c.objectPoint.allFinite() || !c.target.allFinite() || !std::isfinite(c.weight)) {
      throw Error(ErrorCode::NonFinite, "3D-3D correspondence is not finite");
    }
    if (c.weight < 0.0) {
      throw Error(ErrorCode::InvalidArgument, "negative correspondence weight");
    }
  }
  for (const auto& c : c32) {
    if (!c.objectPoint.allFinite() || !c.target.allFinite() || !std::isfinite(c.weight)) {
      throw Error(ErrorCode::NonFinite, "3D-2D correspondence is not finite");
    }
    if (c.weight < 0.0) {
      throw Error(ErrorCode::InvalidArgument, "negative correspondence weight");
    }
  }
  if (!c32.empty()) {
    if (!camera) {
      throw Error(ErrorCode::InvalidArgument, "3D-2D correspondences require a camera");
    }
    camera->validate();
  }
}

bool anyBehind(const RigidPose& pose, const std::vector<Correspondence3D2D>& c32) {
  for (const auto& c : c32) {
    if (c.weight > 0.0 && !(pose.transformPoint(c.objectPoint).z() > kDepthEpsilon)) {
      return true;
    }
  }
  return false;
}

struct Costs {
  double c3 = 0.0;
  double c2 = 0.0;
};

Costs evaluate(const RigidPose& pose, const std::vector<Correspondence3D3D>& c33,
               const std::vector<Correspondence3D2D>& c32, const std::optional<CameraModel>& camera) {
  Costs costs;
  for (const auto& c : c33) {
    costs.c3 += 0.5 * residual3D(pose, c).squaredNorm();
  }
  for (const auto& c : c32) {
    if (c.weight > 0.0) {
      costs.c2 += 0.5 * residual2D(pose, c, *camera).squaredNorm();
    }
  }
  return costs;
}

// Second derivative of c . (exp(delta) a) at delta = 0.
Mat3 rotationCurvature(const Vec3& c, const Vec3& a) {
  return 0.5 * (c * a.transpose() + a * c.transpose()) - c.dot(a) * Mat3::Identity();
}

// Gauss-Newton matrix `gn`, exact Hessian `full` and gradient `g` of the cost.
void normalEquations(const RigidPose& pose, const std::vector<Correspondence3D3D>& c33,
                     const std::vector<Correspondence3D2D>& c32, const std::optional<CameraModel>& camera,
                     Mat6& gn, Mat6& full, Vec6& g) {
  gn.setZero();
  g.setZero();
  Mat6 curvature = Mat6::Zero();
  for (const auto& c : c33) {
    if (c.weight <= 0.0) continue;
    const Jacobian3 j = jacobian3D(pose, c);
    const Vec3 r = residual3D(pose, c);
    gn.noalias() += j.transpose() * j;
    g.noalias() += j.transpose() * r;
    const Vec3 a = pose.rotation() * (pose.scale() * c.objectPoint);
    curvature.topLeftCorner<3, 3>() += rotationCurvature(std::sqrt(c.weight) * r, a);
  }
  for (const auto& c : c32) {
    if (c.weight <= 0.0) continue;
    const Jacobian2 j = jacobian2D(pose, c, *camera);
    const Vec2 r = residual2D(pose, c, *camera);
    gn.noalias() += j.transpose() * j;
    g.noalias() += j.transpose() * r;

    const Vec3 a = pose.rotation() * (pose.scale() * c.objectPoint);
    const Vec3 x = a + pose.translation();
    const Vec2 e = std::sqrt(c.weight) * r;  // weight * (projection - target)
    const double iz = 1.0 / x.z();
    const double fx = camera->fx, fy = camera->fy;
    // sum_k e_k * Hessian of the k-th projection coordinate w.r.t. x
    Mat3 p = Mat3::Zero();
    p(0, 2) = p(2, 0) = -e.x() * fx * iz * iz;
    p(1, 2) = p(2, 1) = -e.y() * fy * iz * iz;
    p(2, 2) = 2.0 * (e.x() * fx * x.x() + e.y() * fy * x.y()) * iz * iz * iz;
    Jacobian3 dx;
    dx.leftCols<3>() = -skew(a);
    dx.rightCols<3>() = Mat3::Identity();
    curvature.noalias() += dx.transpose() * p * dx;
    const Vec3 cx = camera->projectJacobian(x).transpose() * e;
    curvature.topLeftCorner<3, 3>() += rotationCurvature(cx, a);
  }
  full = gn + curvature;
}

bool positiveDefinite(const Mat6& m) {
  const Eigen::SelfAdjointEigenSolver<Mat6> eig(m, Eigen::EigenvaluesOnly);
  return eig.info() == Eigen::Success && eig.eigenvalues()[0] > 1e-12 * eig.eigenvalues()[5];
}

}  // namespace

Vec3 residual3D(const RigidPose& pose, const Correspondence3D3D& c) {
  return std::sqrt(c.weight) * (pose.transformPoint(c.objectPoint) - c.target);
}

Jacobian3 jacobian3D(const RigidPose& pose, const Correspondence3D3D& c) {
  const Vec3 a = pose.rotation() * (pose.scale() * c.objectPoint);
  Jacobian3 j;
  j.leftCols<3>() = -skew(a);
  j.rightCols<3>() = Mat3::Identity();
  return std::sqrt(c.weight) * j;
}

Vec2 residual2D(const RigidPose& pose, const Correspondence3D2D& c, const CameraModel& camera) {
  return std::sqrt(c.weight) * (camera.project(pose.transformPoint(c.objectPoint)) - c.target);
}

Jacobian2 jacobian2D(const RigidPose& pose, const Correspondence3D2D& c, const CameraModel& camera) {
  const Vec3 a = pose.rotation() * (pose.scale() * c.objectPoint);
  const Vec3 x = a + pose.translation();
  Jacobian3 dx;
  dx.leftCols<3>() = -skew(a);
  dx.rightCols<3>() = Mat3::Identity();
  return std::sqrt(c.weight) * camera.projectJacobian(x) * dx;
}

RigidPose applyIncrement(const RigidPose& pose, const Eigen::Matrix<double, 6, 1>& delta) {
  RigidPose out = pose;
  out.rotateLeft(delta.head<3>());
  out.setTranslation(pose.translation() + delta.tail<3>());
  return out;
}

namespace {

SolveReport levenbergMarquardt(const RigidPose& init, const std::vector<Correspondence3D3D>& c33,
                               const std::vector<Correspondence3D2D>& c32,
                               const std::optional<CameraModel>& camera, const RigidSolverOptions& options) {
  SolveReport report;
  RigidPose pose = init;
  Costs costs = evaluate(pose, c33, c32, camera);
  double cost = costs.c3 + costs.c2;
  report.initialCost = cost;
  double lambda = options.initialLambda;
  Mat6 gn, h;
  Vec6 g;
  normalEquations(pose, c33, c32, camera, gn, h, g);

  report.termination = "max_iterations";
  for (int it = 0; it < options.maxIterations; ++it) {
    if (cost == 0.0) {
      report.converged = true;
      report.termination = "zero_cost";
      break;
    }
    if (g.lpNorm<Eigen::Infinity>() < options.gradientTolerance) {
      report.converged = true;
      report.termination = "gradient";
      break;
    }
    report.iterations = it + 1;
    // The exact Hessian gives quadratic convergence on non-zero-residual
    // problems; far from the optimum it may be indefinite, so fall back to
    // the Gauss-Newton matrix there. Marquardt scaling keeps the iterates
    // invariant to a uniform rescaling of the weights.
    const Mat6& model = positiveDefinite(h) ? h : gn;
    const Vec6 diag = gn.diagonal().cwiseMax(1e-12 * gn.diagonal().maxCoeff());
    bool accepted = false;
    bool stalled = false;
    while (!accepted) {
      Mat6 damped = model;
      damped.diagonal() += lambda * diag;
      const Vec6 delta = damped.ldlt().solve(-g);
      if (!delta.allFinite()) {
        throw Error(ErrorCode::NonFinite, "non-finite LM step");
      }
      const RigidPose candidate = applyIncrement(pose, delta);
      if (!anyBehind(candidate, c32)) {
        const Costs next = evaluate(candidate, c33, c32, camera);
        const double nextCost = next.c3 + next.c2;
        if (nextCost < cost) {
          const double decrease = (cost - nextCost) / cost;
          pose = candidate;
          costs = next;
          cost = nextCost;
          lambda = std::max(lambda * options.lambdaDown, 1e-15);
          accepted = true;
          normalEquations(pose, c33, c32, camera, gn, h, g);
          if (decrease < options.relativeCostTolerance) {
            stalled = true;
          }
          break;
        }
      }
      lambda *= options.lambdaUp;
      if (lambda > 1e16) {
        stalled = true;
        break;
      }
    }
    if (stalled) {
      report.converged = true;
      report.termination = accepted ? "relative_decrease" : "no_descent";
      break;
    }
  }
  // The stopping tests fire while damping may still slow the final approach.
  // Undamped Newton steps finish it. Near the optimum the cost change drops
  // below its own rounding noise, so progress is judged by the gradient and
  // the cost may only rise by a rounding-level amount.
  for (int polish = 0; polish < 3 && cost > 0.0; ++polish) {
    const Vec6 delta = (positiveDefinite(h) ? h : gn).ldlt().solve(-g);
    if (!delta.allFinite()) break;
    const RigidPose candidate = applyIncrement(pose, delta);
    if (anyBehind(candidate, c32)) break;
    const Costs next = evaluate(candidate, c33, c32, camera);
    const double nextCost = next.c3 + next.c2;
    if (!(nextCost <= cost * (1.0 + 1e-13))) break;
    Mat6 nextGn, nextH;
    Vec6 nextG;
    normalEquations(candidate, c33, c32, camera, nextGn, nextH, nextG);
    if (!(nextG.lpNorm<Eigen::Infinity>() < 0.5 * g.lpNorm<Eigen::Infinity>())) break;
    pose = candidate;
    costs = next;
    cost = nextCost;
    gn = nextGn;
    h = nextH;
    g = nextG;
  }
  report.pose = pose;
  report.cost3D = costs.c3;
  report.cost2D = costs.c2;
  return report;
}

// True when the 3D-3D pairs alone pin down all six pose parameters.
bool fullRank3D(const RigidPose& pose, const std::vector<Correspondence3D3D>& c33) {
  Mat6 gn = Mat6::Zero();
  for (const auto& c : c33) {
    if (c.weight <= 0.0) continue;
    const Jacobian3 j = jacobian3D(pose, c);
    gn.noalias() += j.transpose() * j;
  }
  return gn.trace() > 0.0 && positiveDefinite(gn);
}

}  // namespace

std::pair<RigidPose, SolveReport> solveRigidPose(const RigidPose& init,
                                                 const std::vector<Correspondence3D3D>& c33,
                                                 const std::vector<Correspondence3D2D>& c32,
                                                 const std::optional<CameraModel>& camera,
                                                 const RigidSolverOptions& options) {
  checkInputs(init, c33, c32, camera);
  int num3D = 0, num2D = 0;
  for (const auto& c : c33) num3D += positive(c.weight);
  for (const auto& c : c32) num2D += positive(c.weight);
  const int rows = 3 * num3D + 2 * num2D;
  if (rows < 6) {
    throw Error(ErrorCode::UnderConstrained,
                std::to_string(rows) + " residual rows (" + std::to_string(num3D) + " 3D-3D, " +
                    std::to_string(num2D) + " 3D-2D); at least 6 required");
  }
  if (anyBehind(init, c32)) {
    throw Error(ErrorCode::BehindCamera, "a 3D-2D object point is behind the camera at the initial pose");
  }

  SolveReport report = levenbergMarquardt(init, c33, c32, camera, options);
  // Reprojection terms can trap the solve in a wrong basin when the start is
  // far off. If the 3D-3D pairs determine the pose on their own, their
  // solution is a second starting point; the lower final cost wins.
  if (num2D > 0 && report.cost() > 0.0 && fullRank3D(init, c33)) {
    const SolveReport coarse = levenbergMarquardt(init, c33, {}, std::nullopt, options);
    if (!anyBehind(coarse.pose, c32)) {
      SolveReport second = levenbergMarquardt(coarse.pose, c33, c32, camera, options);
      if (second.cost() < report.cost()) {
        second.initialCost = report.initialCost;
        second.iterations += coarse.iterations;
        report = second;
      }
    }
  }
  report.num3D = num3D;
  report.num2D = num2D;
  if (camera) {
    for (const auto& c : c32) {
      if (c.weight > 0.0 && !camera->inImage(c.target)) {
        report.warnings.push_back("2D target outside image bounds");
        break;
      }
    }
  }
  return {report.pose, report};
}

int FrameCorrespondences::annotationCount() const {
  int n = 0;
  for (const auto& c : c33) n += positive(c.weight);
  for (const auto& c : c32) n += positive(c.weight);
  return n;
}

int FrameCorrespondences::residualRows() const {
  int n = 0;
  for (const auto& c : c33) n += 3 * positive(c.weight);
  for (const auto& c : c32) n += 2 * positive(c.weight);
  return n;
}

StaticPoseResult estimateStaticPose(const std::vector<FrameCorrespondences>& frames,
                                    const std::optional<CameraModel>& camera,
                                    const std::vector<RigidPose>& initialPoses,
                                    const RigidSolverOptions& options) {
  if (!initialPoses.empty() && initialPoses.size() != frames.size()) {
    throw Error(ErrorCode::LengthMismatch, "initial pose count differs from frame count");
  }
  int chosen = -1;
  int bestCount = -1;
  for (int f = 0; f < static_cast<int>(frames.size()); ++f) {
    if (frames[f].residualRows() < 6) {
      continue;
    }
    const int count = frames[f].annotationCount();
    if (count > bestCount) {
      bestCount = count;
      chosen = f;
    }
  }
  if (chosen < 0) {
    throw Error(ErrorCode::UnderConstrained, "no frame has enough annotations for a static pose");
  }
  const RigidPose init = initialPoses.empty() ? RigidPose::identity() : initialPoses[chosen];
  auto [pose, report] = solveRigidPose(init, frames[chosen].c33, frames[chosen].c32, camera, options);
  return {pose, chosen, report};
}

}  // namespace hoi
