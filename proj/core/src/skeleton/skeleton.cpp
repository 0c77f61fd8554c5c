#include "hoi/skeleton/skeleton.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "hoi/common/error.h"

namespace hoi {

std::string Keypoint::part() const {
  const auto slash = name.find('/');
  return slash == std::string::npos ? name : name.substr(0, slash);
}

std::string Keypoint::subPart() const {
  const auto slash = name.find('/');
  return slash == std::string::npos ? std::string() : name.substr(slash + 1);
}

SkeletonModel::SkeletonModel(std::vector<Joint> joints, std::vector<Keypoint> keypoints)
    : joints_(std::move(joints)), keypoints_(std::move(keypoints)) {
  if (joints_.empty()) {
    throw Error(ErrorCode::InvariantViolation, "skeleton has no joints");
  }
  for (int i = 0; i < numJoints(); ++i) {
    const int p = joints_[i].parent;
    if (i == 0 ? p != -1 : (p < 0 || p >= i)) {
      throw Error(ErrorCode::InvariantViolation,
                  "joint '" + joints_[i].name +
                      "' breaks the rooted-tree order (root first, parents before children)");
    }
    if (!joints_[i].offset.allFinite() || !(joints_[i].capsuleRadius >= 0.0)) {
      throw Error(ErrorCode::InvariantViolation, "joint '" + joints_[i].name + "' has invalid geometry");
    }
  }
  for (const Keypoint& k : keypoints_) {
    if (k.joint < 0 || k.joint >= numJoints()) {
      throw Error(ErrorCode::InvariantViolation, "keypoint '" + k.name + "' references a missing joint");
    }
  }
  ancestorOrSelf_.assign(numJoints(), std::vector<char>(numJoints(), 0));
  for (int i = 0; i < numJoints(); ++i) {
    for (int a = i; a >= 0; a = joints_[a].parent) {
      ancestorOrSelf_[i][a] = 1;
    }
  }
}

std::optional<int> SkeletonModel::jointIndex(const std::string& name) const {
  for (int i = 0; i < numJoints(); ++i) {
    if (joints_[i].name == name) {
      return i;
    }
  }
  return std::nullopt;
}

std::optional<KeypointId> SkeletonModel::keypoint(const std::string& name) const {
  for (int i = 0; i < numKeypoints(); ++i) {
    if (keypoints_[i].name == name) {
      return KeypointId{i};
    }
  }
  return std::nullopt;
}

KeypointId SkeletonModel::checkedKeypoint(int index) const {
  if (index < 0 || index >= numKeypoints()) {
    throw Error(ErrorCode::InvalidArgument, "keypoint id " + std::to_string(index) + " out of range");
  }
  return KeypointId{index};
}

bool SkeletonModel::isAncestorOrSelf(int ancestor, int joint) const {
  return ancestorOrSelf_[joint][ancestor] != 0;
}

std::vector<std::pair<std::string, std::vector<KeypointId>>> SkeletonModel::jointTree() const {
  std::vector<std::pair<std::string, std::vector<KeypointId>>> tree;
  for (int i = 0; i < numKeypoints(); ++i) {
    const std::string part = keypoints_[i].part();
    auto it = std::find_if(tree.begin(), tree.end(), [&](const auto& e) { return e.first == part; });
    if (it == tree.end()) {
      tree.push_back({part, {}});
      it = std::prev(tree.end());
    }
    it->second.push_back(KeypointId{i});
  }
  return tree;
}

void SkeletonModel::requireHumanKeypointSet() const {
  if (numKeypoints() != kNumHumanKeypoints) {
    throw Error(ErrorCode::InvariantViolation,
                "expected " + std::to_string(kNumHumanKeypoints) + " keypoints, found " +
                    std::to_string(numKeypoints()));
  }
  const auto& reference = defaultHumanoid().keypoints();
  for (int i = 0; i < numKeypoints(); ++i) {
    if (keypoints_[i].name != reference[i].name) {
      throw Error(ErrorCode::InvariantViolation,
                  "keypoint " + std::to_string(i) + " is '" + keypoints_[i].name + "', expected '" +
                      reference[i].name + "'");
    }
  }
}

SkeletonPose SkeletonPose::identity(const SkeletonModel& model) {
  SkeletonPose pose;
  pose.rotations.assign(model.numJoints(), Quat::Identity());
  return pose;
}

void SkeletonPose::validate(const SkeletonModel& model) const {
  if (static_cast<int>(rotations.size()) != model.numJoints()) {
    throw Error(ErrorCode::InvalidArgument, "pose has " + std::to_string(rotations.size()) +
                                                " rotations for " + std::to_string(model.numJoints()) +
                                                " joints");
  }
  for (const Quat& q : rotations) {
    if (!(std::abs(q.norm() - 1.0) <= 1e-9)) {
      throw Error(ErrorCode::InvalidArgument, "joint rotation is not a unit quaternion");
    }
  }
  if (!rootTranslation.allFinite()) {
    throw Error(ErrorCode::NonFinite, "root translation is not finite");
  }
}

bool SkeletonPose::operator==(const SkeletonPose& other) const {
  if (rotations.size() != other.rotations.size() || rootTranslation != other.rootTranslation) {
    return false;
  }
  for (std::size_t i = 0; i < rotations.size(); ++i) {
    if (rotations[i].coeffs() != other.rotations[i].coeffs()) {
      return false;
    }
  }
  return true;
}

FkResult forwardKinematics(const SkeletonModel& model, const SkeletonPose& pose) {
  const int n = model.numJoints();
  if (static_cast<int>(pose.rotations.size()) != n) {
    throw Error(ErrorCode::InvalidArgument, "pose size does not match skeleton");
  }
  FkResult fk;
  fk.jointRotations.resize(n);
  fk.jointPositions.resize(n);
  const auto& joints = model.joints();
  for (int i = 0; i < n; ++i) {
    const int p = joints[i].parent;
    if (p < 0) {
      fk.jointRotations[i] = pose.rotations[i];
      fk.jointPositions[i] = pose.rootTranslation + joints[i].offset;
    } else {
      fk.jointRotations[i] = fk.jointRotations[p] * pose.rotations[i];
      fk.jointPositions[i] = fk.jointPositions[p] + fk.jointRotations[p] * joints[i].offset;
    }
  }
  fk.keypoints.resize(model.numKeypoints());
  for (int k = 0; k < model.numKeypoints(); ++k) {
    const Keypoint& kp = model.keypoints()[k];
    fk.keypoints[k] = fk.jointPositions[kp.joint] + fk.jointRotations[kp.joint] * kp.offset;
  }
  return fk;
}

std::set<int> chainMask(const SkeletonModel& model, const std::set<KeypointId>& activeKeypoints,
                        int depth) {
  if (depth < 1) {
    throw Error(ErrorCode::InvalidArgument, "chain depth must be >= 1");
  }
  std::set<int> mask;
  for (const KeypointId& id : activeKeypoints) {
    int j = model.keypoints().at(model.checkedKeypoint(id.index).index).joint;
    for (int d = 0; d < depth && j >= 0; ++d) {
      mask.insert(j);
      j = model.joints()[j].parent;
    }
  }
  return mask;
}

std::vector<Capsule> capsules(const SkeletonModel& model, const FkResult& fk) {
  std::vector<Capsule> out;
  for (int i = 0; i < model.numJoints(); ++i) {
    const Joint& j = model.joints()[i];
    if (j.parent < 0 || j.capsuleRadius <= 0.0) {
      continue;
    }
    out.push_back({j.parent, i, fk.jointPositions[j.parent], fk.jointPositions[i], j.capsuleRadius,
                   fk.jointRotations[j.parent]});
  }
  return out;
}

Vec3 closestPointOnSegment(const Vec3& p, const Vec3& a, const Vec3& b) {
  const Vec3 ab = b - a;
  const double len2 = ab.squaredNorm();
  if (len2 == 0.0) {
    return a;
  }
  const double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
  return a + t * ab;
}

std::vector<Vec3> sampleCapsule(const Capsule& c, int rings, int perRing) {
  std::vector<Vec3> out;
  Vec3 axis = c.b - c.a;
  const double len = axis.norm();
  axis = len > 0.0 ? Vec3(axis / len) : Vec3::UnitY();
  const Vec3 u = c.frame * (c.frame.conjugate() * axis).unitOrthogonal();
  const Vec3 v = axis.cross(u);
  for (int r = 0; r < rings; ++r) {
    const double t = (r + 0.5) / rings;
    const Vec3 center = c.a + t * (c.b - c.a);
    for (int k = 0; k < perRing; ++k) {
      const double phi = 2.0 * std::numbers::pi * (k + 0.5 * (r % 2)) / perRing;
      out.push_back(center + c.radius * (std::cos(phi) * u + std::sin(phi) * v));
    }
  }
  out.push_back(c.a - c.radius * axis);
  out.push_back(c.b + c.radius * axis);
  return out;
}

namespace {

double objective(const SkeletonModel& model, const SkeletonPose& pose, const std::vector<IkTarget>& targets,
                 double* maxResidual) {
  const FkResult fk = forwardKinematics(model, pose);
  double sum = 0.0;
  double worst = 0.0;
  for (const IkTarget& t : targets) {
    const double d2 = (fk.keypoints[t.keypoint.index] - t.position).squaredNorm();
    sum += d2;
    worst = std::max(worst, d2);
  }
  if (maxResidual) {
    *maxResidual = std::sqrt(worst);
  }
  return sum;
}

}  // namespace

IkResult solveLimbIk(const SkeletonModel& model, const SkeletonPose& pose,
                     const std::vector<IkTarget>& targets, const std::set<int>& mask,
                     const IkOptions& options) {
  pose.validate(model);
  IkResult result;
  result.pose = pose;

  // Joints that can influence at least one target.
  std::vector<int> active;
  for (int j : mask) {
    if (j < 0 || j >= model.numJoints()) {
      throw Error(ErrorCode::InvalidArgument, "mask joint out of range");
    }
    for (const IkTarget& t : targets) {
      if (model.isAncestorOrSelf(j, model.keypoints()[model.checkedKeypoint(t.keypoint.index).index].joint)) {
        active.push_back(j);
        break;
      }
    }
  }
  for (const IkTarget& t : targets) {
    const int owner = model.keypoints()[t.keypoint.index].joint;
    const bool reachable = std::any_of(active.begin(), active.end(),
                                       [&](int j) { return model.isAncestorOrSelf(j, owner); });
    if (!reachable) {
      throw Error(ErrorCode::InvalidArgument,
                  "IK target '" + model.keypoints()[t.keypoint.index].name + "' has no masked joint in its chain");
    }
  }

  double worst = 0.0;
  double current = objective(model, result.pose, targets, &worst);
  result.objectiveTrace.push_back(current);
  if (targets.empty() || worst <= options.tolerance) {
    result.converged = true;
    return result;
  }

  const int m = static_cast<int>(targets.size());
  const int n = static_cast<int>(active.size());
  double mu = options.damping * options.damping;
  for (int it = 0; it < options.maxIterations; ++it) {
    const FkResult fk = forwardKinematics(model, result.pose);
    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(3 * m, 3 * n);
    Eigen::VectorXd err(3 * m);
    for (int i = 0; i < m; ++i) {
      const int kp = targets[i].keypoint.index;
      const int owner = model.keypoints()[kp].joint;
      const Vec3 x = fk.keypoints[kp];
      err.segment<3>(3 * i) = targets[i].position - x;
      for (int a = 0; a < n; ++a) {
        const int j = active[a];
        if (model.isAncestorOrSelf(j, owner)) {
          // dx = (R_j delta) x (x - p_j) for a local right-perturbation delta.
          jac.block<3, 3>(3 * i, 3 * a) = -skew(x - fk.jointPositions[j]) * fk.jointRotations[j].toRotationMatrix();
        }
      }
    }
    const Eigen::MatrixXd jtj = jac.transpose() * jac;
    const Eigen::VectorXd jte = jac.transpose() * err;

    bool accepted = false;
    for (int attempt = 0; attempt < 12 && !accepted; ++attempt) {
      const Eigen::MatrixXd h = jtj + mu * Eigen::MatrixXd::Identity(3 * n, 3 * n);
      const Eigen::VectorXd step = h.ldlt().solve(jte);
      if (!step.allFinite()) {
        break;
      }
      SkeletonPose candidate = result.pose;
      for (int a = 0; a < n; ++a) {
        Quat& q = candidate.rotations[active[a]];
        q = q * expMap(step.segment<3>(3 * a));
        q.normalize();
      }
      double candidateWorst = 0.0;
      const double value = objective(model, candidate, targets, &candidateWorst);
      if (value < current) {
        result.pose = std::move(candidate);
        current = value;
        worst = candidateWorst;
        mu = std::max(mu * 0.1, 1e-12);
        accepted = true;
      } else {
        mu *= 10.0;
      }
    }
    if (!accepted) {
      break;
    }
    result.iterations = it + 1;
    result.objectiveTrace.push_back(current);
    if (worst <= options.tolerance) {
      result.converged = true;
      break;
    }
  }
  return result;
}

namespace {

using nlohmann::json;

json vecToJson(const Vec3& v) {
  return json::array({v.x(), v.y(), v.z()});
}

Vec3 vecFromJson(const json& j) {
  if (!j.is_array() || j.size() != 3) {
    throw Error(ErrorCode::ParseError, "expected a 3-vector");
  }
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

constexpr int kSkeletonFileVersion = 1;

}  // namespace

std::string skeletonToJson(const SkeletonModel& model) {
  json doc;
  doc["version"] = kSkeletonFileVersion;
  json joints = json::array();
  for (const Joint& j : model.joints()) {
    joints.push_back({{"name", j.name},
                      {"parent", j.parent},
                      {"offset", vecToJson(j.offset)},
                      {"capsule_radius", j.capsuleRadius}});
  }
  doc["joints"] = joints;
  json keypoints = json::array();
  for (int i = 0; i < model.numKeypoints(); ++i) {
    const Keypoint& k = model.keypoints()[i];
    keypoints.push_back({{"id", i},
                         {"name", k.name},
                         {"joint", model.joints()[k.joint].name},
                         {"offset", vecToJson(k.offset)}});
  }
  doc["keypoints"] = keypoints;
  return doc.dump(2) + "\n";
}

SkeletonModel skeletonFromJson(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
  if (doc.value("version", -1) != kSkeletonFileVersion) {
    throw Error(ErrorCode::SchemaVersionMismatch, "skeleton file version must be 1");
  }
  try {
    std::vector<Joint> joints;
    std::map<std::string, int> byName;
    for (const json& j : doc.at("joints")) {
      Joint joint;
      joint.name = j.at("name").get<std::string>();
      joint.parent = j.at("parent").get<int>();
      joint.offset = vecFromJson(j.at("offset"));
      joint.capsuleRadius = j.value("capsule_radius", 0.0);
      byName[joint.name] = static_cast<int>(joints.size());
      joints.push_back(joint);
    }
    std::vector<Keypoint> keypoints;
    for (const json& k : doc.at("keypoints")) {
      const int id = k.at("id").get<int>();
      if (id != static_cast<int>(keypoints.size())) {
        throw Error(ErrorCode::InvariantViolation, "keypoint ids must be 0..N-1 in order");
      }
      const auto owner = byName.find(k.at("joint").get<std::string>());
      if (owner == byName.end()) {
        throw Error(ErrorCode::InvariantViolation, "keypoint references unknown joint");
      }
      keypoints.push_back({k.at("name").get<std::string>(), owner->second, vecFromJson(k.at("offset"))});
    }
    return SkeletonModel(std::move(joints), std::move(keypoints));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
}

SkeletonModel loadSkeleton(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::MissingAsset, path.string());
  }
  std::stringstream ss;
  ss << in.rdbuf();
  return skeletonFromJson(ss.str());
}

void saveSkeleton(const SkeletonModel& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw Error(ErrorCode::IoError, "cannot write " + path.string());
  }
  out << skeletonToJson(model);
}

}  // namespace hoi
