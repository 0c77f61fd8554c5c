#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <hoi/session/session.h>
#include <hoi/silhouette/silhouette.h>

namespace hoi::testing {

// A box held under the left palm of the default humanoid, filmed by a fixed
// pinhole camera. Contacts are closed by construction: object points are the
// hand keypoints expressed in the box frame.
struct SceneOptions {
  int frames = 30;
  double fps = 30.0;
  bool masks = true;
  bool tracks = true;
  bool staticObject = false;  // human and box hold still; pairs cover staggered ranges
  double imageScale = 1.0;    // camera resolution relative to 640x480
};

struct SyntheticScene {
  std::filesystem::path sessionPath;
  std::vector<FrameState> truth;
  std::vector<ContactPair> pairs;
};

inline const Vec3& boxHalfExtent() {
  static const Vec3 h(0.1, 0.06, 0.06);
  return h;
}

inline CameraModel sceneCamera(double scale = 1.0) {
  CameraModel c;
  c.fx = 500.0 * scale;
  c.fy = 500.0 * scale;
  c.cx = 320.0 * scale;
  c.cy = 240.0 * scale;
  c.width = static_cast<int>(std::lround(640 * scale));
  c.height = static_cast<int>(std::lround(480 * scale));
  return c;
}

inline SkeletonPose sceneHuman(double time, bool still) {
  const SkeletonModel& m = SkeletonModel::defaultHumanoid();
  SkeletonPose p = SkeletonPose::identity(m);
  const double s = still ? 0.0 : time;
  const double w = 2.0 * std::numbers::pi;
  p.rootTranslation = Vec3(-0.35 + 0.08 * std::sin(w * 0.2 * s), -1.3, 2.6 + 0.1 * s);
  p.rotations[*m.jointIndex("leftUpperArm")] = Quat(Eigen::AngleAxisd(-0.4 + 0.25 * std::sin(w * 0.25 * s), Vec3::UnitZ()));
  p.rotations[*m.jointIndex("leftForeArm")] = Quat(Eigen::AngleAxisd(0.5 + 0.3 * std::sin(w * 0.3 * s + 0.5), Vec3::UnitY()));
  p.rotations[*m.jointIndex("leftHand")] = Quat(Eigen::AngleAxisd(0.2 * std::sin(w * 0.4 * s), Vec3::UnitX()));
  return p;
}

// Box frame: the hand's world rotation, centred below the palm.
inline RigidPose boxPose(const SkeletonPose& human) {
  const SkeletonModel& m = SkeletonModel::defaultHumanoid();
  const FkResult fk = forwardKinematics(m, human);
  const int hand = *m.jointIndex("leftHand");
  const Quat r = fk.jointRotations[hand];
  return RigidPose(r, fk.jointPositions[hand] + r * Vec3(0.12, -0.09, 0.0));
}

inline std::vector<std::string> contactKeypoints(bool still) {
  if (still) return {"leftHand/palm", "leftHand/back", "leftHand/Index", "leftHand/Thumb", "leftHand/Middle"};
  return {"leftHand/palm", "leftHand/Index", "leftHand/Thumb", "leftHand/back"};
}

inline std::vector<Vec3> trackedCorners() {
  const Vec3& h = boxHalfExtent();
  return {Vec3(h.x(), h.y(), h.z()), Vec3(-h.x(), -h.y(), h.z()), Vec3(h.x(), -h.y(), -h.z()),
          Vec3(-h.x(), h.y(), -h.z())};
}

inline std::string maskName(const char* prefix, int frame) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s_%04d.png", prefix, frame);
  return buf;
}

// Depth (z) of the nearest hit along the camera ray through `uv`, or +inf.
inline double rayDepth(const TriangleMesh& mesh, const RigidPose& pose, const CameraModel& cam, const Vec2& uv) {
  const Vec3 d((uv.x() - cam.cx) / cam.fx, (uv.y() - cam.cy) / cam.fy, 1.0);
  double best = std::numeric_limits<double>::infinity();
  for (const Face& f : mesh.faces()) {
    const Vec3 a = pose.transformPoint(mesh.vertices()[f[0]]);
    const Vec3 e1 = pose.transformPoint(mesh.vertices()[f[1]]) - a;
    const Vec3 e2 = pose.transformPoint(mesh.vertices()[f[2]]) - a;
    const Vec3 p = d.cross(e2);
    const double det = e1.dot(p);
    if (std::abs(det) < 1e-15) continue;
    const double u = -a.dot(p) / det;
    const Vec3 q = (-a).cross(e1);
    const double v = d.dot(q) / det;
    const double z = e2.dot(q) / det;
    if (u >= 0.0 && v >= 0.0 && u + v <= 1.0 && z > 0.0) best = std::min(best, z);
  }
  return best;
}

// Visible-region masks: where both silhouettes cover a pixel, the nearer
// surface keeps it.
inline std::pair<MaskImage, MaskImage> visibleMasks(const TriangleMesh& human, const TriangleMesh& object,
                                                    const RigidPose& objectPose, const CameraModel& cam) {
  MaskImage h = binarize(rasterizeSilhouette(human, RigidPose(), cam));
  MaskImage o = binarize(rasterizeSilhouette(object, objectPose, cam));
  for (int y = 0; y < cam.height; ++y) {
    for (int x = 0; x < cam.width; ++x) {
      if (h(x, y) == 0.0 || o(x, y) == 0.0) continue;
      const Vec2 uv(x + 0.5, y + 0.5);
      if (rayDepth(human, RigidPose(), cam, uv) < rayDepth(object, objectPose, cam, uv)) {
        o(x, y) = 0.0;
      } else {
        h(x, y) = 0.0;
      }
    }
  }
  return {h, o};
}

/// Writes session.json, box.obj, human_poses.json and masks/ into `dir`.
inline SyntheticScene writeScene(const std::filesystem::path& dir, const SceneOptions& options) {
  const SkeletonModel& model = SkeletonModel::defaultHumanoid();
  std::filesystem::create_directories(dir);
  const int n = options.frames;
  const bool still = options.staticObject;

  SyntheticScene scene;
  scene.sessionPath = dir / "session.json";
  for (int t = 0; t < n; ++t) {
    FrameState f;
    f.human = sceneHuman(t / options.fps, still);
    f.object = boxPose(f.human);
    scene.truth.push_back(f);
  }

  const TriangleMesh box = makeBox(boxHalfExtent());
  saveObj(box, dir / "box.obj");
  MotionSequence poses;
  poses.fps = options.fps;
  for (const FrameState& f : scene.truth) poses.frames.push_back({f.human, RigidPose()});
  saveMotion(poses, dir / "human_poses.json");

  SceneSession s;
  s.root = dir;
  s.camera = sceneCamera(options.imageScale);
  s.fps = options.fps;
  s.meshPath = "box.obj";
  s.skeletonPath = "builtin:humanoid";
  s.humanPosesPath = "human_poses.json";
  s.skeleton = model;
  s.mesh = box;
  for (const FrameState& f : scene.truth) s.humanPoses.push_back(f.human);

  if (options.masks) {
    s.masksDir = "masks";
    std::filesystem::create_directories(dir / "masks");
    for (int t = 0; t < n; ++t) {
      const FrameState& f = scene.truth[t];
      const TriangleMesh proxy = humanProxyMesh(capsules(model, forwardKinematics(model, f.human)));
      const auto [human, object] = visibleMasks(proxy, box, f.object, s.camera);
      saveMaskPng(human, dir / "masks" / maskName("human", t));
      saveMaskPng(object, dir / "masks" / maskName("object", t));
    }
  }

  // Still scenes stagger the pair ranges so that frames 8-9 and 14-15 tie for
  // the most annotations.
  const std::vector<std::string> names = contactKeypoints(still);
  const std::vector<std::pair<int, int>> stillRanges = {{0, n}, {5, 16}, {8, 16}, {8, 10}, {14, 16}};
  std::int64_t clock = 0;
  for (std::size_t i = 0; i < names.size(); ++i) {
    const KeypointId k = *model.keypoint(names[i]);
    const Vec3 world = forwardKinematics(model, scene.truth[0].human).keypoints[k.index];
    ContactPair p{k, scene.truth[0].object.inverseTransformPoint(world), 0, n};
    if (still) std::tie(p.start, p.end) = stillRanges[i];
    scene.pairs.push_back(p);
    s.addEvent({p.start, clock += 1000, AddPairEvent{p}});
  }
  if (still) s.addEvent({0, clock += 1000, SetStaticEvent{true}});

  if (options.tracks && !still) {
    const std::vector<Vec3> corners = trackedCorners();
    for (std::size_t c = 0; c < corners.size(); ++c) {
      std::vector<TrackPoint> points;
      for (int t = 0; t < n; ++t) {
        const Vec2 uv = s.camera.project(scene.truth[t].object.transformPoint(corners[c]));
        points.push_back({t, uv, s.camera.inImage(uv)});
      }
      const int track = static_cast<int>(c);
      s.addEvent({0, clock += 1000, AddTrackPointEvent{track, corners[c], points[0].pixel}});
      s.addEvent({0, clock += 1000, RetrackEvent{track, points}});
    }
  }
  saveSession(s, scene.sessionPath);
  return scene;
}

/// Ground truth with Gaussian noise on every object pose.
inline std::vector<FrameState> perturbObjects(const std::vector<FrameState>& truth, double sigmaRot, double sigmaT,
                                              std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::vector<FrameState> out = truth;
  for (FrameState& f : out) {
    const Vec3 w(g(rng) * sigmaRot, g(rng) * sigmaRot, g(rng) * sigmaRot);
    const Vec3 dt(g(rng) * sigmaT, g(rng) * sigmaT, g(rng) * sigmaT);
    f.object = RigidPose((expMap(w) * f.object.rotation()).normalized(), f.object.translation() + dt, f.object.scale());
  }
  return out;
}

inline double objectRmse(const std::vector<FrameState>& a, const std::vector<FrameState>& b) {
  double sum = 0.0;
  for (std::size_t t = 0; t < a.size(); ++t) sum += (a[t].object.translation() - b[t].object.translation()).squaredNorm();
  return std::sqrt(sum / static_cast<double>(a.size()));
}

}  // namespace hoi::testing
