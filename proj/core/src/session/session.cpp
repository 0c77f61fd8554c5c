#include "hoi/session/session.h"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "json_util.h"

namespace hoi {

using detail::Json;
using detail::Reader;
using detail::toJson;

namespace {

constexpr const char* kBuiltinHumanoid = "builtin:humanoid";
constexpr int kSessionPrecision = 9;
constexpr int kMotionPrecision = 17;

template <class... F>
struct Overloaded : F... {
  using F::operator()...;
};
template <class... F>
Overloaded(F...) -> Overloaded<F...>;

[[noreturn]] void invalid(const std::string& message) {
  throw Error(ErrorCode::InvalidArgument, message);
}

void checkFrame(int frame, int frameCount, const std::string& what) {
  if (frame < 0 || frame >= frameCount) {
    invalid(what + " frame " + std::to_string(frame) + " outside [0, " + std::to_string(frameCount) + ")");
  }
}

void checkPair(const ContactPair& p, int frameCount, int numKeypoints) {
  if (p.keypoint.index < 0 || p.keypoint.index >= numKeypoints) {
    invalid("keypoint " + std::to_string(p.keypoint.index) + " does not exist");
  }
  if (!p.objectPoint.allFinite()) invalid("object point is not finite");
  if (p.start < 0 || p.start >= p.end || p.end > frameCount) {
    invalid("pair frame range [" + std::to_string(p.start) + ", " + std::to_string(p.end) + ") is not within [0, " +
            std::to_string(frameCount) + ")");
  }
}

void checkTrackPoints(const std::vector<TrackPoint>& points, int frameCount) {
  for (std::size_t i = 0; i < points.size(); ++i) {
    checkFrame(points[i].frame, frameCount, "track point");
    if (!points[i].pixel.allFinite()) invalid("track pixel is not finite");
    if (i > 0 && points[i].frame != points[i - 1].frame + 1) {
      invalid("track points must cover consecutive frames");
    }
  }
}

std::vector<TrackPoint> clicksOf(const Track2D& t) {
  std::vector<TrackPoint> clicks;
  for (int f : t.clickedFrames) clicks.push_back(*t.at(f));
  return clicks;
}

// Inserts `p` into a contiguous external track, bridging any gap linearly.
void insertPoint(std::vector<TrackPoint>& points, const TrackPoint& p) {
  if (points.empty()) {
    points.push_back(p);
    return;
  }
  if (p.frame < points.front().frame) {
    std::vector<TrackPoint> bridge = interpolateClicks({p, points.front()});
    bridge.pop_back();
    points.insert(points.begin(), bridge.begin(), bridge.end());
  } else if (p.frame > points.back().frame) {
    std::vector<TrackPoint> bridge = interpolateClicks({points.back(), p});
    points.insert(points.end(), bridge.begin() + 1, bridge.end());
  } else {
    points[p.frame - points.front().frame] = p;
  }
}

ContactPair pairFromJson(const Reader& r) {
  r.onlyKeys({"keypoint", "object_point", "start", "end"});
  return {KeypointId{r.at("keypoint").integer()}, r.at("object_point").vec3(), r.at("start").integer(),
          r.at("end").integer()};
}

Json pairToJson(const ContactPair& p) {
  return {{"keypoint", p.keypoint.index}, {"object_point", toJson(p.objectPoint)}, {"start", p.start}, {"end", p.end}};
}

std::vector<TrackPoint> trackPointsFromJson(const Reader& r) {
  std::vector<TrackPoint> out;
  for (std::size_t i = 0; i < r.size(); ++i) {
    const Reader p = r.at(i);
    if (p.size() != 4) p.fail("expected [frame, u, v, valid]");
    out.push_back({p.at(0).integer(), Vec2(p.at(1).number(), p.at(2).number()), p.at(3).boolean()});
  }
  return out;
}

Json trackPointsToJson(const std::vector<TrackPoint>& points) {
  Json a = Json::array();
  for (const TrackPoint& p : points) a.push_back(Json::array({p.frame, p.pixel.x(), p.pixel.y(), p.valid}));
  return a;
}

Json trackToJson(const Track2D& t) {
  Json j = {{"object_point", toJson(t.objectPoint)}, {"points", trackPointsToJson(t.points)}};
  if (t.fallback()) j["clicked"] = t.clickedFrames;
  return j;
}

Track2D trackFromJson(const Reader& r) {
  r.onlyKeys({"object_point", "points", "clicked"});
  Track2D t;
  t.objectPoint = r.at("object_point").vec3();
  t.points = trackPointsFromJson(r.at("points"));
  if (r.has("clicked")) {
    const Reader c = r.at("clicked");
    for (std::size_t i = 0; i < c.size(); ++i) t.clickedFrames.push_back(c.at(i).integer());
  }
  return t;
}

Json payloadToJson(const EventPayload& payload) {
  return std::visit(Overloaded{
                        [](const AddPairEvent& e) { return pairToJson(e.pair); },
                        [](const RemovePairEvent& e) { return Json{{"index", e.index}}; },
                        [](const AddTrackPointEvent& e) {
                          Json j = {{"track", e.track}, {"u", e.pixel.x()}, {"v", e.pixel.y()}};
                          if (e.objectPoint) j["object_point"] = toJson(*e.objectPoint);
                          return j;
                        },
                        [](const RetrackEvent& e) { return Json{{"track", e.track}, {"points", trackPointsToJson(e.points)}}; },
                        [](const SetStaticEvent& e) { return Json{{"value", e.value}}; },
                        [](const SetScaleEvent& e) { return Json{{"value", e.value}}; },
                    },
                    payload);
}

Json eventJson(const AnnotationEvent& e) {
  return {{"kind", e.kind()}, {"frame", e.frame}, {"timestamp", e.timestamp}, {"payload", payloadToJson(e.payload)}};
}

AnnotationEvent eventFromReader(const Reader& r) {
  r.onlyKeys({"kind", "frame", "timestamp", "payload"});
  AnnotationEvent e;
  e.frame = r.has("frame") ? r.at("frame").integer() : 0;
  if (r.has("timestamp")) {
    const Reader ts = r.at("timestamp");
    if (!ts.json().is_number_integer()) ts.fail("expected an integer");
    e.timestamp = ts.json().get<std::int64_t>();
  }
  const std::string kind = r.at("kind").string();
  const Reader p = r.at("payload");
  if (kind == "add-pair") {
    e.payload = AddPairEvent{pairFromJson(p)};
  } else if (kind == "remove-pair") {
    p.onlyKeys({"index"});
    e.payload = RemovePairEvent{p.at("index").integer()};
  } else if (kind == "add-track-point") {
    p.onlyKeys({"track", "object_point", "u", "v"});
    AddTrackPointEvent a;
    a.track = p.at("track").integer();
    if (p.has("object_point")) a.objectPoint = p.at("object_point").vec3();
    a.pixel = Vec2(p.at("u").number(), p.at("v").number());
    e.payload = a;
  } else if (kind == "retrack") {
    p.onlyKeys({"track", "points"});
    e.payload = RetrackEvent{p.at("track").integer(), trackPointsFromJson(p.at("points"))};
  } else if (kind == "set-static") {
    p.onlyKeys({"value"});
    e.payload = SetStaticEvent{p.at("value").boolean()};
  } else if (kind == "set-scale") {
    p.onlyKeys({"value"});
    e.payload = SetScaleEvent{p.at("value").number()};
  } else {
    r.at("kind").fail("unknown event kind '" + kind + "'");
  }
  return e;
}

Json cameraToJson(const CameraModel& c) {
  return {{"fx", c.fx}, {"fy", c.fy}, {"cx", c.cx}, {"cy", c.cy}, {"width", c.width}, {"height", c.height}};
}

CameraModel cameraFromJson(const Reader& r) {
  r.onlyKeys({"fx", "fy", "cx", "cy", "width", "height"});
  return {r.at("fx").number(), r.at("fy").number(),      r.at("cx").number(),
          r.at("cy").number(), r.at("width").integer(), r.at("height").integer()};
}

// Runs `f`, converting InvalidArgument into InvariantViolation under `path`.
template <class F>
void asInvariant(const std::string& path, F&& f) {
  try {
    f();
  } catch (const Error& e) {
    if (e.code() != ErrorCode::InvalidArgument) throw;
    throw Error(ErrorCode::InvariantViolation, path + ": " + e.what());
  }
}

std::string frameFileName(const char* prefix, int frame) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s_%04d.png", prefix, frame);
  return buf;
}

}  // namespace

const TrackPoint* Track2D::at(int frame) const {
  if (points.empty()) return nullptr;
  const int i = frame - points.front().frame;
  if (i < 0 || i >= static_cast<int>(points.size())) return nullptr;
  return &points[i];
}

std::vector<TrackPoint> interpolateClicks(const std::vector<TrackPoint>& clicks) {
  std::vector<TrackPoint> out;
  for (std::size_t i = 0; i < clicks.size(); ++i) {
    if (i > 0) {
      const TrackPoint& a = clicks[i - 1];
      const TrackPoint& b = clicks[i];
      for (int f = a.frame + 1; f < b.frame; ++f) {
        const double t = static_cast<double>(f - a.frame) / (b.frame - a.frame);
        out.push_back({f, (1.0 - t) * a.pixel + t * b.pixel, a.valid && b.valid});
      }
    }
    out.push_back(clicks[i]);
  }
  return out;
}

std::string AnnotationEvent::kind() const {
  return std::visit(Overloaded{
                        [](const AddPairEvent&) { return "add-pair"; },
                        [](const RemovePairEvent&) { return "remove-pair"; },
                        [](const AddTrackPointEvent&) { return "add-track-point"; },
                        [](const RetrackEvent&) { return "retrack"; },
                        [](const SetStaticEvent&) { return "set-static"; },
                        [](const SetScaleEvent&) { return "set-scale"; },
                    },
                    payload);
}

void applyEvent(AnnotationSet& set, const AnnotationEvent& event, int frameCount, int numKeypoints) {
  checkFrame(event.frame, frameCount, "event");
  std::visit(
      Overloaded{
          [&](const AddPairEvent& e) {
            checkPair(e.pair, frameCount, numKeypoints);
            set.pairs.push_back(e.pair);
          },
          [&](const RemovePairEvent& e) {
            if (e.index < 0 || e.index >= static_cast<int>(set.pairs.size())) invalid("no pair " + std::to_string(e.index));
            set.pairs.erase(set.pairs.begin() + e.index);
          },
          [&](const AddTrackPointEvent& e) {
            if (!e.pixel.allFinite()) invalid("click is not finite");
            const int n = static_cast<int>(set.tracks.size());
            if (e.track < 0 || e.track > n) invalid("no track " + std::to_string(e.track));
            if (e.objectPoint && !e.objectPoint->allFinite()) invalid("object point is not finite");
            const TrackPoint click{event.frame, e.pixel, true};
            if (e.track == n) {
              if (!e.objectPoint) invalid("a new track needs an object point");
              set.tracks.push_back({*e.objectPoint, {click}, {event.frame}});
              return;
            }
            Track2D& t = set.tracks[e.track];
            if (e.objectPoint && *e.objectPoint != t.objectPoint) invalid("click object point differs from the track's");
            if (t.fallback()) {
              std::vector<TrackPoint> clicks = clicksOf(t);
              auto it = std::lower_bound(clicks.begin(), clicks.end(), event.frame,
                                         [](const TrackPoint& p, int f) { return p.frame < f; });
              if (it != clicks.end() && it->frame == event.frame) {
                *it = click;
              } else {
                clicks.insert(it, click);
                t.clickedFrames.insert(std::lower_bound(t.clickedFrames.begin(), t.clickedFrames.end(), event.frame),
                                       event.frame);
              }
              t.points = interpolateClicks(clicks);
            } else {
              insertPoint(t.points, click);
            }
          },
          [&](const RetrackEvent& e) {
            if (e.track < 0 || e.track >= static_cast<int>(set.tracks.size())) invalid("no track " + std::to_string(e.track));
            checkTrackPoints(e.points, frameCount);
            set.tracks[e.track].points = e.points;
            set.tracks[e.track].clickedFrames.clear();
          },
          [&](const SetStaticEvent& e) { set.staticObject = e.value; },
          [&](const SetScaleEvent& e) {
            if (!(e.value > 0.0) || !std::isfinite(e.value)) invalid("object scale must be positive");
            set.scale = e.value;
          },
      },
      event.payload);
}

AnnotationSet replayEvents(const std::vector<AnnotationEvent>& events, int frameCount, int numKeypoints) {
  AnnotationSet set;
  for (const AnnotationEvent& e : events) applyEvent(set, e, frameCount, numKeypoints);
  return set;
}

std::filesystem::path SceneSession::resolve(const std::string& relative) const {
  const std::filesystem::path p(relative);
  return p.is_absolute() ? p : root / p;
}

void SceneSession::addEvent(const AnnotationEvent& event) {
  AnnotationSet next = annotations;
  applyEvent(next, event, frameCount(), skeleton.numKeypoints());
  annotations = std::move(next);
  events.push_back(event);
}

void SceneSession::validate() const {
  asInvariant("camera", [&] { camera.validate(); });
  if (!(fps > 0.0) || !std::isfinite(fps)) throw Error(ErrorCode::InvariantViolation, "fps: must be positive");
  if (humanPoses.empty()) throw Error(ErrorCode::InvariantViolation, "human_poses_path: no frames");
  asInvariant("skeleton_path", [&] { skeleton.requireHumanKeypointSet(); });
  for (int t = 0; t < frameCount(); ++t) {
    asInvariant("human_poses[" + std::to_string(t) + "]", [&] { humanPoses[t].validate(skeleton); });
  }
  if (mesh.empty()) throw Error(ErrorCode::InvariantViolation, "object.mesh_path: mesh has no faces");
  if (!(annotations.scale > 0.0)) throw Error(ErrorCode::InvariantViolation, "object.scale: must be positive");
  for (std::size_t i = 0; i < annotations.pairs.size(); ++i) {
    asInvariant("annotations.pairs[" + std::to_string(i) + "]",
                [&] { checkPair(annotations.pairs[i], frameCount(), skeleton.numKeypoints()); });
  }
  for (std::size_t i = 0; i < annotations.tracks.size(); ++i) {
    const Track2D& t = annotations.tracks[i];
    asInvariant("annotations.tracks[" + std::to_string(i) + "]", [&] {
      checkTrackPoints(t.points, frameCount());
      if (!t.objectPoint.allFinite()) invalid("object point is not finite");
      for (std::size_t k = 0; k < t.clickedFrames.size(); ++k) {
        if (!t.at(t.clickedFrames[k]) || (k > 0 && t.clickedFrames[k] <= t.clickedFrames[k - 1])) {
          invalid("clicked frames must be increasing frames of the track");
        }
      }
    });
  }
  if (!events.empty()) {
    AnnotationSet replayed;
    asInvariant("annotations.events", [&] { replayed = replayEvents(events, frameCount(), skeleton.numKeypoints()); });
    if (!(replayed == annotations)) {
      throw Error(ErrorCode::InvariantViolation, "annotations: do not match the replayed event log");
    }
  }
}

SceneSession sessionFromJson(const std::string& text, const std::filesystem::path& root) {
  const Json doc = detail::parseJson(text, "session");
  const Reader r(doc, "");
  if (!doc.is_object() || !doc.contains("version") || !doc["version"].is_number_integer()) {
    throw Error(ErrorCode::SchemaVersionMismatch, "session has no integer version field");
  }
  if (doc["version"].get<std::int64_t>() != kSessionSchemaVersion) {
    throw Error(ErrorCode::SchemaVersionMismatch, "session version " + doc["version"].dump() + " is not supported (expected " +
                                                      std::to_string(kSessionSchemaVersion) + ")");
  }
  r.onlyKeys({"version", "camera", "fps", "object", "skeleton_path", "human_poses_path", "masks_dir", "frames_dir",
              "annotations"});

  SceneSession s;
  s.root = root;
  s.camera = cameraFromJson(r.at("camera"));
  s.fps = r.at("fps").number();
  const Reader obj = r.at("object");
  obj.onlyKeys({"mesh_path", "scale", "static"});
  s.meshPath = obj.at("mesh_path").string();
  s.annotations.scale = obj.at("scale").number();
  s.annotations.staticObject = obj.at("static").boolean();
  s.skeletonPath = r.at("skeleton_path").string();
  s.humanPosesPath = r.at("human_poses_path").string();
  if (r.has("masks_dir")) s.masksDir = r.at("masks_dir").string();
  if (r.has("frames_dir")) s.framesDir = r.at("frames_dir").string();

  const Reader ann = r.at("annotations");
  ann.onlyKeys({"pairs", "tracks", "events"});
  const Reader pairs = ann.at("pairs");
  for (std::size_t i = 0; i < pairs.size(); ++i) s.annotations.pairs.push_back(pairFromJson(pairs.at(i)));
  const Reader tracks = ann.at("tracks");
  for (std::size_t i = 0; i < tracks.size(); ++i) s.annotations.tracks.push_back(trackFromJson(tracks.at(i)));
  const Reader events = ann.at("events");
  for (std::size_t i = 0; i < events.size(); ++i) s.events.push_back(eventFromReader(events.at(i)));

  // Assets.
  if (s.skeletonPath == kBuiltinHumanoid) {
    s.skeleton = SkeletonModel::defaultHumanoid();
  } else {
    const auto p = s.resolve(s.skeletonPath);
    if (!std::filesystem::exists(p)) throw Error(ErrorCode::MissingAsset, "skeleton not found: " + p.string());
    s.skeleton = loadSkeleton(p);
  }
  const auto meshFile = s.resolve(s.meshPath);
  if (!std::filesystem::exists(meshFile)) throw Error(ErrorCode::MissingAsset, "mesh not found: " + meshFile.string());
  s.mesh = loadMesh(meshFile);
  const auto posesFile = s.resolve(s.humanPosesPath);
  if (!std::filesystem::exists(posesFile)) {
    throw Error(ErrorCode::MissingAsset, "human poses not found: " + posesFile.string());
  }
  for (const FrameState& f : loadMotion(posesFile).frames) s.humanPoses.push_back(f.human);
  if (s.masksDir && !std::filesystem::is_directory(s.resolve(*s.masksDir))) {
    throw Error(ErrorCode::MissingAsset, "masks directory not found: " + s.resolve(*s.masksDir).string());
  }
  if (s.framesDir && !std::filesystem::is_directory(s.resolve(*s.framesDir))) {
    throw Error(ErrorCode::MissingAsset, "frames directory not found: " + s.resolve(*s.framesDir).string());
  }
  s.validate();
  return s;
}

SceneSession loadSession(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw Error(ErrorCode::MissingAsset, "session not found: " + path.string());
  return sessionFromJson(detail::readTextFile(path), path.parent_path());
}

std::string sessionToJson(const SceneSession& s) {
  Json pairs = Json::array();
  for (const ContactPair& p : s.annotations.pairs) pairs.push_back(pairToJson(p));
  Json tracks = Json::array();
  for (const Track2D& t : s.annotations.tracks) tracks.push_back(trackToJson(t));
  Json events = Json::array();
  for (const AnnotationEvent& e : s.events) events.push_back(eventJson(e));
  Json doc = {
      {"version", kSessionSchemaVersion},
      {"camera", cameraToJson(s.camera)},
      {"fps", s.fps},
      {"object", {{"mesh_path", s.meshPath}, {"scale", s.annotations.scale}, {"static", s.annotations.staticObject}}},
      {"skeleton_path", s.skeletonPath},
      {"human_poses_path", s.humanPosesPath},
      {"annotations", {{"pairs", pairs}, {"tracks", tracks}, {"events", events}}},
  };
  if (s.masksDir) doc["masks_dir"] = *s.masksDir;
  if (s.framesDir) doc["frames_dir"] = *s.framesDir;
  return detail::canonicalJson(doc, kSessionPrecision);
}

void saveSession(const SceneSession& session, const std::filesystem::path& path) {
  detail::writeTextFileAtomic(path, sessionToJson(session));
}

std::string eventToJson(const AnnotationEvent& event) {
  return detail::canonicalJson(eventJson(event), kSessionPrecision);
}

AnnotationEvent eventFromJson(const std::string& text) {
  const Json doc = detail::parseJson(text, "event");
  return eventFromReader(Reader(doc, "", ErrorCode::InvalidArgument));
}

std::string annotationsToJson(const AnnotationSet& set, int version) {
  Json pairs = Json::array();
  for (const ContactPair& p : set.pairs) pairs.push_back(pairToJson(p));
  Json tracks = Json::array();
  for (const Track2D& t : set.tracks) tracks.push_back(trackToJson(t));
  const Json doc = {{"version", version},
                    {"pairs", pairs},
                    {"tracks", tracks},
                    {"static", set.staticObject},
                    {"scale", set.scale}};
  return detail::canonicalJson(doc, kSessionPrecision);
}

std::optional<MaskImage> loadFrameMask(const SceneSession& session, int frame, bool human) {
  if (!session.masksDir) return std::nullopt;
  const auto path = session.resolve(*session.masksDir) / frameFileName(human ? "human" : "object", frame);
  if (!std::filesystem::exists(path)) return std::nullopt;
  return loadMaskPng(path);
}

MotionSequence motionFromJson(const std::string& text) {
  const Json doc = detail::parseJson(text, "motion");
  const Reader r(doc, "", ErrorCode::InvalidArgument);
  r.onlyKeys({"fps", "frames", "contacts"});
  MotionSequence m;
  m.fps = r.at("fps").number();
  const Reader frames = r.at("frames");
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const Reader f = frames.at(i);
    f.onlyKeys({"frame", "root_t", "joint_quats", "object_q", "object_t", "object_scale"});
    if (f.at("frame").integer() != static_cast<int>(i)) f.at("frame").fail("frames must be numbered 0, 1, 2, ...");
    FrameState s;
    s.human.rootTranslation = f.at("root_t").vec3();
    const Reader q = f.at("joint_quats");
    for (std::size_t j = 0; j < q.size(); ++j) s.human.rotations.push_back(q.at(j).quat());
    const double scale = f.has("object_scale") ? f.at("object_scale").number() : 1.0;
    if (!(scale > 0.0)) f.at("object_scale").fail("must be positive");
    s.object = RigidPose(f.at("object_q").quat(), f.at("object_t").vec3(), scale);
    m.frames.push_back(std::move(s));
  }
  if (r.has("contacts")) {
    const Reader c = r.at("contacts");
    for (std::size_t i = 0; i < c.size(); ++i) m.contacts.push_back(pairFromJson(c.at(i)));
  }
  return m;
}

MotionSequence loadMotion(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw Error(ErrorCode::MissingAsset, "motion file not found: " + path.string());
  return motionFromJson(detail::readTextFile(path));
}

std::string motionToJson(const MotionSequence& m) {
  Json frames = Json::array();
  for (std::size_t i = 0; i < m.frames.size(); ++i) {
    const FrameState& f = m.frames[i];
    Json quats = Json::array();
    for (const Quat& q : f.human.rotations) quats.push_back(toJson(q));
    frames.push_back({{"frame", static_cast<int>(i)},
                      {"root_t", toJson(f.human.rootTranslation)},
                      {"joint_quats", quats},
                      {"object_q", toJson(f.object.rotation())},
                      {"object_t", toJson(f.object.translation())},
                      {"object_scale", f.object.scale()}});
  }
  Json contacts = Json::array();
  for (const ContactPair& p : m.contacts) contacts.push_back(pairToJson(p));
  return detail::canonicalJson({{"fps", m.fps}, {"frames", frames}, {"contacts", contacts}}, kMotionPrecision);
}

void saveMotion(const MotionSequence& motion, const std::filesystem::path& path) {
  detail::writeTextFileAtomic(path, motionToJson(motion));
}

}  // namespace hoi
