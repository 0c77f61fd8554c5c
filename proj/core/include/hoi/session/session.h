#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "hoi/common/error.h"
#include "hoi/geometry/camera.h"
#include "hoi/geometry/mesh.h"
#include "hoi/metrics/metrics.h"
#include "hoi/optimizer/optimizer.h"
#include "hoi/skeleton/skeleton.h"

namespace hoi {

inline constexpr int kSessionSchemaVersion = 1;

struct TrackPoint {
  int frame = 0;
  Vec2 pixel = Vec2::Zero();
  bool valid = true;

  bool operator==(const TrackPoint&) const = default;
};

/// 2D track of one object point. Points are sorted by frame and cover a
/// contiguous range. Tracks built from clicks keep the clicked frames and
/// fill the gaps by linear interpolation (fallback tracking).
struct Track2D {
  Vec3 objectPoint = Vec3::Zero();
  std::vector<TrackPoint> points;
  std::vector<int> clickedFrames;

  bool fallback() const {
    return !clickedFrames.empty();
  }
  /// The point at `frame`, if the track has one.
  const TrackPoint* at(int frame) const;

  bool operator==(const Track2D&) const = default;
};

/// Linear interpolation of the clicked positions over the frames between the
/// first and last click.
std::vector<TrackPoint> interpolateClicks(const std::vector<TrackPoint>& clicks);

struct AddPairEvent {
  ContactPair pair;
  bool operator==(const AddPairEvent&) const = default;
};
struct RemovePairEvent {
  int index = 0;
  bool operator==(const RemovePairEvent&) const = default;
};
/// Click at the event frame. `track` == number of tracks starts a new track,
/// which then needs `objectPoint`.
struct AddTrackPointEvent {
  int track = 0;
  std::optional<Vec3> objectPoint;
  Vec2 pixel = Vec2::Zero();
  bool operator==(const AddTrackPointEvent&) const = default;
};
/// Replaces a track's points with re-ingested tracker output.
struct RetrackEvent {
  int track = 0;
  std::vector<TrackPoint> points;
  bool operator==(const RetrackEvent&) const = default;
};
struct SetStaticEvent {
  bool value = false;
  bool operator==(const SetStaticEvent&) const = default;
};
struct SetScaleEvent {
  double value = 1.0;
  bool operator==(const SetScaleEvent&) const = default;
};

using EventPayload =
    std::variant<AddPairEvent, RemovePairEvent, AddTrackPointEvent, RetrackEvent, SetStaticEvent, SetScaleEvent>;

struct AnnotationEvent {
  int frame = 0;
  std::int64_t timestamp = 0;  // ms since epoch, informational
  EventPayload payload;

  /// "add-pair", "remove-pair", "add-track-point", "retrack", "set-static" or "set-scale".
  std::string kind() const;
  bool operator==(const AnnotationEvent&) const = default;
};

/// Everything the annotation log determines.
struct AnnotationSet {
  std::vector<ContactPair> pairs;
  std::vector<Track2D> tracks;
  bool staticObject = false;
  double scale = 1.0;

  bool operator==(const AnnotationSet&) const = default;
};

/// Applies one event. Throws InvalidArgument for payloads that do not fit the
/// current state (bad indices, frames outside [0, frameCount), unknown
/// keypoints, non-positive scale).
void applyEvent(AnnotationSet& set, const AnnotationEvent& event, int frameCount, int numKeypoints);

/// Replays a log from the empty annotation set.
AnnotationSet replayEvents(const std::vector<AnnotationEvent>& events, int frameCount, int numKeypoints);

/// A scene under annotation: inputs, annotations and the event log. Asset
/// paths are stored as written and resolved against `root`.
struct SceneSession {
  std::filesystem::path root;
  CameraModel camera;
  double fps = 30.0;
  std::string meshPath;
  std::string skeletonPath;
  std::string humanPosesPath;
  std::optional<std::string> masksDir;
  std::optional<std::string> framesDir;
  AnnotationSet annotations;
  std::vector<AnnotationEvent> events;

  // Loaded assets.
  SkeletonModel skeleton;
  TriangleMesh mesh;
  std::vector<SkeletonPose> humanPoses;

  int frameCount() const {
    return static_cast<int>(humanPoses.size());
  }
  /// Optimistic-concurrency version: the number of logged events.
  int version() const {
    return static_cast<int>(events.size());
  }
  std::filesystem::path resolve(const std::string& relative) const;

  /// Appends and applies an event; the annotation set is unchanged on error.
  void addEvent(const AnnotationEvent& event);

  /// Checks every invariant; throws InvariantViolation naming the field.
  void validate() const;
};

/// Reads and validates a session file, loading the referenced skeleton, mesh
/// and human poses. Throws SchemaVersionMismatch, MissingAsset (naming the
/// path), ParseError or InvariantViolation.
SceneSession loadSession(const std::filesystem::path& path);
SceneSession sessionFromJson(const std::string& text, const std::filesystem::path& root);

/// Canonical session document: sorted keys, floats at 9 significant digits.
std::string sessionToJson(const SceneSession& session);
void saveSession(const SceneSession& session, const std::filesystem::path& path);

std::string eventToJson(const AnnotationEvent& event);
AnnotationEvent eventFromJson(const std::string& text);
std::string annotationsToJson(const AnnotationSet& set, int version);

/// Ground-truth masks of one frame, if present in the masks directory as
/// human_NNNN.png / object_NNNN.png.
std::optional<MaskImage> loadFrameMask(const SceneSession& session, int frame, bool human);

/// Motion file: {fps, frames[{frame, root_t, joint_quats, object_q, object_t,
/// object_scale}], contacts[...]}. Floats keep 17 significant digits.
MotionSequence loadMotion(const std::filesystem::path& path);
MotionSequence motionFromJson(const std::string& text);
std::string motionToJson(const MotionSequence& motion);
void saveMotion(const MotionSequence& motion, const std::filesystem::path& path);

}  // namespace hoi
