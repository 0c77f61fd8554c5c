#pragma once

#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "hoi/optimizer/optimizer.h"
#include "hoi/session/session.h"
#include "hoi/solver/rigid_solver.h"

namespace hoi {

/// Every tunable of runPipeline. JSON keys are listed in the README.
struct PipelineConfig {
  int keyframeStride = 3;
  double cutoffHz = 4.0;
  bool smooth = true;
  int chainDepth = 3;
  double weight3D = 1.0;
  double weight2D = 1e-4;
  bool useMasks = true;
  int maskMaxDimension = 256;
  RigidSolverOptions solver;
  IkOptions ik;
  LossWeights weights;
  RefineOptions refine;

  /// Throws InvalidArgument for out-of-range values.
  void validate() const;
};

/// Parses a config document; missing keys keep their defaults, unknown keys
/// throw InvalidArgument.
PipelineConfig configFromJson(const std::string& text);
PipelineConfig loadConfig(const std::filesystem::path& path);
std::string configToJson(const PipelineConfig& config);

struct KeyframeReport {
  int frame = 0;
  SolveReport solve;
  int ikIterations = 0;
  double ikInitialObjective = 0.0;
  double ikFinalObjective = 0.0;
  std::vector<double> lossTrace;
  int bestIteration = 0;
  std::set<int> chainMask;
  std::vector<std::string> diagnostics;
};

struct FailedFrame {
  int frame = 0;
  std::string error;
};

struct PipelineResult {
  std::vector<FrameState> frames;
  std::vector<KeyframeReport> keyframes;
  std::vector<FailedFrame> failed;
  std::set<int> chainMask;          // union over keyframes
  std::optional<int> staticFrame;   // set for static objects
  std::vector<std::string> warnings;
};

/// Keyframes 0, K, 2K, ... and the last frame.
std::vector<int> keyframeIndices(int frameCount, int stride);

/// Solver correspondences of one frame: active pairs against the input human
/// keypoints, and valid track points.
FrameCorrespondences frameCorrespondences(const SceneSession& session, int frame, const PipelineConfig& config);

/// Object solve (per keyframe, or the static strategy), limb IK, loss
/// refinement, interpolation and smoothing. Deterministic. Keyframes whose
/// solve fails are recorded and bridged by interpolation. Throws
/// UnderConstrained when the session has no annotations or no keyframe
/// can be solved.
PipelineResult runPipeline(const SceneSession& session, const PipelineConfig& config = {});

/// Result motion (with the session's contact table) as a motion document.
MotionSequence resultMotion(const SceneSession& session, const PipelineResult& result);
std::string reportToJson(const PipelineResult& result);

/// Writes motion.json and report.json into `dir` (created if needed).
void writeResults(const SceneSession& session, const PipelineResult& result, const std::filesystem::path& dir);

}  // namespace hoi
