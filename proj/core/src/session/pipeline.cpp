#include "hoi/session/pipeline.h"

#include <algorithm>
#include <cmath>
#include <map>

#include "json_util.h"

namespace hoi {

using detail::Json;
using detail::Reader;
using detail::toJson;

namespace {

constexpr int kReportPrecision = 17;
constexpr double kDefaultDepth = 2.0;  // m, start depth for 2D-only frames

// Starting pose for a frame without a warm start: identity rotation with the
// object centroid on the 3D targets, or on the mean 2D target at 2 m depth.
RigidPose initialGuess(const FrameCorrespondences& c, const CameraModel& camera, double scale) {
  Vec3 obj = Vec3::Zero();
  Vec3 target = Vec3::Zero();
  if (!c.c33.empty()) {
    for (const auto& x : c.c33) {
      obj += x.objectPoint;
      target += x.target;
    }
    obj /= static_cast<double>(c.c33.size());
    target /= static_cast<double>(c.c33.size());
  } else if (!c.c32.empty()) {
    Vec2 pixel = Vec2::Zero();
    for (const auto& x : c.c32) {
      obj += x.objectPoint;
      pixel += x.target;
    }
    obj /= static_cast<double>(c.c32.size());
    target = camera.unproject(pixel / static_cast<double>(c.c32.size()), kDefaultDepth);
  }
  return RigidPose(Quat::Identity(), target - scale * obj, scale);
}

std::pair<RigidPose, SolveReport> solveFrame(const FrameCorrespondences& c, const CameraModel& camera, double scale,
                                             const std::optional<RigidPose>& warm, const RigidSolverOptions& options) {
  const std::optional<CameraModel> cam = c.c32.empty() ? std::nullopt : std::optional<CameraModel>(camera);
  if (warm) {
    try {
      return solveRigidPose(*warm, c.c33, c.c32, cam, options);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::BehindCamera) throw;
    }
  }
  return solveRigidPose(initialGuess(c, camera, scale), c.c33, c.c32, cam, options);
}

std::optional<MaskTarget> frameMasks(const SceneSession& session, int frame, const PipelineConfig& config,
                                     std::vector<std::string>& notes) {
  if (!config.useMasks || !session.masksDir) return std::nullopt;
  std::optional<MaskImage> human = loadFrameMask(session, frame, true);
  std::optional<MaskImage> object = loadFrameMask(session, frame, false);
  if (!human && !object) {
    notes.push_back("no masks for frame " + std::to_string(frame));
    return std::nullopt;
  }
  const int f = downsampleFactor(session.camera.width, session.camera.height, config.maskMaxDimension);
  if (human) human = downsampleMask(*human, f);
  if (object) object = downsampleMask(*object, f);
  return MaskTarget(downsampleCamera(session.camera, f), std::move(human), std::move(object));
}

std::set<KeypointId> keypointsOf(const std::vector<ContactPair>& pairs) {
  std::set<KeypointId> out;
  for (const ContactPair& p : pairs) out.insert(p.keypoint);
  return out;
}

// Exponential-map increment of the refined rotation over the input one.
Vec3 increment(const Quat& input, const Quat& refined) {
  if (input.coeffs() == refined.coeffs()) return Vec3::Zero();
  return logMap(input.conjugate() * refined);
}

Json poseJson(const RigidPose& p) {
  return {{"q", toJson(p.rotation())}, {"t", toJson(p.translation())}, {"scale", p.scale()}};
}

Json stringsJson(const std::vector<std::string>& v) {
  Json a = Json::array();
  for (const std::string& s : v) a.push_back(s);
  return a;
}

}  // namespace

void PipelineConfig::validate() const {
  if (keyframeStride < 1) throw Error(ErrorCode::InvalidArgument, "keyframe_stride must be at least 1");
  if (!(cutoffHz > 0.0)) throw Error(ErrorCode::InvalidArgument, "cutoff_hz must be positive");
  if (chainDepth < 1) throw Error(ErrorCode::InvalidArgument, "chain_depth must be at least 1");
  if (!(weight3D >= 0.0) || !(weight2D >= 0.0)) throw Error(ErrorCode::InvalidArgument, "solver weights must be >= 0");
  if (maskMaxDimension < 1) throw Error(ErrorCode::InvalidArgument, "mask_max_dimension must be positive");
  if (solver.maxIterations < 0 || ik.maxIterations < 0 || refine.iterations < 0) {
    throw Error(ErrorCode::InvalidArgument, "iteration counts must be non-negative");
  }
  weights.validate();
}

PipelineConfig configFromJson(const std::string& text) {
  const Json doc = detail::parseJson(text, "config");
  const Reader r(doc, "", ErrorCode::InvalidArgument);
  r.onlyKeys({"keyframe_stride", "cutoff_hz", "smooth", "chain_depth", "weight_3d", "weight_2d", "use_masks",
              "mask_max_dimension", "solver", "ik", "weights", "refine"});
  PipelineConfig c;
  auto num = [](const Reader& parent, const char* key, double& out) {
    if (parent.has(key)) out = parent.at(key).number();
  };
  auto integer = [](const Reader& parent, const char* key, int& out) {
    if (parent.has(key)) out = parent.at(key).integer();
  };
  auto flag = [](const Reader& parent, const char* key, bool& out) {
    if (parent.has(key)) out = parent.at(key).boolean();
  };
  integer(r, "keyframe_stride", c.keyframeStride);
  num(r, "cutoff_hz", c.cutoffHz);
  flag(r, "smooth", c.smooth);
  integer(r, "chain_depth", c.chainDepth);
  num(r, "weight_3d", c.weight3D);
  num(r, "weight_2d", c.weight2D);
  flag(r, "use_masks", c.useMasks);
  integer(r, "mask_max_dimension", c.maskMaxDimension);
  if (r.has("solver")) {
    const Reader s = r.at("solver");
    s.onlyKeys({"initial_lambda", "lambda_up", "lambda_down", "max_iterations", "relative_cost_tolerance",
                "gradient_tolerance"});
    num(s, "initial_lambda", c.solver.initialLambda);
    num(s, "lambda_up", c.solver.lambdaUp);
    num(s, "lambda_down", c.solver.lambdaDown);
    integer(s, "max_iterations", c.solver.maxIterations);
    num(s, "relative_cost_tolerance", c.solver.relativeCostTolerance);
    num(s, "gradient_tolerance", c.solver.gradientTolerance);
  }
  if (r.has("ik")) {
    const Reader s = r.at("ik");
    s.onlyKeys({"damping", "max_iterations", "tolerance"});
    num(s, "damping", c.ik.damping);
    integer(s, "max_iterations", c.ik.maxIterations);
    num(s, "tolerance", c.ik.tolerance);
  }
  if (r.has("weights")) {
    const Reader s = r.at("weights");
    s.onlyKeys({"contact", "collision", "mask", "alpha", "beta", "lambda_h2o", "epsilon"});
    num(s, "contact", c.weights.contact);
    num(s, "collision", c.weights.collision);
    num(s, "mask", c.weights.mask);
    num(s, "alpha", c.weights.alpha);
    num(s, "beta", c.weights.beta);
    num(s, "lambda_h2o", c.weights.lambdaHumanToObject);
    num(s, "epsilon", c.weights.epsilon);
  }
  if (r.has("refine")) {
    const Reader s = r.at("refine");
    s.onlyKeys({"iterations", "translation_step", "rotation_step", "beta1", "beta2", "epsilon"});
    integer(s, "iterations", c.refine.iterations);
    num(s, "translation_step", c.refine.translationStep);
    num(s, "rotation_step", c.refine.rotationStep);
    num(s, "beta1", c.refine.beta1);
    num(s, "beta2", c.refine.beta2);
    num(s, "epsilon", c.refine.adamEpsilon);
  }
  c.validate();
  return c;
}

PipelineConfig loadConfig(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw Error(ErrorCode::MissingAsset, "config not found: " + path.string());
  return configFromJson(detail::readTextFile(path));
}

std::string configToJson(const PipelineConfig& c) {
  const Json doc = {
      {"keyframe_stride", c.keyframeStride},
      {"cutoff_hz", c.cutoffHz},
      {"smooth", c.smooth},
      {"chain_depth", c.chainDepth},
      {"weight_3d", c.weight3D},
      {"weight_2d", c.weight2D},
      {"use_masks", c.useMasks},
      {"mask_max_dimension", c.maskMaxDimension},
      {"solver",
       {{"initial_lambda", c.solver.initialLambda},
        {"lambda_up", c.solver.lambdaUp},
        {"lambda_down", c.solver.lambdaDown},
        {"max_iterations", c.solver.maxIterations},
        {"relative_cost_tolerance", c.solver.relativeCostTolerance},
        {"gradient_tolerance", c.solver.gradientTolerance}}},
      {"ik", {{"damping", c.ik.damping}, {"max_iterations", c.ik.maxIterations}, {"tolerance", c.ik.tolerance}}},
      {"weights",
       {{"contact", c.weights.contact},
        {"collision", c.weights.collision},
        {"mask", c.weights.mask},
        {"alpha", c.weights.alpha},
        {"beta", c.weights.beta},
        {"lambda_h2o", c.weights.lambdaHumanToObject},
        {"epsilon", c.weights.epsilon}}},
      {"refine",
       {{"iterations", c.refine.iterations},
        {"translation_step", c.refine.translationStep},
        {"rotation_step", c.refine.rotationStep},
        {"beta1", c.refine.beta1},
        {"beta2", c.refine.beta2},
        {"epsilon", c.refine.adamEpsilon}}},
  };
  return detail::canonicalJson(doc, kReportPrecision);
}

std::vector<int> keyframeIndices(int frameCount, int stride) {
  std::vector<int> keys;
  for (int t = 0; t < frameCount; t += stride) keys.push_back(t);
  if (frameCount > 0 && keys.back() != frameCount - 1) keys.push_back(frameCount - 1);
  return keys;
}

FrameCorrespondences frameCorrespondences(const SceneSession& session, int frame, const PipelineConfig& config) {
  FrameCorrespondences c;
  const std::vector<ContactPair> active = activePairs(session.annotations.pairs, frame);
  if (!active.empty()) {
    const FkResult fk = forwardKinematics(session.skeleton, session.humanPoses[frame]);
    for (const ContactPair& p : active) c.c33.push_back({p.objectPoint, fk.keypoints[p.keypoint.index], config.weight3D});
  }
  for (const Track2D& t : session.annotations.tracks) {
    const TrackPoint* p = t.at(frame);
    if (p && p->valid) c.c32.push_back({t.objectPoint, p->pixel, config.weight2D});
  }
  return c;
}

PipelineResult runPipeline(const SceneSession& session, const PipelineConfig& config) {
  config.validate();
  if (!(config.cutoffHz < 0.5 * session.fps) && config.smooth) {
    throw Error(ErrorCode::InvalidArgument, "cutoff_hz must be below half the session fps");
  }
  const AnnotationSet& ann = session.annotations;
  bool anyTrackPoint = false;
  for (const Track2D& t : ann.tracks) {
    for (const TrackPoint& p : t.points) anyTrackPoint = anyTrackPoint || p.valid;
  }
  if (ann.pairs.empty() && !anyTrackPoint) {
    throw Error(ErrorCode::UnderConstrained, "session has no annotated correspondences");
  }

  const int n = session.frameCount();
  const SkeletonModel& model = session.skeleton;
  const std::vector<int> keys = keyframeIndices(n, config.keyframeStride);
  PipelineResult result;

  // Stage one: object poses at keyframes.
  std::map<int, std::pair<RigidPose, SolveReport>> solved;
  if (ann.staticObject) {
    std::vector<FrameCorrespondences> all;
    std::vector<RigidPose> inits;
    for (int t = 0; t < n; ++t) {
      all.push_back(frameCorrespondences(session, t, config));
      inits.push_back(initialGuess(all.back(), session.camera, ann.scale));
    }
    const StaticPoseResult s = estimateStaticPose(all, session.camera, inits, config.solver);
    result.staticFrame = s.frame;
    for (int t : keys) solved[t] = {s.pose, s.report};
  } else {
    std::optional<RigidPose> warm;
    for (int t : keys) {
      try {
        solved[t] = solveFrame(frameCorrespondences(session, t, config), session.camera, ann.scale, warm, config.solver);
        warm = solved[t].first;
      } catch (const Error& e) {
        result.failed.push_back({t, e.what()});
      }
    }
  }
  if (solved.empty()) throw Error(ErrorCode::UnderConstrained, "no keyframe could be solved");

  // Stage two: IK and loss refinement per solved keyframe.
  std::map<int, FrameState> refined;
  for (auto& [t, solve] : solved) {
    const std::vector<ContactPair> active = activePairs(ann.pairs, t);
    const std::set<int> mask = chainMask(model, keypointsOf(active), config.chainDepth);
    KeyframeReport report;
    report.frame = t;
    report.solve = solve.second;
    report.chainMask = mask;

    FrameState state{session.humanPoses[t], solve.first};
    if (!active.empty()) {
      std::vector<IkTarget> targets;
      for (const ContactPair& p : active) targets.push_back({p.keypoint, state.object.transformPoint(p.objectPoint)});
      const IkResult ik = solveLimbIk(model, state.human, targets, mask, config.ik);
      state.human = ik.pose;
      report.ikIterations = ik.iterations;
      report.ikInitialObjective = ik.objectiveTrace.front();
      report.ikFinalObjective = ik.finalObjective();
    }

    std::vector<std::string> notes;
    const std::optional<MaskTarget> masks = frameMasks(session, t, config, notes);
    FrameProblem problem{&model, &session.mesh, active, config.weights, masks ? &*masks : nullptr};
    RefineOptions options = config.refine;
    options.staticObject = ann.staticObject;
    const RefineResult r = refineFrame(problem, state, mask, options);
    report.lossTrace = r.lossTrace;
    report.bestIteration = r.bestIteration;
    report.diagnostics = notes;
    report.diagnostics.insert(report.diagnostics.end(), r.diagnostics.begin(), r.diagnostics.end());
    refined[t] = r.state;
    result.chainMask.insert(mask.begin(), mask.end());
    result.keyframes.push_back(std::move(report));
  }

  // Interpolation: object poses directly, human rotations as exp-map
  // increments over the input poses of each frame.
  std::map<int, std::vector<Vec3>> increments;
  for (const KeyframeReport& k : result.keyframes) {
    std::vector<Vec3> inc(model.numJoints(), Vec3::Zero());
    for (int j : k.chainMask) inc[j] = increment(session.humanPoses[k.frame].rotations[j], refined[k.frame].human.rotations[j]);
    increments[k.frame] = std::move(inc);
  }
  result.frames.resize(n);
  for (int t = 0; t < n; ++t) {
    auto exact = refined.find(t);
    if (exact != refined.end()) {
      result.frames[t] = exact->second;
      continue;
    }
    auto next = refined.lower_bound(t);
    const bool hasNext = next != refined.end();
    const bool hasPrev = next != refined.begin();
    const int a = hasPrev ? std::prev(next)->first : next->first;
    const int b = hasNext ? next->first : a;
    const double s = a == b ? 0.0 : static_cast<double>(t - a) / (b - a);
    const FrameState& A = refined[a];
    const FrameState& B = refined[b];
    FrameState f;
    f.object = RigidPose(slerp(A.object.rotation(), B.object.rotation(), s),
                         (1.0 - s) * A.object.translation() + s * B.object.translation(), A.object.scale());
    f.human = session.humanPoses[t];
    for (int j = 0; j < model.numJoints(); ++j) {
      const Vec3 inc = (1.0 - s) * increments[a][j] + s * increments[b][j];
      if (!inc.isZero(0.0)) f.human.rotations[j] = (f.human.rotations[j] * expMap(inc)).normalized();
    }
    result.frames[t] = std::move(f);
  }

  if (config.smooth) {
    SmoothChannels channels;
    channels.object = !ann.staticObject;
    channels.rootTranslation = false;
    channels.allJoints = false;
    channels.joints = result.chainMask;
    SmoothResult smoothed = smoothSequence(result.frames, config.cutoffHz, session.fps, channels);
    result.frames = std::move(smoothed.states);
    result.warnings.insert(result.warnings.end(), smoothed.warnings.begin(), smoothed.warnings.end());
  }
  return result;
}

MotionSequence resultMotion(const SceneSession& session, const PipelineResult& result) {
  MotionSequence m;
  m.frames = result.frames;
  m.fps = session.fps;
  m.contacts = session.annotations.pairs;
  return m;
}

std::string reportToJson(const PipelineResult& result) {
  Json keyframes = Json::array();
  for (const KeyframeReport& k : result.keyframes) {
    keyframes.push_back({
        {"frame", k.frame},
        {"solve",
         {{"pose", poseJson(k.solve.pose)},
          {"initial_cost", k.solve.initialCost},
          {"cost_3d", k.solve.cost3D},
          {"cost_2d", k.solve.cost2D},
          {"iterations", k.solve.iterations},
          {"converged", k.solve.converged},
          {"termination", k.solve.termination},
          {"num_3d", k.solve.num3D},
          {"num_2d", k.solve.num2D},
          {"warnings", stringsJson(k.solve.warnings)}}},
        {"ik",
         {{"iterations", k.ikIterations},
          {"initial_objective", k.ikInitialObjective},
          {"final_objective", k.ikFinalObjective}}},
        {"refine", {{"loss_trace", k.lossTrace}, {"best_iteration", k.bestIteration}}},
        {"chain_mask", Json(std::vector<int>(k.chainMask.begin(), k.chainMask.end()))},
        {"diagnostics", stringsJson(k.diagnostics)},
    });
  }
  Json failed = Json::array();
  for (const FailedFrame& f : result.failed) failed.push_back({{"frame", f.frame}, {"error", f.error}});
  Json doc = {{"keyframes", keyframes},
              {"failed_frames", failed},
              {"chain_mask", Json(std::vector<int>(result.chainMask.begin(), result.chainMask.end()))},
              {"warnings", stringsJson(result.warnings)},
              {"frame_count", static_cast<int>(result.frames.size())}};
  doc["static_frame"] = result.staticFrame ? Json(*result.staticFrame) : Json(nullptr);
  return detail::canonicalJson(doc, kReportPrecision);
}

void writeResults(const SceneSession& session, const PipelineResult& result, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + dir.string());
  saveMotion(resultMotion(session, result), dir / "motion.json");
  detail::writeTextFileAtomic(dir / "report.json", reportToJson(result));
}

}  // namespace hoi
