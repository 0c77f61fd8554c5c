#include <CLI11.hpp>

#include <csignal>
#include <cstdio>
#include <iostream>
#include <json.hpp>

#include <hoi/metrics/metrics.h>
#include <hoi/session/pipeline.h>

#include "service/service.h"

namespace {

hoi::SessionService* activeService = nullptr;

void onSignal(int) {
  if (activeService) activeService->stop();
}

hoi::SkeletonModel skeletonFor(const std::string& path) {
  return path.empty() ? hoi::SkeletonModel::defaultHumanoid() : hoi::loadSkeleton(path);
}

int solveCommand(const std::string& sessionPath, const std::string& configPath, const std::string& outDir) {
  const hoi::SceneSession session = hoi::loadSession(sessionPath);
  const hoi::PipelineConfig config = configPath.empty() ? hoi::PipelineConfig{} : hoi::loadConfig(configPath);
  const hoi::PipelineResult result = hoi::runPipeline(session, config);
  const std::filesystem::path out = outDir.empty() ? session.root / "results" : std::filesystem::path(outDir);
  hoi::writeResults(session, result, out);
  std::printf("solved %d frames (%zu keyframes, %zu failed)\n", session.frameCount(), result.keyframes.size(),
              result.failed.size());
  if (result.staticFrame) std::printf("static object pose from frame %d\n", *result.staticFrame);
  for (const hoi::FailedFrame& f : result.failed) std::printf("keyframe %d failed: %s\n", f.frame, f.error.c_str());
  for (const std::string& w : result.warnings) std::printf("warning: %s\n", w.c_str());
  std::printf("results written to %s\n", out.string().c_str());
  return 0;
}

int metricsCommand(const std::string& simPath, const std::string& refPath, const std::string& skeletonPath) {
  const hoi::SkeletonModel model = skeletonFor(skeletonPath);
  const hoi::MetricsReport r = hoi::evaluateMotion(model, hoi::loadMotion(simPath), hoi::loadMotion(refPath));
  const nlohmann::json out = {{"mpjpe_m", r.mpjpe},         {"contact_sim", r.contactSim}, {"contact_ref", r.contactRef},
                              {"jitter_sim", r.jitterSim}, {"jitter_ref", r.jitterRef},   {"notes", r.notes}};
  std::cout << out.dump(2) << "\n";
  return 0;
}

int smoothCommand(const std::string& motionPath, double cutoff, const std::string& outPath) {
  hoi::MotionSequence m = hoi::loadMotion(motionPath);
  hoi::SmoothResult s = hoi::smoothSequence(m.frames, cutoff, m.fps);
  for (const std::string& w : s.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
  m.frames = std::move(s.states);
  std::filesystem::path out = outPath;
  if (out.empty()) {
    const std::filesystem::path in(motionPath);
    out = in.parent_path() / (in.stem().string() + "_smoothed.json");
  }
  hoi::saveMotion(m, out);
  std::printf("smoothed %zu frames at %.3g Hz -> %s\n", m.frames.size(), cutoff, out.string().c_str());
  return 0;
}

int validateCommand(const std::string& sessionPath) {
  const hoi::SceneSession s = hoi::loadSession(sessionPath);
  int trackPoints = 0;
  for (const hoi::Track2D& t : s.annotations.tracks) trackPoints += static_cast<int>(t.points.size());
  std::printf("ok: %d frames, %zu pairs, %zu tracks (%d points), %zu events, static=%s, scale=%g\n", s.frameCount(),
              s.annotations.pairs.size(), s.annotations.tracks.size(), trackPoints, s.events.size(),
              s.annotations.staticObject ? "yes" : "no", s.annotations.scale);
  return 0;
}

int serveCommand(const std::string& host, int port, const std::string& dataDir, int workers,
                 const std::string& configPath) {
  hoi::ServiceOptions options;
  options.dataDir = dataDir;
  options.workers = workers;
  if (!configPath.empty()) options.config = hoi::loadConfig(configPath);
  hoi::SessionService service(options);
  const int bound = service.bind(host, port);
  if (bound < 0) {
    std::fprintf(stderr, "error: cannot bind %s:%d\n", host.c_str(), port);
    return 1;
  }
  activeService = &service;
  std::signal(SIGINT, onSignal);
  std::signal(SIGTERM, onSignal);
  std::printf("serving %s on http://%s:%d\n", dataDir.c_str(), host.c_str(), bound);
  std::fflush(stdout);
  service.run();
  activeService = nullptr;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Human-object interaction solver"};
  app.require_subcommand(1);

  std::string sessionPath, configPath, outDir;
  auto* solve = app.add_subcommand("solve", "Run the pipeline on a session and write results");
  solve->add_option("session", sessionPath, "session.json")->required()->check(CLI::ExistingFile);
  solve->add_option("--config", configPath, "pipeline config JSON")->check(CLI::ExistingFile);
  solve->add_option("--out", outDir, "results directory (default: <session dir>/results)");

  std::string simPath, refPath, skeletonPath;
  auto* metrics = app.add_subcommand("metrics", "Compare a motion against a reference motion");
  metrics->add_option("sim", simPath, "motion JSON to evaluate")->required()->check(CLI::ExistingFile);
  metrics->add_option("ref", refPath, "reference motion JSON")->required()->check(CLI::ExistingFile);
  metrics->add_option("--skeleton", skeletonPath, "skeleton JSON (default: built-in humanoid)");

  std::string motionPath, smoothOut;
  double cutoff = 0.0;
  auto* smooth = app.add_subcommand("smooth", "Low-pass filter a motion file");
  smooth->add_option("motion", motionPath, "motion JSON")->required()->check(CLI::ExistingFile);
  smooth->add_option("--cutoff", cutoff, "cutoff frequency (Hz)")->required();
  smooth->add_option("--out", smoothOut, "output file (default: <motion>_smoothed.json)");

  std::string validatePath;
  auto* validate = app.add_subcommand("validate", "Load and check a session");
  validate->add_option("session", validatePath, "session.json")->required();

  std::string host = "127.0.0.1", dataDir, serveConfig;
  int port = 8080;
  int workers = 2;
  auto* serve = app.add_subcommand("serve", "Serve the annotation HTTP API");
  serve->add_option("--port", port, "TCP port")->required()->check(CLI::Range(0, 65535));
  serve->add_option("--data", dataDir, "directory of sessions")->required()->check(CLI::ExistingDirectory);
  serve->add_option("--host", host, "bind address");
  serve->add_option("--workers", workers, "pipeline worker threads")->check(CLI::PositiveNumber);
  serve->add_option("--config", serveConfig, "default pipeline config JSON")->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*solve) return solveCommand(sessionPath, configPath, outDir);
    if (*metrics) return metricsCommand(simPath, refPath, skeletonPath);
    if (*smooth) return smoothCommand(motionPath, cutoff, smoothOut);
    if (*validate) return validateCommand(validatePath);
    if (*serve) return serveCommand(host, port, dataDir, workers, serveConfig);
  } catch (const hoi::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
