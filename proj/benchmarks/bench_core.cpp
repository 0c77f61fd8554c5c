#include <benchmark/benchmark.h>

#include <cmath>
#include <random>

#include <hoi/geometry/mesh.h>
#include <hoi/optimizer/optimizer.h>
#include <hoi/silhouette/silhouette.h>
#include <hoi/skeleton/skeleton.h>
#include <hoi/solver/rigid_solver.h>

using namespace hoi;

namespace {

CameraModel camera(int width, int height) {
  return {width * 0.8, width * 0.8, width / 2.0, height / 2.0, width, height};
}

RigidPose objectPose() {
  return {Quat(Eigen::AngleAxisd(0.4, Vec3(0.3, 1.0, 0.2).normalized())), Vec3(0.05, -0.02, 1.5)};
}

void BM_SolveRigidPose(benchmark::State& state) {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(-0.2, 0.2);
  const RigidPose truth = objectPose();
  const CameraModel cam = camera(640, 480);
  std::vector<Correspondence3D3D> c33;
  std::vector<Correspondence3D2D> c32;
  for (int i = 0; i < state.range(0); ++i) {
    const Vec3 p(u(rng), u(rng), u(rng));
    c33.push_back({p, truth.transformPoint(p), 1.0});
    c32.push_back({p, cam.project(truth.transformPoint(p)), 1e-4});
  }
  const RigidPose init(Quat::Identity(), Vec3(0.0, 0.0, 1.2));
  for (auto _ : state) benchmark::DoNotOptimize(solveRigidPose(init, c33, c32, cam));
}
BENCHMARK(BM_SolveRigidPose)->Arg(3)->Arg(10)->Arg(100);

void BM_RasterizeSilhouette(benchmark::State& state) {
  const int w = static_cast<int>(state.range(0));
  const CameraModel cam = camera(w, w * 3 / 4);
  const TriangleMesh mesh = makeSphere(0.2, 16, 32);
  for (auto _ : state) benchmark::DoNotOptimize(rasterizeSilhouette(mesh, objectPose(), cam));
}
BENCHMARK(BM_RasterizeSilhouette)->Arg(128)->Arg(256)->Arg(640);

void BM_DistanceTransform(benchmark::State& state) {
  const int w = static_cast<int>(state.range(0));
  const MaskImage mask =
      binarize(rasterizeSilhouette(makeBox(Vec3(0.1, 0.06, 0.06)), objectPose(), camera(w, w * 3 / 4)));
  const MaskImage edges = extractEdges(mask);
  for (auto _ : state) benchmark::DoNotOptimize(distanceTransform(edges));
}
BENCHMARK(BM_DistanceTransform)->Arg(128)->Arg(256)->Arg(640);

struct HandScene {
  const SkeletonModel& model = SkeletonModel::defaultHumanoid();
  TriangleMesh mesh = makeBox(Vec3(0.1, 0.06, 0.06));
  FrameState state;
  FrameProblem problem;

  HandScene() {
    state.human = SkeletonPose::identity(model);
    state.human.rootTranslation = Vec3(-0.35, -1.3, 2.6);
    const FkResult fk = forwardKinematics(model, state.human);
    const KeypointId palm = *model.keypoint("leftHand/palm");
    state.object = RigidPose(Quat::Identity(), fk.keypoints[palm.index] + Vec3(0.12, -0.09, 0.0));
    problem.model = &model;
    problem.mesh = &mesh;
    problem.pairs.push_back({palm, state.object.inverseTransformPoint(fk.keypoints[palm.index]), 0, 1});
    problem.weights.mask = 0.0;
  }
};

void BM_ContactAndCollisionGradient(benchmark::State& state) {
  const HandScene scene;
  for (auto _ : state) benchmark::DoNotOptimize(evaluateLossAndGradient(scene.problem, scene.state));
}
BENCHMARK(BM_ContactAndCollisionGradient);

void BM_RefineFrame(benchmark::State& state) {
  const HandScene scene;
  const std::set<int> mask = chainMask(scene.model, {scene.problem.pairs[0].keypoint});
  RefineOptions options;
  options.iterations = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(refineFrame(scene.problem, scene.state, mask, options));
}
BENCHMARK(BM_RefineFrame)->Arg(5)->Arg(20);

void BM_SmoothSequence(benchmark::State& state) {
  const SkeletonModel& model = SkeletonModel::defaultHumanoid();
  std::vector<FrameState> frames(static_cast<std::size_t>(state.range(0)));
  for (std::size_t t = 0; t < frames.size(); ++t) {
    frames[t].human = SkeletonPose::identity(model);
    frames[t].human.rootTranslation = Vec3(std::sin(0.1 * t), 0.0, 2.0);
    frames[t].object = RigidPose(expMap(Vec3(0.0, 0.01 * t, 0.0)), Vec3(0.0, 0.0, 1.5 + 0.01 * t));
  }
  for (auto _ : state) benchmark::DoNotOptimize(smoothSequence(frames, 6.0, 30.0));
}
BENCHMARK(BM_SmoothSequence)->Arg(90)->Arg(900);

}  // namespace

BENCHMARK_MAIN();
