#include <benchmark/benchmark.h>

#include <hoi/session/pipeline.h>

#include "synthetic_scene.h"

using namespace hoi;

namespace {

void BM_RunPipeline(benchmark::State& state) {
  hoi::testing::SceneOptions options;
  options.frames = static_cast<int>(state.range(0));
  options.masks = state.range(1) != 0;
  const auto dir = std::filesystem::temp_directory_path() / "hoi_bench_scene";
  std::filesystem::remove_all(dir);
  const hoi::testing::SyntheticScene scene = hoi::testing::writeScene(dir, options);
  const SceneSession session = loadSession(scene.sessionPath);
  PipelineConfig config;
  config.useMasks = options.masks;
  for (auto _ : state) benchmark::DoNotOptimize(runPipeline(session, config));
  state.SetItemsProcessed(state.iterations() * options.frames);
}
BENCHMARK(BM_RunPipeline)->Args({30, 0})->Args({90, 0})->Args({30, 1})->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
