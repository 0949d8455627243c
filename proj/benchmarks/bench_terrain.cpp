#include <benchmark/benchmark.h>

#include "locokernel/terrain.hpp"

using namespace locokernel;

namespace {

void BM_GenerateTerrain(benchmark::State& state, TerrainKind kind) {
  TerrainSpec spec;
  spec.kind = kind;
  spec.level = static_cast<int>(state.range(0));
  spec.seed = 42;
  for (auto _ : state) {
    Heightfield hf = generate_terrain(spec);
    benchmark::DoNotOptimize(hf);
  }
  state.SetItemsProcessed(state.iterations() * 160 * 160);  // cells per tile
}

void BM_HeightAt(benchmark::State& state) {
  TerrainSpec spec;
  spec.kind = TerrainKind::stones;
  spec.level = 9;
  spec.seed = 7;
  const Heightfield hf = generate_terrain(spec);
  Rng rng(1);
  for (auto _ : state) {
    const double x = rng.uniform(hf.min_x(), hf.max_x());
    const double y = rng.uniform(hf.min_y(), hf.max_y());
    benchmark::DoNotOptimize(hf.height_at(x, y));
  }
}

}  // namespace

BENCHMARK_CAPTURE(BM_GenerateTerrain, smooth, TerrainKind::smooth)->Arg(0);
BENCHMARK_CAPTURE(BM_GenerateTerrain, rough, TerrainKind::rough)->Arg(5);
BENCHMARK_CAPTURE(BM_GenerateTerrain, stones, TerrainKind::stones)->Arg(9);
BENCHMARK_CAPTURE(BM_GenerateTerrain, stairs_up, TerrainKind::stairs_up)->Arg(9);
BENCHMARK(BM_HeightAt);

BENCHMARK_MAIN();
