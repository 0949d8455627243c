#include <benchmark/benchmark.h>

#include "locokernel/encoder.hpp"

using namespace locokernel;

namespace {

ObservationFrame make_frame() {
  Rng rng(3);
  ObservationFrame frame;
  for (int r = 0; r < kHeightmapRows; ++r) {
    for (int c = 0; c < kHeightmapCols; ++c) {
      frame.heightmap.values(r, c) = rng.uniform(-0.5, 0.5);
      frame.heightmap.cell_x(r, c) = (r - 8) * kHeightmapPitch;
      frame.heightmap.cell_y(r, c) = (c - 5) * kHeightmapPitch;
    }
  }
  std::array<Eigen::Vector2d, kFootCount> feet;
  for (auto& f : feet) f = {rng.uniform(-0.3, 0.3), rng.uniform(-0.2, 0.2)};
  frame.footmap = build_footmap(feet, frame.heightmap);
  for (int i = 0; i < kProprioDim; ++i) frame.proprio(i) = rng.uniform(-1, 1);
  return frame;
}

void BM_CnnFeatures(benchmark::State& state) {
  const EncoderParams params = EncoderParams::seeded(1);
  const ObservationFrame frame = make_frame();
  for (auto _ : state) benchmark::DoNotOptimize(cnn_features(frame.heightmap.values, params));
}

void BM_MhaEncode(benchmark::State& state) {
  const EncoderParams params = EncoderParams::seeded(1);
  const ObservationFrame frame = make_frame();
  const Eigen::MatrixXd tokens = concat_tokens(
      cell_coords_3d(frame.heightmap), cnn_features(frame.heightmap.values, params),
      frame.footmap);
  const Eigen::VectorXd query = proprio_embed(frame.proprio, params);
  for (auto _ : state) benchmark::DoNotOptimize(mha_encode(tokens, query, params));
}

void BM_EncodeFull(benchmark::State& state) {
  const EncoderParams params = EncoderParams::seeded(1);
  const ObservationFrame frame = make_frame();
  for (auto _ : state) benchmark::DoNotOptimize(encode(frame, params));
}

void BM_Footmap(benchmark::State& state) {
  const ObservationFrame frame = make_frame();
  std::array<Eigen::Vector2d, kFootCount> feet = {
      Eigen::Vector2d{0.2, -0.1}, Eigen::Vector2d{0.2, 0.1}, Eigen::Vector2d{-0.2, -0.1},
      Eigen::Vector2d{-0.2, 0.1}};
  for (auto _ : state) benchmark::DoNotOptimize(build_footmap(feet, frame.heightmap));
}

}  // namespace

BENCHMARK(BM_CnnFeatures);
BENCHMARK(BM_MhaEncode);
BENCHMARK(BM_EncodeFull);
BENCHMARK(BM_Footmap);

BENCHMARK_MAIN();
