#include <benchmark/benchmark.h>

#include "locokernel/eval.hpp"

using namespace locokernel;

namespace {

void BM_RolloutStep(benchmark::State& state) {
  const KernelConfig cfg;
  TerrainSpec spec;
  spec.kind = TerrainKind::stones;
  spec.level = 5;
  spec.seed = 11;
  spec.extent = {60.0, 8.0};
  const Heightfield hf = generate_terrain(spec, cfg.terrain);
  CommandSample cmd;
  cmd.v_global = {1.0, 0.0};
  KinematicEnv env(hf, spec, cmd, 3, cfg);
  Policy trot = make_scripted_policy("trot", cfg);
  for (auto _ : state) {
    if (env.done()) {
      state.PauseTiming();
      env = KinematicEnv(hf, spec, cmd, 3, cfg);
      state.ResumeTiming();
    }
    benchmark::DoNotOptimize(env.step(trot(env.frame())));
  }
  state.SetItemsProcessed(state.iterations());
}

void BM_FullRollout(benchmark::State& state) {
  const KernelConfig cfg;
  TerrainSpec spec;
  spec.kind = TerrainKind::smooth;
  spec.seed = 1;
  spec.extent = {60.0, 8.0};
  const Heightfield hf = generate_terrain(spec, cfg.terrain);
  RolloutRequest req;
  req.terrain = spec;
  req.command.v_global = {1.0, 0.0};
  req.duration = 20.0;
  for (auto _ : state) {
    req.seed += 1;
    benchmark::DoNotOptimize(run_rollout(hf, req, make_scripted_policy("trot", cfg), cfg));
  }
  state.SetItemsProcessed(state.iterations() * 1000);  // control steps
}

void BM_StabilityReward(benchmark::State& state) {
  RobotState s;
  s.base_position = {0, 0, 0.3};
  const std::array<Eigen::Vector2d, 4> feet = {
      Eigen::Vector2d{0.2, -0.15}, Eigen::Vector2d{0.2, 0.15}, Eigen::Vector2d{-0.2, -0.15},
      Eigen::Vector2d{-0.2, 0.15}};
  for (int k = 0; k < 4; ++k) {
    s.foot_positions[k] = {feet[k].x(), feet[k].y(), 0.0};
    s.foot_forces[k] = {0, 0, 30.0};
    s.foot_contact[k] = true;
  }
  for (auto _ : state) benchmark::DoNotOptimize(stability_reward_cop(s));
}

}  // namespace

BENCHMARK(BM_RolloutStep);
BENCHMARK(BM_FullRollout)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_StabilityReward);

BENCHMARK_MAIN();
