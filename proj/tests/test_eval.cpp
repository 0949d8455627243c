#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "locokernel/eval.hpp"

using namespace locokernel;

namespace {

TerrainSpec eval_spec(TerrainKind kind, int level, std::uint64_t seed, double extent_x = 60.0) {
  TerrainSpec spec;
  spec.kind = kind;
  spec.level = level;
  spec.seed = seed;
  spec.extent = {extent_x, 8.0};
  return spec;
}

RolloutRequest forward_request(const TerrainSpec& spec, double speed, double duration,
                               std::uint64_t seed) {
  RolloutRequest req;
  req.terrain = spec;
  req.command.v_global = {speed, 0.0};
  req.command.omega = 0.0;
  req.duration = duration;
  req.seed = seed;
  return req;
}

std::string to_text(const TrajectoryLog& log) {
  std::stringstream ss;
  log.save(ss);
  return ss.str();
}

// hand-built log: straight-line cruise with clean contacts
TrajectoryLog fabricated_log(double distance, double duration, double speed, bool fall_at_start) {
  TrajectoryLog log;
  log.meta.terrain = eval_spec(TerrainKind::smooth, 0, 1, 60.0);
  log.meta.command.v_global = {speed, 0.0};
  log.meta.dt = 0.02;
  log.meta.duration = duration;
  log.meta.policy = "scripted:test";
  log.meta.status = fall_at_start ? RolloutStatus::base_contact : RolloutStatus::completed;
  const int n = fall_at_start ? 1 : static_cast<int>(std::lround(duration / log.meta.dt));
  for (int k = 0; k < n; ++k) {
    StepRecord s;
    s.t = k * log.meta.dt;
    const double progress = distance * (k + 1) / n;
    s.base_position = {progress, 0, 0.3};
    s.lin_vel = {speed, 0, 0};
    s.base_contact = fall_at_start;
    log.steps.push_back(s);
  }
  return log;
}

}  // namespace

TEST_CASE("domain randomization draws stay in the published ranges") {
  Rng rng(5);
  for (int i = 0; i < 10000; ++i) {
    const RandomizedParams p = domain_randomize(rng);
    CHECK(p.friction >= 0.5);
    CHECK(p.friction <= 1.25);
    CHECK(p.restitution >= 0.0);
    CHECK(p.restitution <= 0.8);
    CHECK(p.link_mass_scale >= 0.9);
    CHECK(p.link_mass_scale <= 1.1);
    CHECK(p.payload_mass >= -1.0);
    CHECK(p.payload_mass <= 2.0);
    CHECK(p.com_offset.cwiseAbs().maxCoeff() <= 0.05);
    CHECK(p.motor_strength_scale >= 0.9);
    CHECK(p.motor_strength_scale <= 1.1);
    CHECK(p.kp_scale >= 0.9);
    CHECK(p.kp_scale <= 1.1);
    CHECK(p.kd_scale >= 0.9);
    CHECK(p.kd_scale <= 1.1);
    CHECK(p.init_joint_scale >= 0.5);
    CHECK(p.init_joint_scale <= 1.5);
    CHECK(p.system_delay_ms >= 0.0);
    CHECK(p.system_delay_ms <= 40.0);
    CHECK(p.external_force.cwiseAbs().maxCoeff() <= 30.0);
    CHECK(p.heightmap_drift.cwiseAbs().maxCoeff() <= 0.05);
  }
}

TEST_CASE("identical seeds give identical randomization draws") {
  Rng a(77), b(77);
  const RandomizedParams pa = domain_randomize(a);
  const RandomizedParams pb = domain_randomize(b);
  CHECK(pa.friction == pb.friction);
  CHECK(pa.com_offset == pb.com_offset);
  CHECK(pa.heightmap_drift == pb.heightmap_drift);
  CHECK(pa.system_delay_ms == pb.system_delay_ms);
}

TEST_CASE("a 20 s trot on flat ground covers the commanded 20 m") {
  const KernelConfig cfg;
  const TerrainSpec spec = eval_spec(TerrainKind::smooth, 0, 3);
  const Heightfield hf = generate_terrain(spec, cfg.terrain);
  const RolloutRequest req = forward_request(spec, 1.0, 20.0, 9);
  const TrajectoryLog log = run_rollout(hf, req, make_scripted_policy("scripted:trot", cfg), cfg);

  CHECK(log.steps.size() == 1000);  // 20 s at 0.02 s
  CHECK(log.meta.status == RolloutStatus::completed);
  const double displacement =
      (log.steps.back().base_position.head<2>() - log.steps.front().base_position.head<2>())
          .norm();
  CHECK(displacement == doctest::Approx(20.0).epsilon(0.03));
  for (const auto& s : log.steps) CHECK_FALSE(s.base_contact);
  // meta echoes the request
  CHECK(log.meta.terrain.seed == spec.seed);
  CHECK(log.meta.episode_seed == 9);
  CHECK(log.meta.command.v_global.x() == 1.0);
}

TEST_CASE("rollouts are bit-deterministic per seed") {
  const KernelConfig cfg;
  const TerrainSpec spec = eval_spec(TerrainKind::stones, 7, 21);
  const Heightfield hf = generate_terrain(spec, cfg.terrain);
  const RolloutRequest req = forward_request(spec, 0.8, 5.0, 4);
  const TrajectoryLog a = run_rollout(hf, req, make_scripted_policy("trot", cfg), cfg);
  const TrajectoryLog b = run_rollout(hf, req, make_scripted_policy("trot", cfg), cfg);
  CHECK(to_text(a) == to_text(b));

  RolloutRequest other = req;
  other.seed = 5;
  other.randomize = true;
  const TrajectoryLog c = run_rollout(hf, other, make_scripted_policy("trot", cfg), cfg);
  const TrajectoryLog d = run_rollout(hf, other, make_scripted_policy("trot", cfg), cfg);
  CHECK(to_text(c) == to_text(d));
  CHECK(to_text(a) != to_text(c));
}

TEST_CASE("a blind trot on level-9 stones steps over voids") {
  const KernelConfig cfg;
  const TerrainSpec spec = eval_spec(TerrainKind::stones, 9, 42);
  const Heightfield hf = generate_terrain(spec, cfg.terrain);
  const RolloutRequest req = forward_request(spec, 1.0, 10.0, 7);
  const TrajectoryLog log = run_rollout(hf, req, make_scripted_policy("trot", cfg), cfg);
  int void_events = 0;
  for (const auto& s : log.steps)
    for (int k = 0; k < kFootCount; ++k) void_events += s.foot_over_void[k] ? 1 : 0;
  CHECK(void_events > 0);
}

TEST_CASE("standing still keeps the robot and its feet static") {
  const KernelConfig cfg;
  const TerrainSpec spec = eval_spec(TerrainKind::smooth, 0, 1, 8.0);
  const Heightfield hf = generate_terrain(spec, cfg.terrain);
  RolloutRequest req = forward_request(spec, 0.0, 3.0, 2);
  req.policy_name = "scripted:stand";
  const TrajectoryLog log = run_rollout(hf, req, make_scripted_policy("stand", cfg), cfg);
  CHECK(log.meta.status == RolloutStatus::completed);
  const auto& first = log.steps.front();
  const auto& last = log.steps.back();
  CHECK(last.base_position.head<2>().norm() <= 1e-9);
  for (int k = 0; k < kFootCount; ++k)
    CHECK((last.foot_positions[k] - first.foot_positions[k]).norm() <= 1e-6);
  for (const auto& s : log.steps) {
    CHECK_FALSE(s.base_contact);
    CHECK(s.foot_contact[0]);
  }
}

TEST_CASE("log text round-trips through ingest") {
  const KernelConfig cfg;
  const TerrainSpec spec = eval_spec(TerrainKind::gaps, 4, 13);
  const Heightfield hf = generate_terrain(spec, cfg.terrain);
  const RolloutRequest req = forward_request(spec, 0.7, 2.0, 3);
  const TrajectoryLog log = run_rollout(hf, req, make_scripted_policy("trot", cfg), cfg);

  std::stringstream ss;
  log.save(ss);
  const TrajectoryLog back = TrajectoryLog::ingest(ss, "roundtrip");
  CHECK(back.meta.terrain.kind == log.meta.terrain.kind);
  CHECK(back.meta.terrain.level == log.meta.terrain.level);
  CHECK(back.meta.terrain.seed == log.meta.terrain.seed);
  CHECK(back.meta.episode_seed == log.meta.episode_seed);
  CHECK(back.meta.dt == log.meta.dt);
  CHECK(back.meta.status == log.meta.status);
  REQUIRE(back.steps.size() == log.steps.size());
  for (std::size_t i = 0; i < log.steps.size(); ++i) {
    CHECK(back.steps[i].t == log.steps[i].t);
    CHECK(back.steps[i].base_position == log.steps[i].base_position);
    CHECK(back.steps[i].q == log.steps[i].q);
    CHECK(back.steps[i].torque == log.steps[i].torque);
    CHECK(back.steps[i].foot_contact == log.steps[i].foot_contact);
    CHECK(back.steps[i].reward_total == log.steps[i].reward_total);
  }
  // saving the ingested copy reproduces the bytes
  std::stringstream ss2;
  back.save(ss2);
  CHECK(ss2.str() == to_text(log));
}

TEST_CASE("malformed logs fail with the offending line") {
  auto expect_error = [](std::istream& in, const char* origin, const char* needle) {
    try {
      TrajectoryLog::ingest(in, origin);
      FAIL_CHECK("expected ingest to throw");
    } catch (const std::runtime_error& e) {
      CHECK(std::string(e.what()).find(needle) != std::string::npos);
    }
  };

  std::stringstream missing_header("step t=0\n");
  expect_error(missing_header, "x.log", "x.log:1");

  std::stringstream truncated;
  truncated << "LKLOG v1\n"
            << "meta kind=smooth level=0 terrain_seed=0 extent=8,8 platform=1 episode_seed=0 "
               "dt=0.02 duration=20 cmd=1,0,0 policy=p status=completed\n"
            << "step t=0 base=0,0\n";
  expect_error(truncated, "t.log", "t.log:3");

  std::stringstream zero_dt;
  zero_dt << "LKLOG v1\n"
          << "meta kind=smooth level=0 terrain_seed=0 extent=8,8 platform=1 episode_seed=0 "
             "dt=0 duration=20 cmd=1,0,0 policy=p status=completed\n";
  expect_error(zero_dt, "z.log", "dt");
}

TEST_CASE("teleport and instant-fall oracles pin the protocol") {
  // 0.4 m/s command: both the fixed 4 m threshold and the half-expected
  // 0.5 * 0.4 * 20 = 4 m threshold sit below the teleported 5 m
  const TrajectoryLog teleport = fabricated_log(5.0, 20.0, 0.4, false);
  const TrajectoryLog fall = fabricated_log(5.0, 20.0, 0.4, true);

  for (const auto mode :
       {SuccessCriteria::Mode::fixed_distance, SuccessCriteria::Mode::half_expected}) {
    SuccessCriteria criteria;
    criteria.mode = mode;
    const SuccessResult ok = evaluate_success(teleport, criteria);
    CHECK(ok.survival);
    CHECK(ok.success);
    const SuccessResult bad = evaluate_success(fall, criteria);
    CHECK_FALSE(bad.survival);
    CHECK_FALSE(bad.success);
  }
}

TEST_CASE("fixed-distance criterion uses the 4 m threshold") {
  SuccessCriteria criteria;  // fixed_distance, 4 m
  CHECK(evaluate_success(fabricated_log(5.0, 20.0, 1.0, false), criteria).success);
  CHECK(evaluate_success(fabricated_log(4.1, 20.0, 1.0, false), criteria).success);
  CHECK_FALSE(evaluate_success(fabricated_log(3.9, 20.0, 1.0, false), criteria).success);
  // survival without the distance is not success
  const SuccessResult r = evaluate_success(fabricated_log(1.0, 20.0, 1.0, false), criteria);
  CHECK(r.survival);
  CHECK_FALSE(r.success);
}

TEST_CASE("half-expected criterion scales with the commanded speed") {
  SuccessCriteria criteria;
  criteria.mode = SuccessCriteria::Mode::half_expected;
  // 0.4 m/s for 20 s: threshold 4.0 m
  CHECK(evaluate_success(fabricated_log(4.1, 20.0, 0.4, false), criteria).success);
  CHECK_FALSE(evaluate_success(fabricated_log(3.9, 20.0, 0.4, false), criteria).success);
  CHECK_FALSE(evaluate_success(fabricated_log(4.0, 20.0, 0.4, false), criteria).success);
  // explicit overrides beat the log meta
  criteria.command_speed = 0.2;
  CHECK(evaluate_success(fabricated_log(2.1, 20.0, 0.4, false), criteria).success);
}

TEST_CASE("success implies survival") {
  Rng rng(9);
  SuccessCriteria fixed;
  SuccessCriteria half;
  half.mode = SuccessCriteria::Mode::half_expected;
  for (int i = 0; i < 200; ++i) {
    const TrajectoryLog log = fabricated_log(rng.uniform(0, 8), 20.0, rng.uniform(0.1, 1.0),
                                             rng.uniform() < 0.3);
    for (const auto& criteria : {fixed, half}) {
      const SuccessResult r = evaluate_success(log, criteria);
      if (r.success) CHECK(r.survival);
    }
  }
}

TEST_CASE("aggregation means per group and over groups") {
  SuccessCriteria criteria;
  std::vector<LogSummary> summaries;
  summaries.push_back(summarize(fabricated_log(5.0, 20.0, 1.0, false), criteria));
  summaries.push_back(summarize(fabricated_log(5.0, 20.0, 1.0, true), criteria));
  MetricsTable table = aggregate(summaries);
  REQUIRE(table.rows.size() == 1);
  CHECK(table.rows[0].second.n == 2);
  CHECK(table.rows[0].second.success_rate == 50.0);

  // two groups at 100 % and 0 %: overall is the mean of group means
  std::vector<LogSummary> two_groups;
  auto won = summarize(fabricated_log(5.0, 20.0, 1.0, false), criteria);
  won.key.terrain = "stones";
  auto lost = summarize(fabricated_log(5.0, 20.0, 1.0, true), criteria);
  lost.key.terrain = "gaps";
  two_groups.push_back(won);
  two_groups.push_back(lost);
  table = aggregate(two_groups);
  REQUIRE(table.rows.size() == 2);
  CHECK(table.overall.success_rate == 50.0);
  CHECK(table.overall.n == 2);

  // permutation invariance within groups
  std::reverse(two_groups.begin(), two_groups.end());
  const MetricsTable swapped = aggregate(two_groups);
  CHECK(swapped.overall.success_rate == table.overall.success_rate);
  CHECK(swapped.rows[0].first.terrain == table.rows[0].first.terrain);
}

TEST_CASE("metrics table renders one row per group plus overall") {
  SuccessCriteria criteria;
  std::vector<LogSummary> summaries = {summarize(fabricated_log(5.0, 20.0, 1.0, false), criteria)};
  const MetricsTable table = aggregate(summaries);
  std::stringstream ss;
  write_metrics_tsv(table, ss);
  const std::string text = ss.str();
  CHECK(text.find("terrain\tlevel\tvelocity\tn\tsuccess_pct") == 0);
  CHECK(text.find("smooth\t0\t1\t1\t100.0\t100.0") != std::string::npos);
  CHECK(text.find("overall\t-\t-\t1\t100.0") != std::string::npos);
}

TEST_CASE("every frame's footmap peaks at the cell nearest each foot") {
  const KernelConfig cfg;
  const TerrainSpec spec = eval_spec(TerrainKind::rough, 3, 10, 20.0);
  const Heightfield hf = generate_terrain(spec, cfg.terrain);
  CommandSample cmd;
  cmd.v_global = {0.6, 0.0};
  KinematicEnv env(hf, spec, cmd, 11, cfg);
  Policy trot = make_scripted_policy("trot", cfg);
  for (int k = 0; k < 100 && !env.done(); ++k) {
    const ObservationFrame frame = env.frame();
    const auto feet = feet_in_base_frame(env.state());
    for (int foot = 0; foot < kFootCount; ++foot) {
      int best_r = 0, best_c = 0;
      double best_d = 1e18;
      for (int r = 0; r < kHeightmapRows; ++r) {
        for (int c = 0; c < kHeightmapCols; ++c) {
          const double d = std::hypot(frame.heightmap.cell_x(r, c) - feet[foot].x(),
                                      frame.heightmap.cell_y(r, c) - feet[foot].y());
          if (d < best_d) {
            best_d = d;
            best_r = r;
            best_c = c;
          }
        }
      }
      CHECK(frame.footmap.channels[foot](best_r, best_c) ==
            frame.footmap.channels[foot].maxCoeff());
    }
    env.step(trot(frame));
  }
}

TEST_CASE("escaping the field ends the rollout out of bounds") {
  const KernelConfig cfg;
  const TerrainSpec spec = eval_spec(TerrainKind::smooth, 0, 1, 6.0);
  const Heightfield hf = generate_terrain(spec, cfg.terrain);
  const RolloutRequest req = forward_request(spec, 1.0, 20.0, 1);
  const TrajectoryLog log = run_rollout(hf, req, make_scripted_policy("trot", cfg), cfg);
  CHECK(log.meta.status == RolloutStatus::out_of_bounds);
  CHECK(log.steps.size() < 1000);
  SuccessCriteria criteria;
  CHECK_FALSE(evaluate_success(log, criteria).survival);
}

TEST_CASE("a throwing policy ends the rollout with policy_error") {
  const KernelConfig cfg;
  const TerrainSpec spec = eval_spec(TerrainKind::smooth, 0, 1, 8.0);
  const Heightfield hf = generate_terrain(spec, cfg.terrain);
  RolloutRequest req = forward_request(spec, 0.5, 5.0, 1);
  int calls = 0;
  const Policy flaky = [&calls](const ObservationFrame&) -> JointVector {
    if (++calls > 10) throw std::runtime_error("policy crashed");
    return JointVector::Zero();
  };
  const TrajectoryLog log = run_rollout(hf, req, flaky, cfg);
  CHECK(log.meta.status == RolloutStatus::policy_error);
  CHECK(log.steps.size() == 10);
  CHECK_FALSE(evaluate_success(log, SuccessCriteria{}).survival);
}

TEST_CASE("rollout duration must be positive") {
  const KernelConfig cfg;
  const TerrainSpec spec = eval_spec(TerrainKind::smooth, 0, 1, 8.0);
  const Heightfield hf = generate_terrain(spec, cfg.terrain);
  RolloutRequest req = forward_request(spec, 0.5, 0.0, 1);
  CHECK_THROWS_AS(run_rollout(hf, req, make_scripted_policy("stand", cfg), cfg),
                  std::invalid_argument);
  CHECK_THROWS_AS(make_scripted_policy("moonwalk", cfg), std::invalid_argument);
}

TEST_CASE("config files round-trip and reject unknown keys") {
  KernelConfig cfg;
  cfg.weights.stability = 0.75;
  cfg.target_height = 0.31;
  cfg.encoder_heads = 8;
  cfg.stability_kind = StabilityKind::capture_point;
  cfg.terrain.gap_width_per_level = 0.07;
  std::stringstream ss;
  cfg.save(ss);
  const KernelConfig back = KernelConfig::parse(ss, "mem");
  CHECK(back.weights.stability == 0.75);
  CHECK(back.target_height == 0.31);
  CHECK(back.encoder_heads == 8);
  CHECK(back.stability_kind == StabilityKind::capture_point);
  CHECK(back.terrain.gap_width_per_level == 0.07);

  std::stringstream unknown("bogus.key = 1\n");
  CHECK_THROWS_AS(KernelConfig::parse(unknown, "u"), std::runtime_error);
  std::stringstream bad_value("eval.dt = fast\n");
  CHECK_THROWS_AS(KernelConfig::parse(bad_value, "b"), std::runtime_error);
  std::stringstream comments("# just a comment\n\neval.dt = 0.01\n");
  CHECK(KernelConfig::parse(comments, "c").dt == 0.01);
}

TEST_CASE("defaults carry the published control constants") {
  const KernelConfig cfg;
  CHECK(cfg.action_scale == 0.25);
  CHECK(cfg.gains.kp == 40.0);
  CHECK(cfg.gains.kd == 1.0);
  CHECK(cfg.footmap.weight == 10.0);
  CHECK(cfg.footmap.sigma == 0.1);
  CHECK(cfg.terrain.resolution == 0.05);
  CHECK(cfg.dt == 0.02);
  CHECK(cfg.q_default() == default_joint_pose());
}

TEST_CASE("randomized rollouts apply the per-episode heightmap drift") {
  const KernelConfig cfg;
  const TerrainSpec spec = eval_spec(TerrainKind::smooth, 0, 1, 8.0);
  const Heightfield hf = generate_terrain(spec, cfg.terrain);
  CommandSample cmd;
  KinematicEnv plain(hf, spec, cmd, 123, cfg, false);
  KinematicEnv randomized(hf, spec, cmd, 123, cfg, true);
  CHECK(plain.randomized().heightmap_drift.norm() == 0.0);
  CHECK(randomized.randomized().heightmap_drift.norm() > 0.0);
  // flat ground: value + base height cancels the relative offset, leaving
  // exactly the drift z component
  const double dz =
      (randomized.frame().heightmap.values(0, 0) + randomized.state().base_position.z()) -
      (plain.frame().heightmap.values(0, 0) + plain.state().base_position.z());
  CHECK(std::abs(dz - randomized.randomized().heightmap_drift.z()) <= 1e-9);
}
