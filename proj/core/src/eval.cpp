#include "locokernel/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <memory>
#include <stdexcept>

#include <Eigen/Geometry>

namespace locokernel {

namespace {

constexpr double kContactEps = 0.015;   // foot counts as touching within this
constexpr double kEscapeMargin = 1.0;   // keeps heightmap samples in bounds
constexpr double kFallDepth = 1.0;      // drop below last stance before "fell"

// Planar two-link solve about the hip pitch axis, matching the
// forward_kinematics pitch-plane equations. Targets outside the reachable
// annulus are pulled to its boundary.
std::pair<double, double> leg_pitch_angles(double x, double z, double l2, double l3) {
  double r = std::sqrt(x * x + z * z);
  r = std::clamp(r, std::abs(l2 - l3) + 1e-9, 0.999 * (l2 + l3));
  const double phi = std::atan2(-x, -z);
  const double cos_alpha = std::clamp((l2 * l2 + r * r - l3 * l3) / (2.0 * l2 * r), -1.0, 1.0);
  const double cos_inner = std::clamp((l2 * l2 + l3 * l3 - r * r) / (2.0 * l2 * l3), -1.0, 1.0);
  const double hip = phi + std::acos(cos_alpha);
  const double knee = -(M_PI - std::acos(cos_inner));
  return {hip, knee};
}

double standing_foot_depth(const KernelConfig& cfg) {
  return -forward_kinematics(cfg.q_default().segment<3>(0), 0, cfg.geometry).z();
}

}  // namespace

KinematicEnv::KinematicEnv(const Heightfield& hf, const TerrainSpec& spec,
                           const CommandSample& command, std::uint64_t episode_seed,
                           const KernelConfig& config, bool randomize)
    : hf_(&hf), spec_(spec), command_(command), cfg_(config) {
  Rng rng(Rng::mix(episode_seed, 0xE9150DE));
  if (randomize) randomized_ = domain_randomize(rng);

  sample_options_.deep_void = cfg_.deep_void;
  sample_options_.drift = randomized_.heightmap_drift;

  effective_gains_ = cfg_.gains;
  effective_gains_.kp *= randomized_.kp_scale * randomized_.motor_strength_scale;
  effective_gains_.kd *= randomized_.kd_scale * randomized_.motor_strength_scale;

  q_default_ = cfg_.q_default();
  nominal_height_ = standing_foot_depth(cfg_);
  delay_steps_ = static_cast<int>(std::lround(randomized_.system_delay_ms / 1000.0 / cfg_.dt));

  state_.joint_pos = q_default_ * randomized_.init_joint_scale;
  const auto feet = forward_kinematics_all(state_.joint_pos, cfg_.geometry);
  double lowest = 0;
  for (const auto& f : feet) lowest = std::min(lowest, f.z());
  state_.base_position = {0.0, 0.0, -lowest};  // deepest foot touches the platform
  last_stance_height_ = 0.0;
  refresh_contacts();
}

void KinematicEnv::refresh_contacts() {
  const auto feet_base = forward_kinematics_all(state_.joint_pos, cfg_.geometry);
  const Eigen::Rotation2D<double> rot(state_.base_yaw);
  int supports = 0;
  for (int k = 0; k < kFootCount; ++k) {
    const Eigen::Vector2d world_xy =
        state_.base_position.head<2>() + rot * feet_base[k].head<2>();
    const double world_z = state_.base_position.z() + feet_base[k].z();
    state_.foot_positions[k] = {world_xy.x(), world_xy.y(), world_z};
    state_.foot_contact[k] = false;
    foot_over_void_[k] = false;
    foot_ground_[k] = 0.0;
    if (!hf_->in_bounds(world_xy.x(), world_xy.y())) continue;
    const auto h = hf_->height_at(world_xy.x(), world_xy.y());
    if (!h) {
      // reaching stance depth over a bottomless cell: no support
      foot_over_void_[k] = feet_base[k].z() <= -(nominal_height_ - kContactEps);
      continue;
    }
    foot_ground_[k] = *h;
    state_.foot_contact[k] = world_z <= *h + kContactEps;
    if (state_.foot_contact[k]) ++supports;
  }
  const double fz = supports > 0 ? cfg_.robot_mass * cfg_.gravity / supports : 0.0;
  for (int k = 0; k < kFootCount; ++k)
    state_.foot_forces[k] = state_.foot_contact[k] ? Eigen::Vector3d(0, 0, fz)
                                                   : Eigen::Vector3d::Zero();
}

bool KinematicEnv::can_observe() const {
  return heightmap_in_bounds(*hf_, state_, sample_options_);
}

ObservationFrame KinematicEnv::frame() const {
  FootmapParams fp = cfg_.footmap;
  return build_frame(*hf_, state_, command_.local(state_.base_yaw), prev_action_,
                     sample_options_, fp);
}

StepRecord KinematicEnv::step(const JointVector& action) {
  if (done()) throw std::logic_error("stepping a finished environment");
  if (!action.allFinite()) throw std::invalid_argument("action contains non-finite values");

  const RobotState prev = state_;
  const double dt = cfg_.dt;

  // joint tracking through the delay line
  target_history_.push_back(joint_targets(action, q_default_, cfg_.action_scale));
  if (static_cast<int>(target_history_.size()) > delay_steps_ + 1) target_history_.pop_front();
  const JointVector& delayed =
      static_cast<int>(target_history_.size()) > delay_steps_ ? target_history_.front()
                                                              : q_default_;
  const double track = 1.0 - std::exp(-dt / cfg_.joint_time_constant);
  const JointVector q_new = state_.joint_pos + track * (delayed - state_.joint_pos);
  state_.joint_vel = (q_new - state_.joint_pos) / dt;
  state_.joint_pos = q_new;
  const JointVector tau = pd_torque(delayed, q_new, state_.joint_vel, effective_gains_);

  // support from the new joint pose at the old base pose
  refresh_contacts();
  int supports = 0;
  double stance_sum = 0;
  for (int k = 0; k < kFootCount; ++k) {
    if (!state_.foot_contact[k]) continue;
    ++supports;
    stance_sum += foot_ground_[k];
  }
  const std::array<bool, kFootCount> over_void = foot_over_void_;

  const double prev_z = state_.base_position.z();
  if (supports > 0) {
    last_stance_height_ = stance_sum / supports;
    fall_velocity_ = 0;
    const double target_z = last_stance_height_ + nominal_height_;
    const double blend = std::min(1.0, dt / 0.1);
    state_.base_position.z() += blend * (target_z - state_.base_position.z());
    state_.base_yaw += command_.omega * dt;
    state_.ang_vel = {0, 0, command_.omega};
  } else {
    fall_velocity_ += cfg_.gravity * dt;
    state_.base_position.z() -= fall_velocity_ * dt;
    state_.ang_vel = {0, 0, 0};
  }
  state_.base_position.head<2>() += command_.v_global * dt;

  const Eigen::Vector2d v_local =
      Eigen::Rotation2D<double>(-state_.base_yaw) * command_.v_global;
  state_.lin_vel = {v_local.x(), v_local.y(), (state_.base_position.z() - prev_z) / dt};

  refresh_contacts();  // record-consistent feet and forces at the new pose

  // termination
  bool base_contact = false;
  const double bx = state_.base_position.x();
  const double by = state_.base_position.y();
  if (bx < hf_->min_x() + kEscapeMargin || bx > hf_->max_x() - kEscapeMargin ||
      by < hf_->min_y() + kEscapeMargin || by > hf_->max_y() - kEscapeMargin) {
    terminal_ = RolloutStatus::out_of_bounds;
  } else {
    const auto ground = hf_->height_at(bx, by);
    if (ground) {
      if (state_.base_position.z() - *ground < cfg_.base_clearance) {
        base_contact = true;
        terminal_ = RolloutStatus::base_contact;
      }
    } else if (state_.base_position.z() < last_stance_height_ - kFallDepth) {
      terminal_ = RolloutStatus::fell;
    }
  }

  StepContext ctx;
  ctx.state = state_;
  ctx.prev_state = prev;
  ctx.action = action;
  ctx.prev_action = prev_action_;
  ctx.command = command_.local(state_.base_yaw);
  ctx.torques = tau;
  ctx.dt = dt;
  ctx.collision_count = base_contact ? 1 : 0;
  ctx.target_height = last_stance_height_ + cfg_.target_height;
  ctx.q_default = q_default_;
  ctx.weights = cfg_.weights;
  ctx.stability_kind = cfg_.stability_kind;
  ctx.stability = cfg_.stability_options();
  ctx.stability.ground_height = last_stance_height_;
  const RewardBreakdown rewards = compute_rewards(ctx);

  StepRecord rec;
  rec.t = t_;
  rec.base_position = state_.base_position;
  rec.yaw = state_.base_yaw;
  rec.lin_vel = state_.lin_vel;
  rec.ang_vel = state_.ang_vel;
  rec.q = state_.joint_pos;
  rec.qd = state_.joint_vel;
  rec.action = action;
  rec.torque = tau;
  rec.foot_positions = state_.foot_positions;
  rec.foot_forces = state_.foot_forces;
  rec.foot_contact = state_.foot_contact;
  rec.foot_over_void = over_void;
  rec.base_contact = base_contact;
  rec.reward_terms = rewards.terms();
  rec.reward_total = rewards.total;

  prev_action_ = action;
  t_ += dt;
  return rec;
}

TrajectoryLog run_rollout(const Heightfield& hf, const RolloutRequest& request,
                          const Policy& policy, const KernelConfig& config) {
  if (!(request.duration > 0)) throw std::invalid_argument("rollout duration must be positive");
  TrajectoryLog log;
  log.meta.terrain = request.terrain;
  log.meta.command = request.command;
  log.meta.dt = config.dt;
  log.meta.duration = request.duration;
  log.meta.episode_seed = request.seed;
  log.meta.policy = request.policy_name;

  KinematicEnv env(hf, request.terrain, request.command, request.seed, config, request.randomize);
  const int n_steps = static_cast<int>(std::lround(request.duration / config.dt));
  log.steps.reserve(n_steps);
  std::optional<RolloutStatus> status;
  for (int k = 0; k < n_steps; ++k) {
    if (!env.can_observe()) {
      status = RolloutStatus::out_of_bounds;
      break;
    }
    JointVector action;
    try {
      action = policy(env.frame());
    } catch (const std::exception&) {
      status = RolloutStatus::policy_error;
      break;
    }
    log.steps.push_back(env.step(action));
    if (env.done()) {
      status = env.terminal();
      break;
    }
  }
  log.meta.status = status.value_or(RolloutStatus::completed);
  return log;
}

Policy make_scripted_policy(const std::string& name, const KernelConfig& config) {
  std::string gait = name;
  if (gait.rfind("scripted:", 0) == 0) gait = gait.substr(9);

  if (gait == "stand") {
    return [](const ObservationFrame&) { return JointVector::Zero(); };
  }
  if (gait == "trot") {
    struct TrotState {
      double phase = 0;
    };
    auto st = std::make_shared<TrotState>();
    const KernelConfig cfg = config;
    const double stance_depth = standing_foot_depth(cfg);
    const JointVector q_default = cfg.q_default();
    // diagonal pairs: (FR, RL) then (FL, RR)
    static constexpr std::array<double, kFootCount> offsets = {0.0, 0.5, 0.5, 0.0};
    return [st, cfg, stance_depth, q_default](const ObservationFrame& frame) -> JointVector {
      const Eigen::Vector3d cmd = frame.proprio.segment<3>(9);
      const double period = 1.0 / cfg.trot_frequency;
      const double stride = cmd.x() * period * 0.5;
      JointVector q_des = q_default;
      for (int leg = 0; leg < kFootCount; ++leg) {
        const double p = std::fmod(st->phase / period + offsets[leg], 1.0);
        double x_f, z_f;
        if (p < 0.5) {  // stance: foot sweeps backward under the hip
          const double u = p / 0.5;
          x_f = stride * (0.5 - u);
          z_f = -stance_depth;
        } else {  // swing: return forward with a lift
          const double u = (p - 0.5) / 0.5;
          x_f = stride * (u - 0.5);
          z_f = -stance_depth + cfg.trot_swing_height * std::sin(M_PI * u);
        }
        const auto [hip, knee] =
            leg_pitch_angles(x_f, z_f, cfg.geometry.thigh_length, cfg.geometry.calf_length);
        q_des(3 * leg + 1) = hip;
        q_des(3 * leg + 2) = knee;
      }
      st->phase += cfg.dt;
      return (q_des - q_default) / cfg.action_scale;
    };
  }
  throw std::invalid_argument("unknown scripted policy: " + name);
}

SuccessResult evaluate_success(const TrajectoryLog& log, const SuccessCriteria& criteria) {
  log.validate();
  SuccessResult result;
  bool any_base_contact = false;
  for (const auto& s : log.steps) any_base_contact |= s.base_contact;
  result.survival = log.meta.status == RolloutStatus::completed && !any_base_contact;

  double displacement = 0;
  if (!log.steps.empty())
    displacement = (log.steps.back().base_position.head<2>() -
                    log.steps.front().base_position.head<2>())
                       .norm();

  double threshold = criteria.min_distance;
  if (criteria.mode == SuccessCriteria::Mode::half_expected) {
    const double speed =
        criteria.command_speed > 0 ? criteria.command_speed : log.meta.command.v_global.norm();
    const double duration = criteria.duration > 0 ? criteria.duration : log.meta.duration;
    if (!(duration > 0)) throw std::invalid_argument("success criteria need a positive duration");
    threshold = 0.5 * speed * duration;
  }
  result.success = result.survival && displacement > threshold;
  return result;
}

LogSummary summarize(const TrajectoryLog& log, const SuccessCriteria& criteria) {
  LogSummary s;
  s.key = {log.meta.terrain.name(), log.meta.terrain.level, log.meta.command.v_global.norm()};
  const SuccessResult r = evaluate_success(log, criteria);
  s.success = r.success;
  s.survival = r.survival;
  s.has_steps = !log.steps.empty();
  if (s.has_steps) {
    std::vector<VelocityTrackSample> track;
    std::vector<JointPowerSample> power;
    track.reserve(log.steps.size());
    power.reserve(log.steps.size());
    for (const auto& step : log.steps) {
      VelocityTrackSample v;
      v.cmd_xy = to_local(log.meta.command.v_global, step.yaw, log.meta.command.omega).head<2>();
      v.actual_xy = step.lin_vel.head<2>();
      track.push_back(v);
      power.push_back({step.torque, step.qd});
    }
    s.tracking_error = tracking_error(track);
    s.power = mean_power(power);
  }
  return s;
}

MetricsTable aggregate(std::span<const LogSummary> summaries) {
  struct Acc {
    int n = 0;
    int success = 0;
    int survival = 0;
    int with_steps = 0;
    double tracking = 0;
    double power = 0;
  };
  std::map<GroupKey, Acc> groups;
  for (const auto& s : summaries) {
    Acc& a = groups[s.key];
    ++a.n;
    a.success += s.success ? 1 : 0;
    a.survival += s.survival ? 1 : 0;
    if (s.has_steps) {
      ++a.with_steps;
      a.tracking += s.tracking_error;
      a.power += s.power;
    }
  }
  MetricsTable table;
  for (const auto& [key, a] : groups) {
    GroupMetrics m;
    m.n = a.n;
    m.success_rate = 100.0 * a.success / a.n;
    m.survival_rate = 100.0 * a.survival / a.n;
    m.tracking_error = a.with_steps > 0 ? a.tracking / a.with_steps : 0.0;
    m.power = a.with_steps > 0 ? a.power / a.with_steps : 0.0;
    table.rows.emplace_back(key, m);
  }
  // overall: unweighted mean over groups
  GroupMetrics overall;
  for (const auto& [key, m] : table.rows) {
    overall.n += m.n;
    overall.success_rate += m.success_rate;
    overall.survival_rate += m.survival_rate;
    overall.tracking_error += m.tracking_error;
    overall.power += m.power;
  }
  if (!table.rows.empty()) {
    const double g = static_cast<double>(table.rows.size());
    overall.success_rate /= g;
    overall.survival_rate /= g;
    overall.tracking_error /= g;
    overall.power /= g;
  }
  table.overall = overall;
  return table;
}

MetricsTable aggregate(std::span<const TrajectoryLog> logs, const SuccessCriteria& criteria) {
  std::vector<LogSummary> summaries;
  summaries.reserve(logs.size());
  for (const auto& log : logs) summaries.push_back(summarize(log, criteria));
  return aggregate(summaries);
}

void write_metrics_tsv(const MetricsTable& table, std::ostream& out) {
  out << "terrain\tlevel\tvelocity\tn\tsuccess_pct\tsurvival_pct\ttracking_error\tpower\n";
  char buf[256];
  auto row = [&](const std::string& terrain, const std::string& level, const std::string& vel,
                 const GroupMetrics& m) {
    std::snprintf(buf, sizeof(buf), "%s\t%s\t%s\t%d\t%.1f\t%.1f\t%.6g\t%.6g\n", terrain.c_str(),
                  level.c_str(), vel.c_str(), m.n, m.success_rate, m.survival_rate,
                  m.tracking_error, m.power);
    out << buf;
  };
  for (const auto& [key, m] : table.rows) {
    std::snprintf(buf, sizeof(buf), "%.6g", key.velocity);
    row(key.terrain, std::to_string(key.level), buf, m);
  }
  row("overall", "-", "-", table.overall);
}

}  // namespace locokernel
