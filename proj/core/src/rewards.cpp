#include "locokernel/rewards.hpp"

#include <cmath>
#include <stdexcept>

namespace locokernel {

double phi(double x) { return std::exp(-(x * x) / 0.5); }

double phi(const Eigen::Ref<const Eigen::VectorXd>& x) {
  return std::exp(-x.squaredNorm() / 0.5);
}

std::array<double, 12> RewardWeights::values() const {
  return {lin_vel_track, ang_vel_track, z_vel,  ang_vel,     torque,      joint_accel,
          base_height,   action_rate,   collisions, stumble, joint_error, stability};
}

std::array<double, RewardBreakdown::kTermCount> RewardBreakdown::terms() const {
  return {lin_vel_track, ang_vel_track, z_vel,  ang_vel,     torque,      joint_accel,
          base_height,   action_rate,   collisions, stumble, joint_error, stability};
}

const std::array<const char*, RewardBreakdown::kTermCount>& RewardBreakdown::term_names() {
  static const std::array<const char*, kTermCount> names = {
      "lin_vel_track", "ang_vel_track", "z_vel",      "ang_vel", "torque",      "joint_accel",
      "base_height",   "action_rate",   "collisions", "stumble", "joint_error", "stability"};
  return names;
}

int count_stumbles(const RobotState& state) {
  int count = 0;
  for (int k = 0; k < kFootCount; ++k) {
    const Eigen::Vector3d& f = state.foot_forces[k];
    if (f.head<2>().norm() > 5.0 * std::abs(f.z())) ++count;
  }
  return count;
}

RewardBreakdown compute_rewards(const StepContext& ctx) {
  if (ctx.dt <= 0) throw std::invalid_argument("step context dt must be positive");
  ctx.state.validate();
  ctx.prev_state.validate();
  if (!ctx.action.allFinite() || !ctx.prev_action.allFinite() || !ctx.torques.allFinite() ||
      !ctx.command.allFinite() || !std::isfinite(ctx.target_height))
    throw std::invalid_argument("step context contains non-finite values");

  RewardBreakdown b;
  b.weights = ctx.weights;

  b.lin_vel_track = phi(Eigen::Vector2d(ctx.command.head<2>() - ctx.state.lin_vel.head<2>()));
  b.ang_vel_track = phi(ctx.command(2) - ctx.state.ang_vel(2));

  b.z_vel = -ctx.state.lin_vel.z() * ctx.state.lin_vel.z();
  b.ang_vel = -ctx.state.ang_vel.squaredNorm();
  b.torque = -ctx.torques.squaredNorm();

  const JointVector joint_accel = (ctx.state.joint_vel - ctx.prev_state.joint_vel) / ctx.dt;
  b.joint_accel = -joint_accel.squaredNorm();

  const double dz = ctx.target_height - ctx.state.base_position.z();
  b.base_height = -dz * dz;

  const JointVector action_rate = (ctx.action - ctx.prev_action) / ctx.dt;
  b.action_rate = -action_rate.squaredNorm();

  b.collisions = -static_cast<double>(ctx.collision_count);
  b.stumble = -static_cast<double>(ctx.stumble_count ? *ctx.stumble_count
                                                     : count_stumbles(ctx.state));
  b.joint_error = -(ctx.q_default - ctx.state.joint_pos).squaredNorm();
  b.stability = stability_margin(ctx.state, ctx.stability_kind, ctx.stability);

  const auto terms = b.terms();
  const auto weights = ctx.weights.values();
  double total = 0;
  for (int i = 0; i < RewardBreakdown::kTermCount; ++i) total += terms[i] * weights[i];
  b.total = total;
  return b;
}

double tracking_error(std::span<const VelocityTrackSample> samples) {
  if (samples.empty()) throw std::invalid_argument("tracking error needs a non-empty trajectory");
  double sum = 0;
  for (const auto& s : samples) sum += (s.cmd_xy - s.actual_xy).norm();
  return sum / static_cast<double>(samples.size());
}

double mean_power(std::span<const JointPowerSample> samples) {
  if (samples.empty()) throw std::invalid_argument("power needs a non-empty trajectory");
  double sum = 0;
  for (const auto& s : samples) sum += s.torque.cwiseProduct(s.joint_vel).cwiseAbs().sum();
  return sum / static_cast<double>(samples.size());
}

}  // namespace locokernel
