#pragma once

#include <array>
#include <optional>
#include <span>

#include <Eigen/Core>

#include "locokernel/command.hpp"
#include "locokernel/stability.hpp"

namespace locokernel {

/// Tracking kernel phi(x) = exp(-||x||^2 / 0.5).
double phi(double x);
double phi(const Eigen::Ref<const Eigen::VectorXd>& x);

struct RewardWeights {
  double lin_vel_track = 1.5;
  double ang_vel_track = 0.5;
  double z_vel = 1.0;
  double ang_vel = 0.05;
  double torque = 1e-4;
  double joint_accel = 2.5e-7;
  double base_height = 1.0;
  double action_rate = 0.03;
  double collisions = 1.0;
  double stumble = 0.1;
  double joint_error = 0.04;
  double stability = 1.0;

  std::array<double, 12> values() const;
};

/// Pre-weight value of every reward term plus the weighted total. The total
/// is exactly the dot product of terms() and weights.values() - no hidden
/// terms.
struct RewardBreakdown {
  double lin_vel_track = 0;
  double ang_vel_track = 0;
  double z_vel = 0;
  double ang_vel = 0;
  double torque = 0;
  double joint_accel = 0;
  double base_height = 0;
  double action_rate = 0;
  double collisions = 0;
  double stumble = 0;
  double joint_error = 0;
  double stability = 0;
  RewardWeights weights;
  double total = 0;

  static constexpr int kTermCount = 12;
  std::array<double, kTermCount> terms() const;
  static const std::array<const char*, kTermCount>& term_names();
};

/// Everything one reward evaluation needs. The command is in the base frame
/// ([vx, vy, omega]); derivatives of joint velocity and action come from
/// first-order differences against the previous step.
struct StepContext {
  RobotState state;
  RobotState prev_state;
  JointVector action = JointVector::Zero();
  JointVector prev_action = JointVector::Zero();
  Eigen::Vector3d command{0, 0, 0};
  JointVector torques = JointVector::Zero();
  double dt = 0.02;
  int collision_count = 0;
  std::optional<int> stumble_count;  // counted from foot forces when unset
  double target_height = 0.35;
  JointVector q_default = default_joint_pose();
  RewardWeights weights;
  StabilityKind stability_kind = StabilityKind::cop;
  StabilityOptions stability;
};

/// Feet whose horizontal contact force exceeds five times the vertical one.
int count_stumbles(const RobotState& state);

RewardBreakdown compute_rewards(const StepContext& ctx);

struct VelocityTrackSample {
  Eigen::Vector2d cmd_xy{0, 0};
  Eigen::Vector2d actual_xy{0, 0};
};

/// Mean planar speed error over a trajectory; throws on an empty one.
double tracking_error(std::span<const VelocityTrackSample> samples);

struct JointPowerSample {
  JointVector torque = JointVector::Zero();
  JointVector joint_vel = JointVector::Zero();
};

/// Mean over steps of sum_j |tau_j * qd_j| (regeneration not credited);
/// throws on an empty trajectory.
double mean_power(std::span<const JointPowerSample> samples);

}  // namespace locokernel
