#pragma once

#include <array>
#include <utility>

#include <Eigen/Core>

#include "locokernel/observation.hpp"
#include "locokernel/rng.hpp"

namespace locokernel {

/// Episode-constant velocity command sampled in world coordinates; the
/// local command is re-derived from the current yaw every step so the robot
/// cannot collect tracking reward by turning away from the terrain.
struct CommandSample {
  Eigen::Vector2d v_global{0, 0};  // world-frame planar velocity, m/s
  double omega = 0;                // yaw rate command, rad/s

  Eigen::Vector3d local(double base_yaw) const;
};

/// Speed uniform in speed_range with a uniform random heading; yaw rate
/// uniform in omega_range.
CommandSample sample_global_command(Rng& rng, std::pair<double, double> speed_range,
                                    std::pair<double, double> omega_range);

/// Rotates a world-frame planar command into the base frame and appends the
/// yaw-rate command: c = [R(-yaw) v_global, omega].
Eigen::Vector3d to_local(const Eigen::Vector2d& v_global, double base_yaw, double omega);

/// Three-link leg chain (abduction roll, hip pitch, knee pitch) with
/// A1-class default dimensions. Left and right legs mirror in y.
struct LegGeometry {
  std::array<Eigen::Vector3d, kFootCount> hip_offset{
      Eigen::Vector3d{0.183, -0.047, 0.0},   // FR
      Eigen::Vector3d{0.183, 0.047, 0.0},    // FL
      Eigen::Vector3d{-0.183, -0.047, 0.0},  // RR
      Eigen::Vector3d{-0.183, 0.047, 0.0},   // RL
  };
  double abduction_offset = 0.08505;  // l1, lateral
  double thigh_length = 0.2;          // l2
  double calf_length = 0.2;           // l3

  double side_sign(int leg_index) const { return (leg_index % 2 == 0) ? -1.0 : 1.0; }
};

/// Standing pose: abduction 0, hip 0.8, knee -1.6 rad on every leg.
JointVector default_joint_pose();

/// q_target = q_default + scale * action.
JointVector joint_targets(const JointVector& action, const JointVector& q_default,
                          double scale = 0.25);
JointVector joint_targets(const JointVector& action);

struct PdGains {
  double kp = 40.0;
  double kd = 1.0;
  double torque_limit = 33.5;  // Nm, symmetric clamp
};

/// tau = kp (q_target - q) - kd qd, clamped to the torque limit.
JointVector pd_torque(const JointVector& q_target, const JointVector& q, const JointVector& qd,
                      const PdGains& gains = {});

/// Foot position in the base frame for one leg's (abduction, hip, knee)
/// angles.
Eigen::Vector3d forward_kinematics(const Eigen::Vector3d& q_leg, int leg_index,
                                   const LegGeometry& geometry = {});

std::array<Eigen::Vector3d, kFootCount> forward_kinematics_all(const JointVector& q,
                                                               const LegGeometry& geometry = {});

}  // namespace locokernel
