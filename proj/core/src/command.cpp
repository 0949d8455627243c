#include "locokernel/command.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Geometry>

namespace locokernel {

Eigen::Vector3d CommandSample::local(double base_yaw) const {
  return to_local(v_global, base_yaw, omega);
}

CommandSample sample_global_command(Rng& rng, std::pair<double, double> speed_range,
                                    std::pair<double, double> omega_range) {
  if (speed_range.first > speed_range.second || omega_range.first > omega_range.second)
    throw std::invalid_argument("command sampling ranges must be ordered");
  const double speed = rng.uniform(speed_range.first, speed_range.second);
  const double heading = rng.uniform(0.0, 2.0 * M_PI);
  CommandSample cmd;
  cmd.v_global = speed * Eigen::Vector2d(std::cos(heading), std::sin(heading));
  cmd.omega = rng.uniform(omega_range.first, omega_range.second);
  return cmd;
}

Eigen::Vector3d to_local(const Eigen::Vector2d& v_global, double base_yaw, double omega) {
  const Eigen::Vector2d v_local = Eigen::Rotation2D<double>(-base_yaw) * v_global;
  return {v_local.x(), v_local.y(), omega};
}

JointVector default_joint_pose() {
  JointVector q;
  for (int leg = 0; leg < kFootCount; ++leg) {
    q(3 * leg + 0) = 0.0;
    q(3 * leg + 1) = 0.8;
    q(3 * leg + 2) = -1.6;
  }
  return q;
}

JointVector joint_targets(const JointVector& action, const JointVector& q_default, double scale) {
  return q_default + scale * action;
}

JointVector joint_targets(const JointVector& action) {
  return joint_targets(action, default_joint_pose());
}

JointVector pd_torque(const JointVector& q_target, const JointVector& q, const JointVector& qd,
                      const PdGains& gains) {
  JointVector tau = gains.kp * (q_target - q) - gains.kd * qd;
  return tau.cwiseMax(-gains.torque_limit).cwiseMin(gains.torque_limit);
}

Eigen::Vector3d forward_kinematics(const Eigen::Vector3d& q_leg, int leg_index,
                                   const LegGeometry& geometry) {
  if (leg_index < 0 || leg_index >= kFootCount) throw std::invalid_argument("leg index out of range");
  const double s = geometry.side_sign(leg_index);
  const double q_ab = q_leg(0), q_hip = q_leg(1), q_knee = q_leg(2);
  const double l2 = geometry.thigh_length, l3 = geometry.calf_length;

  // Hip-pitch plane: both pitch joints rotate about y, so their angles add.
  const double x = -l2 * std::sin(q_hip) - l3 * std::sin(q_hip + q_knee);
  const double z = -l2 * std::cos(q_hip) - l3 * std::cos(q_hip + q_knee);
  const double y = s * geometry.abduction_offset;

  // Abduction rolls the whole plane about the hip x axis.
  const double cy = std::cos(q_ab), sy = std::sin(q_ab);
  const Eigen::Vector3d foot(x, y * cy - z * sy, y * sy + z * cy);
  return geometry.hip_offset[leg_index] + foot;
}

std::array<Eigen::Vector3d, kFootCount> forward_kinematics_all(const JointVector& q,
                                                               const LegGeometry& geometry) {
  std::array<Eigen::Vector3d, kFootCount> feet;
  for (int leg = 0; leg < kFootCount; ++leg)
    feet[leg] = forward_kinematics(q.segment<3>(3 * leg), leg, geometry);
  return feet;
}

}  // namespace locokernel
