#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "locokernel/command.hpp"
#include "locokernel/rewards.hpp"
#include "locokernel/rng.hpp"
#include "locokernel/terrain.hpp"

namespace locokernel {

/// Per-episode physical and sensing parameters, uniform over fixed ranges.
struct RandomizedParams {
  double friction = 1.0;
  double restitution = 0.0;
  double link_mass_scale = 1.0;
  double payload_mass = 0.0;             // kg
  Eigen::Vector3d com_offset{0, 0, 0};   // m
  double motor_strength_scale = 1.0;
  double kp_scale = 1.0;
  double kd_scale = 1.0;
  double init_joint_scale = 1.0;
  double system_delay_ms = 0.0;
  Eigen::Vector3d external_force{0, 0, 0};   // N
  Eigen::Vector3d heightmap_drift{0, 0, 0};  // m
};

/// Sampling ranges, one row per randomized quantity.
struct RandomizationRanges {
  static constexpr std::pair<double, double> friction{0.5, 1.25};
  static constexpr std::pair<double, double> restitution{0.0, 0.8};
  static constexpr std::pair<double, double> link_mass_scale{0.9, 1.1};
  static constexpr std::pair<double, double> payload_mass{-1.0, 2.0};
  static constexpr std::pair<double, double> com_offset{-0.05, 0.05};
  static constexpr std::pair<double, double> motor_strength_scale{0.9, 1.1};
  static constexpr std::pair<double, double> kp_scale{0.9, 1.1};
  static constexpr std::pair<double, double> kd_scale{0.9, 1.1};
  static constexpr std::pair<double, double> init_joint_scale{0.5, 1.5};
  static constexpr std::pair<double, double> system_delay_ms{0.0, 40.0};
  static constexpr std::pair<double, double> external_force{-30.0, 30.0};
  static constexpr std::pair<double, double> heightmap_drift{-0.05, 0.05};
};

/// One uniform draw per field; call once per episode.
RandomizedParams domain_randomize(Rng& rng);

enum class RolloutStatus { completed, base_contact, fell, out_of_bounds, policy_error };

std::string rollout_status_name(RolloutStatus status);
RolloutStatus parse_rollout_status(const std::string& name);

struct StepRecord {
  double t = 0;
  Eigen::Vector3d base_position{0, 0, 0};
  double yaw = 0;
  Eigen::Vector3d lin_vel{0, 0, 0};  // base frame
  Eigen::Vector3d ang_vel{0, 0, 0};
  JointVector q = JointVector::Zero();
  JointVector qd = JointVector::Zero();
  JointVector action = JointVector::Zero();
  JointVector torque = JointVector::Zero();
  FootVectors foot_positions = zero_foot_vectors();
  FootVectors foot_forces = zero_foot_vectors();
  std::array<bool, kFootCount> foot_contact{};
  std::array<bool, kFootCount> foot_over_void{};
  bool base_contact = false;
  std::array<double, RewardBreakdown::kTermCount> reward_terms{};
  double reward_total = 0;
};

struct TrajectoryMeta {
  TerrainSpec terrain;
  CommandSample command;
  double dt = 0.02;
  double duration = 20.0;
  std::uint64_t episode_seed = 0;
  std::string policy = "scripted:trot";
  RolloutStatus status = RolloutStatus::completed;
};

/// Line-delimited text records, one step per line, schema-versioned:
///   LKLOG v1
///   meta kind=... level=... terrain_seed=... extent=x,y platform=...
///        episode_seed=... dt=... duration=... cmd=vx,vy,w policy=... status=...
///   step t=... base=x,y,z yaw=... v=... w=... q=... qd=... a=... tau=...
///        feet=x,y,z;... forces=... contact=1,1,0,0 void=0,0,0,0
///        base_contact=0 r_total=... r_terms=...
struct TrajectoryLog {
  TrajectoryMeta meta;
  std::vector<StepRecord> steps;

  void validate() const;  // invariants: dt > 0, timestamps on the dt grid

  void save(std::ostream& out) const;
  void save(const std::string& path) const;
  static TrajectoryLog ingest(std::istream& in, const std::string& origin = "<log>");
  static TrajectoryLog ingest(const std::string& path);
};

}  // namespace locokernel
