#pragma once

#include <iosfwd>
#include <string>

#include "locokernel/command.hpp"
#include "locokernel/observation.hpp"
#include "locokernel/rewards.hpp"
#include "locokernel/stability.hpp"
#include "locokernel/terrain.hpp"

namespace locokernel {

/// Every tunable default in one place, loadable from a `key = value` text
/// file (# starts a comment). `save` emits the full schema with its
/// defaults, which doubles as the format documentation.
struct KernelConfig {
  TerrainTuning terrain;
  double terrain_extent_x = 8.0;
  double terrain_extent_y = 8.0;
  double platform_margin = 1.0;

  double deep_void = -1.0;        // relative height reported for void cells
  double drift_magnitude = 0.05;  // per-episode heightmap drift bound
  FootmapParams footmap;

  int encoder_heads = 4;

  StabilityKind stability_kind = StabilityKind::cop;
  double outside_penalty = -1.0;
  double gravity = 9.81;

  RewardWeights weights;
  double target_height = 0.35;

  double action_scale = 0.25;
  PdGains gains;
  LegGeometry geometry;
  double default_abduction = 0.0;
  double default_hip = 0.8;
  double default_knee = -1.6;

  double dt = 0.02;             // control step, s
  double base_clearance = 0.10; // base-contact threshold above terrain
  double robot_mass = 12.0;     // used to synthesize contact forces
  double joint_time_constant = 0.05;
  double trot_frequency = 2.0;      // scripted gait, Hz
  double trot_swing_height = 0.09;  // scripted gait foot lift, m

  JointVector q_default() const;
  StabilityOptions stability_options() const;
  TerrainSpec terrain_spec(TerrainKind kind, int level, std::uint64_t seed) const;

  static KernelConfig load(const std::string& path);
  static KernelConfig parse(std::istream& in, const std::string& origin = "<config>");
  void save(std::ostream& out) const;
  void save(const std::string& path) const;
};

}  // namespace locokernel
