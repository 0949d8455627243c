#include "locokernel/config.hpp"

#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <variant>
#include <vector>

namespace locokernel {

namespace {

struct Entry {
  std::string key;
  std::variant<double*, int*, StabilityKind*> target;
};

std::vector<Entry> bindings(KernelConfig& c) {
  std::vector<Entry> e;
  auto add = [&e](const char* key, auto* ptr) { e.push_back({key, ptr}); };

  add("terrain.resolution", &c.terrain.resolution);
  add("terrain.extent_x", &c.terrain_extent_x);
  add("terrain.extent_y", &c.terrain_extent_y);
  add("terrain.platform_margin", &c.platform_margin);
  add("terrain.rough_amp_level0", &c.terrain.rough_amp_level0);
  add("terrain.rough_amp_level9", &c.terrain.rough_amp_level9);
  add("terrain.rough_cell", &c.terrain.rough_cell);
  add("terrain.discrete_blocks", &c.terrain.discrete_blocks);
  add("terrain.discrete_height_level0", &c.terrain.discrete_height_level0);
  add("terrain.discrete_height_level9", &c.terrain.discrete_height_level9);
  add("terrain.discrete_size_min", &c.terrain.discrete_size_min);
  add("terrain.discrete_size_max", &c.terrain.discrete_size_max);
  add("terrain.stair_rise_level0", &c.terrain.stair_rise_level0);
  add("terrain.stair_rise_level9", &c.terrain.stair_rise_level9);
  add("terrain.stair_run", &c.terrain.stair_run);
  add("terrain.beam_width_level0", &c.terrain.beam_width_level0);
  add("terrain.beam_width_level9", &c.terrain.beam_width_level9);
  add("terrain.beam_gap_level0", &c.terrain.beam_gap_level0);
  add("terrain.beam_gap_level9", &c.terrain.beam_gap_level9);
  add("terrain.pallet_size", &c.terrain.pallet_size);
  add("terrain.pallet_gap_level0", &c.terrain.pallet_gap_level0);
  add("terrain.pallet_gap_level9", &c.terrain.pallet_gap_level9);
  add("terrain.pallet_height_level0", &c.terrain.pallet_height_level0);
  add("terrain.pallet_height_level9", &c.terrain.pallet_height_level9);
  add("terrain.circle_radius_level0", &c.terrain.circle_radius_level0);
  add("terrain.circle_radius_level9", &c.terrain.circle_radius_level9);
  add("terrain.circle_gap_level0", &c.terrain.circle_gap_level0);
  add("terrain.circle_gap_level9", &c.terrain.circle_gap_level9);
  add("terrain.small_stone_size_level0", &c.terrain.small_stone_size_level0);
  add("terrain.small_stone_size_level9", &c.terrain.small_stone_size_level9);
  add("terrain.small_stone_gap_level0", &c.terrain.small_stone_gap_level0);
  add("terrain.small_stone_gap_level9", &c.terrain.small_stone_gap_level9);
  add("terrain.small_stone_height_level9", &c.terrain.small_stone_height_level9);
  add("terrain.pit_count", &c.terrain.pit_count);
  add("terrain.pit_size_level0", &c.terrain.pit_size_level0);
  add("terrain.pit_size_level9", &c.terrain.pit_size_level9);
  add("terrain.gap_width_per_level", &c.terrain.gap_width_per_level);
  add("terrain.gap_spacing", &c.terrain.gap_spacing);

  add("observation.deep_void", &c.deep_void);
  add("observation.drift_magnitude", &c.drift_magnitude);
  add("observation.footmap_weight", &c.footmap.weight);
  add("observation.footmap_sigma", &c.footmap.sigma);

  add("encoder.heads", &c.encoder_heads);

  add("stability.kind", &c.stability_kind);
  add("stability.outside_penalty", &c.outside_penalty);
  add("stability.gravity", &c.gravity);

  add("rewards.lin_vel_track", &c.weights.lin_vel_track);
  add("rewards.ang_vel_track", &c.weights.ang_vel_track);
  add("rewards.z_vel", &c.weights.z_vel);
  add("rewards.ang_vel", &c.weights.ang_vel);
  add("rewards.torque", &c.weights.torque);
  add("rewards.joint_accel", &c.weights.joint_accel);
  add("rewards.base_height", &c.weights.base_height);
  add("rewards.action_rate", &c.weights.action_rate);
  add("rewards.collisions", &c.weights.collisions);
  add("rewards.stumble", &c.weights.stumble);
  add("rewards.joint_error", &c.weights.joint_error);
  add("rewards.stability", &c.weights.stability);
  add("rewards.target_height", &c.target_height);

  add("control.action_scale", &c.action_scale);
  add("control.kp", &c.gains.kp);
  add("control.kd", &c.gains.kd);
  add("control.torque_limit", &c.gains.torque_limit);
  add("control.default_abduction", &c.default_abduction);
  add("control.default_hip", &c.default_hip);
  add("control.default_knee", &c.default_knee);

  add("geometry.abduction_offset", &c.geometry.abduction_offset);
  add("geometry.thigh_length", &c.geometry.thigh_length);
  add("geometry.calf_length", &c.geometry.calf_length);

  add("eval.dt", &c.dt);
  add("eval.base_clearance", &c.base_clearance);
  add("eval.robot_mass", &c.robot_mass);
  add("eval.joint_time_constant", &c.joint_time_constant);
  add("eval.trot_frequency", &c.trot_frequency);
  add("eval.trot_swing_height", &c.trot_swing_height);
  return e;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

JointVector KernelConfig::q_default() const {
  JointVector q;
  for (int leg = 0; leg < kFootCount; ++leg) {
    q(3 * leg + 0) = default_abduction;
    q(3 * leg + 1) = default_hip;
    q(3 * leg + 2) = default_knee;
  }
  return q;
}

StabilityOptions KernelConfig::stability_options() const {
  StabilityOptions o;
  o.outside_penalty = outside_penalty;
  o.gravity = gravity;
  return o;
}

TerrainSpec KernelConfig::terrain_spec(TerrainKind kind, int level, std::uint64_t seed) const {
  TerrainSpec spec;
  spec.kind = kind;
  spec.level = level;
  spec.seed = seed;
  spec.extent = {terrain_extent_x, terrain_extent_y};
  spec.platform_margin = platform_margin;
  return spec;
}

KernelConfig KernelConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  return parse(in, path);
}

KernelConfig KernelConfig::parse(std::istream& in, const std::string& origin) {
  KernelConfig cfg;
  auto entries = bindings(cfg);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      if (line.find_first_not_of(" \t\r") != std::string::npos)
        throw std::runtime_error(origin + ":" + std::to_string(line_no) + ": expected key = value");
      continue;
    }
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    bool found = false;
    for (auto& entry : entries) {
      if (entry.key != key) continue;
      found = true;
      try {
        if (auto** d = std::get_if<double*>(&entry.target)) {
          **d = std::stod(value);
        } else if (auto** i = std::get_if<int*>(&entry.target)) {
          **i = std::stoi(value);
        } else {
          *std::get<StabilityKind*>(entry.target) = parse_stability_kind(value);
        }
      } catch (const std::exception&) {
        throw std::runtime_error(origin + ":" + std::to_string(line_no) + ": bad value for " + key);
      }
      break;
    }
    if (!found)
      throw std::runtime_error(origin + ":" + std::to_string(line_no) + ": unknown key " + key);
  }
  return cfg;
}

void KernelConfig::save(std::ostream& out) const {
  out << "# locokernel configuration (key = value, # starts a comment)\n";
  auto entries = bindings(const_cast<KernelConfig&>(*this));
  std::string section;
  for (const auto& entry : entries) {
    const std::string prefix = entry.key.substr(0, entry.key.find('.'));
    if (prefix != section) {
      section = prefix;
      out << '\n';
    }
    out << entry.key << " = ";
    if (auto* const* d = std::get_if<double*>(&entry.target)) {
      out << format_double(**d);
    } else if (auto* const* i = std::get_if<int*>(&entry.target)) {
      out << **i;
    } else {
      out << stability_kind_name(*std::get<StabilityKind*>(entry.target));
    }
    out << '\n';
  }
}

void KernelConfig::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open config file for writing: " + path);
  save(out);
}

}  // namespace locokernel
