#include "locokernel/eval_types.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace locokernel {

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

template <typename Derived>
std::string csv(const Eigen::MatrixBase<Derived>& v) {
  std::string out;
  for (int i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += fmt(v(i));
  }
  return out;
}

std::string csv_bools(const std::array<bool, kFootCount>& v) {
  std::string out;
  for (int i = 0; i < kFootCount; ++i) {
    if (i) out += ',';
    out += v[i] ? '1' : '0';
  }
  return out;
}

std::string feet_csv(const std::array<Eigen::Vector3d, kFootCount>& feet) {
  std::string out;
  for (int i = 0; i < kFootCount; ++i) {
    if (i) out += ';';
    out += csv(feet[i]);
  }
  return out;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    const auto next = s.find(sep, pos);
    if (next == std::string::npos) {
      out.push_back(s.substr(pos));
      return out;
    }
    out.push_back(s.substr(pos, next - pos));
    pos = next + 1;
  }
}

struct LineContext {
  const std::string& origin;
  int line_no;

  [[noreturn]] void fail(const std::string& what) const {
    throw std::runtime_error(origin + ":" + std::to_string(line_no) + ": " + what);
  }
};

double parse_double(const std::string& tok, const LineContext& ctx) {
  try {
    std::size_t used = 0;
    const double v = std::stod(tok, &used);
    if (used != tok.size()) ctx.fail("trailing characters in number `" + tok + "`");
    return v;
  } catch (const std::runtime_error&) {
    throw;
  } catch (const std::exception&) {
    ctx.fail("bad number `" + tok + "`");
  }
}

std::uint64_t parse_u64(const std::string& tok, const LineContext& ctx) {
  try {
    return std::stoull(tok);
  } catch (const std::exception&) {
    ctx.fail("bad integer `" + tok + "`");
  }
}

template <int N>
Eigen::Matrix<double, N, 1> parse_fixed(const std::string& tok, const LineContext& ctx) {
  const auto parts = split(tok, ',');
  if (static_cast<int>(parts.size()) != N)
    ctx.fail("expected " + std::to_string(N) + " comma-separated values");
  Eigen::Matrix<double, N, 1> v;
  for (int i = 0; i < N; ++i) v(i) = parse_double(parts[i], ctx);
  return v;
}

std::array<Eigen::Vector3d, kFootCount> parse_feet(const std::string& tok, const LineContext& ctx) {
  const auto groups = split(tok, ';');
  if (groups.size() != kFootCount) ctx.fail("expected 4 semicolon-separated foot vectors");
  std::array<Eigen::Vector3d, kFootCount> feet;
  for (int i = 0; i < kFootCount; ++i) feet[i] = parse_fixed<3>(groups[i], ctx);
  return feet;
}

std::array<bool, kFootCount> parse_bools(const std::string& tok, const LineContext& ctx) {
  const auto parts = split(tok, ',');
  if (parts.size() != kFootCount) ctx.fail("expected 4 comma-separated flags");
  std::array<bool, kFootCount> v{};
  for (int i = 0; i < kFootCount; ++i) {
    if (parts[i] != "0" && parts[i] != "1") ctx.fail("flag must be 0 or 1");
    v[i] = parts[i] == "1";
  }
  return v;
}

}  // namespace

RandomizedParams domain_randomize(Rng& rng) {
  auto draw = [&rng](std::pair<double, double> range) {
    return rng.uniform(range.first, range.second);
  };
  auto draw3 = [&draw](std::pair<double, double> range) {
    return Eigen::Vector3d(draw(range), draw(range), draw(range));
  };
  RandomizedParams p;
  p.friction = draw(RandomizationRanges::friction);
  p.restitution = draw(RandomizationRanges::restitution);
  p.link_mass_scale = draw(RandomizationRanges::link_mass_scale);
  p.payload_mass = draw(RandomizationRanges::payload_mass);
  p.com_offset = draw3(RandomizationRanges::com_offset);
  p.motor_strength_scale = draw(RandomizationRanges::motor_strength_scale);
  p.kp_scale = draw(RandomizationRanges::kp_scale);
  p.kd_scale = draw(RandomizationRanges::kd_scale);
  p.init_joint_scale = draw(RandomizationRanges::init_joint_scale);
  p.system_delay_ms = draw(RandomizationRanges::system_delay_ms);
  p.external_force = draw3(RandomizationRanges::external_force);
  p.heightmap_drift = draw3(RandomizationRanges::heightmap_drift);
  return p;
}

std::string rollout_status_name(RolloutStatus status) {
  switch (status) {
    case RolloutStatus::completed: return "completed";
    case RolloutStatus::base_contact: return "base_contact";
    case RolloutStatus::fell: return "fell";
    case RolloutStatus::out_of_bounds: return "out_of_bounds";
    case RolloutStatus::policy_error: return "policy_error";
  }
  return "unknown";
}

RolloutStatus parse_rollout_status(const std::string& name) {
  for (const RolloutStatus s : {RolloutStatus::completed, RolloutStatus::base_contact,
                                RolloutStatus::fell, RolloutStatus::out_of_bounds,
                                RolloutStatus::policy_error}) {
    if (rollout_status_name(s) == name) return s;
  }
  throw std::runtime_error("unknown rollout status: " + name);
}

void TrajectoryLog::validate() const {
  if (!(meta.dt > 0)) throw std::runtime_error("trajectory meta field dt must be positive");
  if (!(meta.duration > 0)) throw std::runtime_error("trajectory meta field duration must be positive");
  if (meta.terrain.level < 0 || meta.terrain.level > 9)
    throw std::runtime_error("trajectory meta field level out of range");
  for (std::size_t k = 0; k < steps.size(); ++k) {
    const double expected = steps.front().t + static_cast<double>(k) * meta.dt;
    if (std::abs(steps[k].t - expected) > 1e-9)
      throw std::runtime_error("trajectory timestamps must increase by dt (step " +
                               std::to_string(k) + ")");
  }
}

void TrajectoryLog::save(std::ostream& out) const {
  out << "LKLOG v1\n";
  out << "meta kind=" << meta.terrain.name() << " level=" << meta.terrain.level
      << " terrain_seed=" << meta.terrain.seed << " extent=" << fmt(meta.terrain.extent.x()) << ','
      << fmt(meta.terrain.extent.y()) << " platform=" << fmt(meta.terrain.platform_margin)
      << " episode_seed=" << meta.episode_seed << " dt=" << fmt(meta.dt)
      << " duration=" << fmt(meta.duration) << " cmd=" << fmt(meta.command.v_global.x()) << ','
      << fmt(meta.command.v_global.y()) << ',' << fmt(meta.command.omega)
      << " policy=" << meta.policy << " status=" << rollout_status_name(meta.status) << '\n';
  for (const StepRecord& s : steps) {
    out << "step t=" << fmt(s.t) << " base=" << csv(s.base_position) << " yaw=" << fmt(s.yaw)
        << " v=" << csv(s.lin_vel) << " w=" << csv(s.ang_vel) << " q=" << csv(s.q)
        << " qd=" << csv(s.qd) << " a=" << csv(s.action) << " tau=" << csv(s.torque)
        << " feet=" << feet_csv(s.foot_positions) << " forces=" << feet_csv(s.foot_forces)
        << " contact=" << csv_bools(s.foot_contact) << " void=" << csv_bools(s.foot_over_void)
        << " base_contact=" << (s.base_contact ? '1' : '0') << " r_total=" << fmt(s.reward_total)
        << " r_terms=";
    for (int i = 0; i < RewardBreakdown::kTermCount; ++i) {
      if (i) out << ',';
      out << fmt(s.reward_terms[i]);
    }
    out << '\n';
  }
}

void TrajectoryLog::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open log file for writing: " + path);
  save(out);
  if (!out) throw std::runtime_error("error writing log file: " + path);
}

TrajectoryLog TrajectoryLog::ingest(std::istream& in, const std::string& origin) {
  TrajectoryLog log;
  std::string line;
  int line_no = 0;

  if (!std::getline(in, line)) throw std::runtime_error(origin + ":1: empty log file");
  ++line_no;
  if (line != "LKLOG v1")
    throw std::runtime_error(origin + ":1: expected `LKLOG v1` header, got `" + line + "`");

  bool have_meta = false;
  while (std::getline(in, line)) {
    ++line_no;
    const LineContext ctx{origin, line_no};
    if (line.empty()) continue;
    auto tokens = split(line, ' ');
    const std::string& tag = tokens.front();
    auto fields = [&](auto&& fn) {
      for (std::size_t i = 1; i < tokens.size(); ++i) {
        if (tokens[i].empty()) continue;
        const auto eq = tokens[i].find('=');
        if (eq == std::string::npos) ctx.fail("expected key=value, got `" + tokens[i] + "`");
        fn(tokens[i].substr(0, eq), tokens[i].substr(eq + 1));
      }
    };
    if (tag == "meta") {
      have_meta = true;
      fields([&](const std::string& key, const std::string& value) {
        if (key == "kind") {
          const TerrainSpec parsed = parse_terrain_spec_name(value);
          log.meta.terrain.kind = parsed.kind;
          log.meta.terrain.combo_a = parsed.combo_a;
          log.meta.terrain.combo_b = parsed.combo_b;
        } else if (key == "level") {
          log.meta.terrain.level = static_cast<int>(parse_double(value, ctx));
        } else if (key == "terrain_seed") {
          log.meta.terrain.seed = parse_u64(value, ctx);
        } else if (key == "extent") {
          log.meta.terrain.extent = parse_fixed<2>(value, ctx);
        } else if (key == "platform") {
          log.meta.terrain.platform_margin = parse_double(value, ctx);
        } else if (key == "episode_seed") {
          log.meta.episode_seed = parse_u64(value, ctx);
        } else if (key == "dt") {
          log.meta.dt = parse_double(value, ctx);
        } else if (key == "duration") {
          log.meta.duration = parse_double(value, ctx);
        } else if (key == "cmd") {
          const Eigen::Vector3d c = parse_fixed<3>(value, ctx);
          log.meta.command.v_global = c.head<2>();
          log.meta.command.omega = c.z();
        } else if (key == "policy") {
          log.meta.policy = value;
        } else if (key == "status") {
          try {
            log.meta.status = parse_rollout_status(value);
          } catch (const std::exception& e) {
            ctx.fail(e.what());
          }
        } else {
          ctx.fail("unknown meta field `" + key + "`");
        }
      });
    } else if (tag == "step") {
      if (!have_meta) ctx.fail("step record before meta line");
      StepRecord s;
      fields([&](const std::string& key, const std::string& value) {
        if (key == "t") s.t = parse_double(value, ctx);
        else if (key == "base") s.base_position = parse_fixed<3>(value, ctx);
        else if (key == "yaw") s.yaw = parse_double(value, ctx);
        else if (key == "v") s.lin_vel = parse_fixed<3>(value, ctx);
        else if (key == "w") s.ang_vel = parse_fixed<3>(value, ctx);
        else if (key == "q") s.q = parse_fixed<kJointCount>(value, ctx);
        else if (key == "qd") s.qd = parse_fixed<kJointCount>(value, ctx);
        else if (key == "a") s.action = parse_fixed<kJointCount>(value, ctx);
        else if (key == "tau") s.torque = parse_fixed<kJointCount>(value, ctx);
        else if (key == "feet") s.foot_positions = parse_feet(value, ctx);
        else if (key == "forces") s.foot_forces = parse_feet(value, ctx);
        else if (key == "contact") s.foot_contact = parse_bools(value, ctx);
        else if (key == "void") s.foot_over_void = parse_bools(value, ctx);
        else if (key == "base_contact") s.base_contact = value == "1";
        else if (key == "r_total") s.reward_total = parse_double(value, ctx);
        else if (key == "r_terms") {
          const auto parts = split(value, ',');
          if (parts.size() != RewardBreakdown::kTermCount)
            ctx.fail("expected 12 reward terms");
          for (int i = 0; i < RewardBreakdown::kTermCount; ++i)
            s.reward_terms[i] = parse_double(parts[i], ctx);
        } else {
          ctx.fail("unknown step field `" + key + "`");
        }
      });
      log.steps.push_back(std::move(s));
    } else {
      ctx.fail("unknown record tag `" + tag + "`");
    }
  }
  if (!have_meta) throw std::runtime_error(origin + ": log has no meta line");
  log.validate();
  return log;
}

TrajectoryLog TrajectoryLog::ingest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open log file: " + path);
  return ingest(in, path);
}

}  // namespace locokernel
