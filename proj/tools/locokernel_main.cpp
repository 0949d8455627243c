// locokernel command line: terrain generation, observation building, encoder
// forward passes, stability margins, reward inspection, forward kinematics
// and the rollout evaluation protocol.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "locokernel/config.hpp"
#include "locokernel/encoder.hpp"
#include "locokernel/eval.hpp"
#include "locokernel/frame_io.hpp"

namespace fs = std::filesystem;
using namespace locokernel;

namespace {

std::vector<double> parse_numbers(const std::string& text, char sep = ',') {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, sep)) {
    if (tok.empty()) continue;
    out.push_back(std::stod(tok));
  }
  return out;
}

std::vector<double> parse_numbers_exact(const std::string& text, std::size_t n, const char* what,
                                        char sep = ',') {
  auto v = parse_numbers(text, sep);
  if (v.size() != n)
    throw std::runtime_error(std::string(what) + ": expected " + std::to_string(n) +
                             " values, got " + std::to_string(v.size()));
  return v;
}

std::vector<int> parse_levels(const std::string& text) {
  const auto range = text.find("..");
  if (range != std::string::npos) {
    const int lo = std::stoi(text.substr(0, range));
    const int hi = std::stoi(text.substr(range + 2));
    if (lo > hi) throw std::runtime_error("levels range is reversed: " + text);
    std::vector<int> out;
    for (int l = lo; l <= hi; ++l) out.push_back(l);
    return out;
  }
  std::vector<int> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (!tok.empty()) out.push_back(std::stoi(tok));
  }
  return out;
}

std::vector<std::string> split_csv(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (!tok.empty()) out.push_back(tok);
  }
  return out;
}

SuccessCriteria::Mode parse_criteria_mode(const std::string& name) {
  if (name == "fixed" || name == "fixed_distance") return SuccessCriteria::Mode::fixed_distance;
  if (name == "half" || name == "half_expected") return SuccessCriteria::Mode::half_expected;
  throw std::runtime_error("unknown criteria mode: " + name);
}

struct ContactFile {
  std::vector<Eigen::Vector3d> positions;
  std::vector<Eigen::Vector3d> forces;
};

// one contact per line: x y z fx fy fz (# starts a comment)
ContactFile load_contacts(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open contacts file: " + path);
  ContactFile cf;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::stringstream ss(line);
    double x, y, z, fx, fy, fz;
    if (ss >> x >> y >> z >> fx >> fy >> fz) {
      cf.positions.emplace_back(x, y, z);
      cf.forces.emplace_back(fx, fy, fz);
    } else if (line.find_first_not_of(" \t\r") != std::string::npos) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": expected `x y z fx fy fz`");
    }
  }
  return cf;
}

int run_terrain(const KernelConfig& cfg, const std::string& kind, int level, std::uint64_t seed,
                const std::string& extent, double platform, const std::string& out_path) {
  TerrainSpec spec = parse_terrain_spec_name(kind);
  spec.level = level;
  spec.seed = seed;
  spec.extent = {cfg.terrain_extent_x, cfg.terrain_extent_y};
  spec.platform_margin = platform >= 0 ? platform : cfg.platform_margin;
  if (!extent.empty()) {
    const auto v = parse_numbers_exact(extent, 2, "--extent");
    spec.extent = {v[0], v[1]};
  }
  const Heightfield hf = generate_terrain(spec, cfg.terrain);
  hf.save(out_path);
  std::cout << "wrote " << out_path << " (" << hf.rows() << "x" << hf.cols() << " cells at "
            << hf.resolution() << " m)\n";
  return 0;
}

int run_obs(const KernelConfig& cfg, const std::string& field, const std::string& pose,
            const std::string& feet, const std::string& command, const std::string& drift,
            const std::string& out_path) {
  const Heightfield hf = Heightfield::load(field);
  RobotState state;
  const auto p = parse_numbers_exact(pose, 4, "--pose");
  state.base_position = {p[0], p[1], p[2]};
  state.base_yaw = p[3];
  state.joint_pos = cfg.q_default();
  const auto foot_specs = split_csv(feet);
  if (foot_specs.size() != kFootCount)
    throw std::runtime_error("--feet: expected 4 comma-separated x:y:z triples (FR,FL,RR,RL)");
  for (int k = 0; k < kFootCount; ++k) {
    const auto v = parse_numbers_exact(foot_specs[k], 3, "--feet", ':');
    state.foot_positions[k] = {v[0], v[1], v[2]};
  }
  Eigen::Vector3d cmd{0, 0, 0};
  if (!command.empty()) {
    const auto v = parse_numbers_exact(command, 3, "--command");
    cmd = {v[0], v[1], v[2]};
  }
  SampleOptions options;
  options.deep_void = cfg.deep_void;
  if (!drift.empty()) {
    const auto v = parse_numbers_exact(drift, 3, "--drift");
    options.drift = {v[0], v[1], v[2]};
  }
  const ObservationFrame frame =
      build_frame(hf, state, cmd, JointVector::Zero(), options, cfg.footmap);
  save_frame(frame, out_path);
  std::cout << "wrote " << out_path << '\n';
  return 0;
}

int run_encode(const KernelConfig& cfg, const std::string& frame_path, const std::string& params_path,
               std::uint64_t seed, bool dump_attention) {
  const ObservationFrame frame = load_frame(frame_path);
  const EncoderParams params = params_path.empty()
                                   ? EncoderParams::seeded(seed, cfg.encoder_heads)
                                   : EncoderParams::load(params_path);
  const EncodeResult result = encode(frame, params);
  std::cout << "z:";
  for (int i = 0; i < result.z.size(); ++i) std::printf(" %.9g", result.z(i));
  std::cout << '\n';
  if (dump_attention) {
    for (int h = 0; h < result.attention.weights.rows(); ++h) {
      std::cout << "head " << h << ":";
      for (int t = 0; t < result.attention.weights.cols(); ++t)
        std::printf(" %.9g", result.attention.weights(h, t));
      std::cout << '\n';
    }
  }
  return 0;
}

int run_stability(const KernelConfig& cfg, const std::string& contacts_path,
                  const std::string& point, const std::string& kind_name,
                  const std::string& base, const std::string& vel, double yaw, double ground) {
  const ContactFile cf = load_contacts(contacts_path);
  std::vector<Eigen::Vector2d> xy;
  xy.reserve(cf.positions.size());
  for (const auto& p : cf.positions) xy.push_back(p.head<2>());
  const auto polygon = support_polygon(xy);
  if (!polygon) {
    std::cout << "degenerate\n";
    return 2;
  }
  const StabilityKind kind = parse_stability_kind(kind_name);
  Eigen::Vector2d ref;
  if (!point.empty()) {
    const auto v = parse_numbers_exact(point, 2, "--point");
    ref = {v[0], v[1]};
  } else if (kind == StabilityKind::cop) {
    const auto cop = center_of_pressure(cf.positions, cf.forces);
    if (!cop) {
      std::cout << "no-cop\n";
      return 2;
    }
    ref = *cop;
  } else {
    if (base.empty()) throw std::runtime_error("--base x,y,z is required for com/cp kinds");
    const auto b = parse_numbers_exact(base, 3, "--base");
    if (kind == StabilityKind::com) {
      ref = {b[0], b[1]};
    } else {
      RobotState state;
      state.base_position = {b[0], b[1], b[2]};
      state.base_yaw = yaw;
      if (!vel.empty()) {
        const auto v = parse_numbers_exact(vel, 2, "--vel");
        state.lin_vel = {v[0], v[1], 0};
      }
      ref = capture_point(state, cfg.gravity, ground);
    }
  }
  std::printf("%.12g\n", point_polygon_margin(ref, *polygon));
  return 0;
}

int run_reward(const std::string& log_path, bool breakdown) {
  const TrajectoryLog log = TrajectoryLog::ingest(log_path);
  if (log.steps.empty()) throw std::runtime_error("log has no steps");
  double total = 0;
  std::array<double, RewardBreakdown::kTermCount> means{};
  for (const auto& s : log.steps) {
    total += s.reward_total;
    for (int i = 0; i < RewardBreakdown::kTermCount; ++i) means[i] += s.reward_terms[i];
  }
  const double n = static_cast<double>(log.steps.size());
  std::printf("steps %zu\nmean_total %.9g\n", log.steps.size(), total / n);
  if (breakdown) {
    const auto& names = RewardBreakdown::term_names();
    for (int i = 0; i < RewardBreakdown::kTermCount; ++i)
      std::printf("%-16s %.9g\n", names[i], means[i] / n);
  }
  return 0;
}

int run_fk(const KernelConfig& cfg, const std::string& q_text) {
  std::string normalized = q_text;
  std::replace(normalized.begin(), normalized.end(), ' ', ',');
  const auto v = parse_numbers(normalized);
  if (v.size() != kJointCount) throw std::runtime_error("--q: expected 12 joint angles");
  JointVector q;
  for (int i = 0; i < kJointCount; ++i) q(i) = v[i];
  const auto feet = forward_kinematics_all(q, cfg.geometry);
  static constexpr const char* names[] = {"FR", "FL", "RR", "RL"};
  for (int k = 0; k < kFootCount; ++k)
    std::printf("%s %.9g %.9g %.9g\n", names[k], feet[k].x(), feet[k].y(), feet[k].z());
  return 0;
}

int run_params(const KernelConfig& cfg, std::uint64_t seed, const std::string& out_path) {
  EncoderParams::seeded(seed, cfg.encoder_heads).save(out_path);
  std::cout << "wrote " << out_path << '\n';
  return 0;
}

int run_config(const KernelConfig& cfg, const std::string& out_path) {
  if (out_path.empty()) {
    cfg.save(std::cout);
  } else {
    cfg.save(out_path);
    std::cout << "wrote " << out_path << '\n';
  }
  return 0;
}

int run_eval(const KernelConfig& cfg, const std::string& ingest_path, const std::string& terrains,
             const std::string& levels_text, int n, const std::string& policy_name, double speed,
             bool sweep, double duration, std::uint64_t seed, const std::string& criteria_name,
             bool randomize, const std::string& out_path, const std::string& log_dir) {
  SuccessCriteria criteria;
  criteria.mode = parse_criteria_mode(criteria_name);

  std::vector<LogSummary> summaries;

  if (!ingest_path.empty()) {
    std::vector<fs::path> files;
    if (fs::is_directory(ingest_path)) {
      for (const auto& entry : fs::directory_iterator(ingest_path))
        if (entry.is_regular_file() && entry.path().extension() == ".log")
          files.push_back(entry.path());
      std::sort(files.begin(), files.end());
    } else {
      files.emplace_back(ingest_path);
    }
    if (files.empty()) throw std::runtime_error("no .log files under " + ingest_path);
    for (const auto& file : files)
      summaries.push_back(summarize(TrajectoryLog::ingest(file.string()), criteria));
  } else {
    const auto kinds = split_csv(terrains);
    const auto levels = parse_levels(levels_text);
    if (kinds.empty() || levels.empty()) throw std::runtime_error("no terrains or levels selected");
    std::vector<double> speeds;
    if (sweep) {
      for (int i = 1; i <= 10; ++i) speeds.push_back(0.1 * i);
    } else {
      speeds.push_back(speed);
    }
    const double max_speed = *std::max_element(speeds.begin(), speeds.end());

    for (std::size_t ki = 0; ki < kinds.size(); ++ki) {
      for (const int level : levels) {
        TerrainSpec spec = parse_terrain_spec_name(kinds[ki]);
        spec.level = level;
        spec.seed = Rng::mix(seed, ki + 1, static_cast<std::uint64_t>(level));
        spec.platform_margin = cfg.platform_margin;
        // size the tile so a full-duration run stays inside the escape margin
        const double needed = 2.0 * (max_speed * duration + cfg.platform_margin + 3.0);
        spec.extent = {std::max(cfg.terrain_extent_x, needed), cfg.terrain_extent_y};
        const Heightfield hf = generate_terrain(spec, cfg.terrain);

        for (std::size_t si = 0; si < speeds.size(); ++si) {
          for (int i = 0; i < n; ++i) {
            RolloutRequest request;
            request.terrain = spec;
            request.command.v_global = {speeds[si], 0.0};
            request.command.omega = 0.0;
            request.duration = duration;
            request.seed = Rng::mix(seed, Rng::mix(ki + 1, level + 1, si + 1),
                                    static_cast<std::uint64_t>(i));
            request.policy_name = policy_name;
            request.randomize = randomize;
            const Policy policy = make_scripted_policy(policy_name, cfg);
            const TrajectoryLog log = run_rollout(hf, request, policy, cfg);
            if (!log_dir.empty()) {
              fs::create_directories(log_dir);
              char name[128];
              std::snprintf(name, sizeof(name), "%s_l%d_v%.1f_%03d.log",
                            spec.name().c_str(), level, speeds[si], i);
              log.save((fs::path(log_dir) / name).string());
            }
            summaries.push_back(summarize(log, criteria));
          }
        }
      }
    }
  }

  const MetricsTable table = aggregate(summaries);
  if (out_path.empty()) {
    write_metrics_tsv(table, std::cout);
  } else {
    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("cannot open results file for writing: " + out_path);
    write_metrics_tsv(table, out);
    std::cout << "wrote " << out_path << " (" << table.rows.size() << " groups, "
              << summaries.size() << " rollouts)\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"deterministic quadruped locomotion kernel and evaluation harness"};
  app.require_subcommand(1);

  std::string config_path;
  app.add_option("--config", config_path, "key = value config file");

  // terrain
  auto* terrain = app.add_subcommand("terrain", "generate a heightfield file");
  std::string t_kind = "smooth", t_extent, t_out = "field.hf";
  int t_level = 0;
  std::uint64_t t_seed = 0;
  double t_platform = -1;
  terrain->add_option("--kind", t_kind, "terrain kind, e.g. stones or stones+rough");
  terrain->add_option("--level", t_level, "difficulty 0..9")->check(CLI::Range(0, 9));
  terrain->add_option("--seed", t_seed, "generation seed");
  terrain->add_option("--extent", t_extent, "tile size `x,y` in meters");
  terrain->add_option("--platform", t_platform, "flat spawn half-width, m");
  terrain->add_option("--out", t_out, "output .hf path");

  // obs
  auto* obs = app.add_subcommand("obs", "build an observation frame from a heightfield");
  std::string o_field, o_pose, o_feet, o_command, o_drift, o_out = "frame.json";
  obs->add_option("--field", o_field, "heightfield .hf file")->required();
  obs->add_option("--pose", o_pose, "base pose `x,y,z,yaw`")->required();
  obs->add_option("--feet", o_feet, "foot world positions `x:y:z,...` (FR,FL,RR,RL)")->required();
  obs->add_option("--command", o_command, "local command `vx,vy,w`");
  obs->add_option("--drift", o_drift, "heightmap drift `dx,dy,dz`");
  obs->add_option("--out", o_out, "output frame json path");

  // encode
  auto* enc = app.add_subcommand("encode", "run the heightmap encoder forward pass");
  std::string e_frame, e_params;
  std::uint64_t e_seed = 0;
  bool e_dump = false;
  enc->add_option("--frame", e_frame, "frame json file")->required();
  enc->add_option("--params", e_params, "binary parameter file");
  enc->add_option("--seed", e_seed, "seeded parameters when no file is given");
  enc->add_flag("--dump-attention", e_dump, "print per-head attention weights");

  // stability
  auto* stab = app.add_subcommand("stability", "support polygon margin for a contact set");
  std::string s_contacts, s_point, s_kind = "cop", s_base, s_vel;
  double s_yaw = 0, s_ground = 0;
  stab->add_option("--contacts", s_contacts, "file of `x y z fx fy fz` lines")->required();
  stab->add_option("--point", s_point, "evaluate this `x,y` instead of the kind's reference");
  stab->add_option("--kind", s_kind, "cop|com|cp");
  stab->add_option("--base", s_base, "base position `x,y,z` (com/cp)");
  stab->add_option("--vel", s_vel, "base planar velocity `vx,vy` (cp)");
  stab->add_option("--yaw", s_yaw, "base yaw, rad (cp)");
  stab->add_option("--ground", s_ground, "support surface height under the base (cp)");

  // reward
  auto* rew = app.add_subcommand("reward", "per-term reward means over a trajectory log");
  std::string r_log;
  bool r_breakdown = false;
  rew->add_option("--log", r_log, "trajectory .log file")->required();
  rew->add_flag("--breakdown", r_breakdown, "print per-term means");

  // fk
  auto* fk = app.add_subcommand("fk", "forward kinematics for all four feet");
  std::string f_q;
  fk->add_option("--q", f_q, "12 joint angles, comma or space separated")->required();

  // params
  auto* par = app.add_subcommand("params", "write a seeded encoder parameter file");
  std::uint64_t p_seed = 0;
  std::string p_out = "net.bin";
  par->add_option("--seed", p_seed, "init seed");
  par->add_option("--out", p_out, "output path");

  // config
  auto* conf = app.add_subcommand("config", "dump the configuration schema with defaults");
  std::string c_out;
  conf->add_option("--out", c_out, "output path (stdout when omitted)");

  // eval
  auto* ev = app.add_subcommand("eval", "run rollouts (or ingest logs) and tabulate metrics");
  std::string v_ingest, v_terrain = "smooth", v_levels = "0..9", v_policy = "scripted:trot";
  std::string v_criteria = "fixed", v_out, v_log_dir;
  int v_n = 100;
  double v_speed = 1.0, v_duration = 20.0;
  std::uint64_t v_seed = 0;
  bool v_sweep = false, v_randomize = false;
  ev->add_option("--ingest", v_ingest, "directory of .log files (or one file) to evaluate");
  ev->add_option("--terrain", v_terrain, "comma list of kinds, combos allowed");
  ev->add_option("--levels", v_levels, "`a..b` range or comma list");
  ev->add_option("--n", v_n, "rollouts per terrain/level/velocity");
  ev->add_option("--policy", v_policy, "scripted:trot or scripted:stand");
  ev->add_option("--speed", v_speed, "command speed, m/s");
  ev->add_flag("--sweep", v_sweep, "velocity sweep 0.1..1.0 m/s in 0.1 steps");
  ev->add_option("--duration", v_duration, "rollout horizon, s");
  ev->add_option("--seed", v_seed, "base seed");
  ev->add_option("--criteria", v_criteria, "fixed|half success mode");
  ev->add_flag("--randomize", v_randomize, "sample domain randomization per episode");
  ev->add_option("--out", v_out, "results .tsv path (stdout when omitted)");
  ev->add_option("--log-dir", v_log_dir, "also write one .log per rollout here");

  CLI11_PARSE(app, argc, argv);

  try {
    const KernelConfig cfg =
        config_path.empty() ? KernelConfig{} : KernelConfig::load(config_path);
    if (terrain->parsed())
      return run_terrain(cfg, t_kind, t_level, t_seed, t_extent, t_platform, t_out);
    if (obs->parsed()) return run_obs(cfg, o_field, o_pose, o_feet, o_command, o_drift, o_out);
    if (enc->parsed()) return run_encode(cfg, e_frame, e_params, e_seed, e_dump);
    if (stab->parsed())
      return run_stability(cfg, s_contacts, s_point, s_kind, s_base, s_vel, s_yaw, s_ground);
    if (rew->parsed()) return run_reward(r_log, r_breakdown);
    if (fk->parsed()) return run_fk(cfg, f_q);
    if (par->parsed()) return run_params(cfg, p_seed, p_out);
    if (conf->parsed()) return run_config(cfg, c_out);
    if (ev->parsed())
      return run_eval(cfg, v_ingest, v_terrain, v_levels, v_n, v_policy, v_speed, v_sweep,
                      v_duration, v_seed, v_criteria, v_randomize, v_out, v_log_dir);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
