#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "locokernel/config.hpp"
#include "locokernel/encoder.hpp"
#include "locokernel/eval_types.hpp"

namespace locokernel {

using Policy = std::function<JointVector(const ObservationFrame&)>;

/// Simplified kinematic stand-in for a physics simulator: joints track PD
/// targets with first-order dynamics and the sampled system delay, the base
/// advances with the command while at least one foot has solid support, and
/// falls ballistically otherwise. Feet query the heightfield for contact; a
/// foot over a void cell gives no support.
class KinematicEnv {
 public:
  KinematicEnv(const Heightfield& hf, const TerrainSpec& spec, const CommandSample& command,
               std::uint64_t episode_seed, const KernelConfig& config = {},
               bool randomize = false);

  const RobotState& state() const { return state_; }
  double time() const { return t_; }
  bool done() const { return terminal_.has_value(); }
  std::optional<RolloutStatus> terminal() const { return terminal_; }
  const RandomizedParams& randomized() const { return randomized_; }

  /// All heightmap sample points inside the field (with this episode's
  /// drift applied).
  bool can_observe() const;
  ObservationFrame frame() const;

  StepRecord step(const JointVector& action);

 private:
  void refresh_contacts();

  const Heightfield* hf_;
  TerrainSpec spec_;
  CommandSample command_;
  KernelConfig cfg_;
  RandomizedParams randomized_;
  SampleOptions sample_options_;
  PdGains effective_gains_;
  JointVector q_default_;
  double nominal_height_;
  int delay_steps_;

  RobotState state_;
  JointVector prev_action_ = JointVector::Zero();
  std::deque<JointVector> target_history_;
  std::array<bool, kFootCount> foot_over_void_{};
  std::array<double, kFootCount> foot_ground_{};
  double t_ = 0;
  double last_stance_height_ = 0;
  double fall_velocity_ = 0;
  std::optional<RolloutStatus> terminal_;
};

struct RolloutRequest {
  TerrainSpec terrain;
  CommandSample command;
  double duration = 20.0;
  std::uint64_t seed = 0;
  std::string policy_name = "scripted:trot";
  bool randomize = false;
};

/// Steps the environment at the configured dt, building the full
/// observation frame each step and recording everything; deterministic per
/// seed. A throwing policy ends the rollout with policy_error status.
TrajectoryLog run_rollout(const Heightfield& hf, const RolloutRequest& request,
                          const Policy& policy, const KernelConfig& config = {});

/// "scripted:trot" walks a fixed diagonal-pair gait tracking the command it
/// reads from the observation's proprioception (blind to terrain);
/// "scripted:stand" holds the default pose.
Policy make_scripted_policy(const std::string& name, const KernelConfig& config = {});

struct SuccessCriteria {
  enum class Mode { fixed_distance, half_expected };
  Mode mode = Mode::fixed_distance;
  double duration = 0;       // 0: take from the log meta
  double min_distance = 4.0; // fixed_distance threshold, m
  double command_speed = 0;  // 0: take |v_global| from the log meta
};

struct SuccessResult {
  bool success = false;
  bool survival = false;
};

/// survival: completed with no base contact, fall or escape; success
/// additionally requires the displacement criterion (final planar distance
/// from the spawn point).
SuccessResult evaluate_success(const TrajectoryLog& log, const SuccessCriteria& criteria);

struct GroupKey {
  std::string terrain;
  int level = 0;
  double velocity = 0;

  friend bool operator==(const GroupKey&, const GroupKey&) = default;
  friend auto operator<=>(const GroupKey&, const GroupKey&) = default;
};

struct GroupMetrics {
  int n = 0;
  double success_rate = 0;   // percent
  double survival_rate = 0;  // percent
  double tracking_error = 0; // m/s
  double power = 0;          // W
};

struct LogSummary {
  GroupKey key;
  bool success = false;
  bool survival = false;
  bool has_steps = false;
  double tracking_error = 0;
  double power = 0;
};

LogSummary summarize(const TrajectoryLog& log, const SuccessCriteria& criteria);

struct MetricsTable {
  std::vector<std::pair<GroupKey, GroupMetrics>> rows;
  GroupMetrics overall;  // mean over groups
};

MetricsTable aggregate(std::span<const LogSummary> summaries);
MetricsTable aggregate(std::span<const TrajectoryLog> logs, const SuccessCriteria& criteria);

void write_metrics_tsv(const MetricsTable& table, std::ostream& out);

}  // namespace locokernel
