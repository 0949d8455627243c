#include "locokernel/observation.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Geometry>

namespace locokernel {

namespace {

Eigen::Rotation2D<double> yaw_rotation(double yaw) { return Eigen::Rotation2D<double>(yaw); }

Eigen::Vector2d grid_cell_base_xy(int row, int col) {
  return {(row - (kHeightmapRows - 1) / 2) * kHeightmapPitch,
          (col - (kHeightmapCols - 1) / 2) * kHeightmapPitch};
}

}  // namespace

void RobotState::validate() const {
  if (std::abs(gravity.norm() - 1.0) > 1e-9)
    throw std::invalid_argument("gravity vector must have unit norm");
  if (!base_position.allFinite() || !lin_vel.allFinite() || !ang_vel.allFinite() ||
      !joint_pos.allFinite() || !joint_vel.allFinite() || !std::isfinite(base_yaw))
    throw std::invalid_argument("robot state contains non-finite values");
}

HeightmapGrid sample_heightmap(const Heightfield& hf, const RobotState& state,
                               const SampleOptions& options) {
  HeightmapGrid grid;
  const auto rot = yaw_rotation(state.base_yaw);
  const Eigen::Vector2d base_xy = state.base_position.head<2>();
  for (int r = 0; r < kHeightmapRows; ++r) {
    for (int c = 0; c < kHeightmapCols; ++c) {
      const Eigen::Vector2d cell = grid_cell_base_xy(r, c);
      grid.cell_x(r, c) = cell.x();
      grid.cell_y(r, c) = cell.y();
      const Eigen::Vector2d world = base_xy + rot * (cell + options.drift.head<2>());
      const auto h = hf.height_at(world.x(), world.y());
      const double rel = h ? (*h - state.base_position.z()) : options.deep_void;
      grid.values(r, c) = rel + options.drift.z();
    }
  }
  return grid;
}

bool heightmap_in_bounds(const Heightfield& hf, const RobotState& state,
                         const SampleOptions& options) {
  const auto rot = yaw_rotation(state.base_yaw);
  const Eigen::Vector2d base_xy = state.base_position.head<2>();
  for (int r = 0; r < kHeightmapRows; ++r) {
    for (int c = 0; c < kHeightmapCols; ++c) {
      const Eigen::Vector2d world =
          base_xy + rot * (grid_cell_base_xy(r, c) + options.drift.head<2>());
      if (!hf.in_bounds(world.x(), world.y())) return false;
    }
  }
  return true;
}

Eigen::Vector3d draw_heightmap_drift(Rng& rng, double magnitude) {
  if (magnitude < 0) throw std::invalid_argument("drift magnitude must be nonnegative");
  return {rng.uniform(-magnitude, magnitude), rng.uniform(-magnitude, magnitude),
          rng.uniform(-magnitude, magnitude)};
}

HeightmapGrid heightmap_drift(const Heightfield& hf, const RobotState& state, Rng& rng,
                              double magnitude, SampleOptions options) {
  options.drift = draw_heightmap_drift(rng, magnitude);
  return sample_heightmap(hf, state, options);
}

Footmap build_footmap(const std::array<Eigen::Vector2d, kFootCount>& feet_base_xy,
                      const HeightmapGrid& grid, const FootmapParams& params) {
  Footmap fm;
  const double inv_two_sigma_sq = 1.0 / (2.0 * params.sigma * params.sigma);
  for (int k = 0; k < kFootCount; ++k) {
    for (int r = 0; r < kHeightmapRows; ++r) {
      for (int c = 0; c < kHeightmapCols; ++c) {
        const double dx = grid.cell_x(r, c) - feet_base_xy[k].x();
        const double dy = grid.cell_y(r, c) - feet_base_xy[k].y();
        fm.channels[k](r, c) = params.weight * std::exp(-(dx * dx + dy * dy) * inv_two_sigma_sq);
      }
    }
  }
  return fm;
}

std::array<Eigen::Vector2d, kFootCount> feet_in_base_frame(const RobotState& state) {
  std::array<Eigen::Vector2d, kFootCount> feet;
  const auto inv_rot = yaw_rotation(-state.base_yaw);
  for (int k = 0; k < kFootCount; ++k)
    feet[k] = inv_rot * (state.foot_positions[k].head<2>() - state.base_position.head<2>());
  return feet;
}

ProprioVector assemble_proprio(const RobotState& state, const Eigen::Vector3d& command,
                               const JointVector& prev_action) {
  ProprioVector o;
  o.segment<3>(0) = state.lin_vel;
  o.segment<3>(3) = state.ang_vel;
  o.segment<3>(6) = state.gravity;
  o.segment<3>(9) = command;
  o.segment<12>(12) = state.joint_pos;
  o.segment<12>(24) = state.joint_vel;
  o.segment<12>(36) = prev_action;
  return o;
}

Eigen::Matrix<double, kHeightmapCells, 3> cell_coords_3d(const HeightmapGrid& grid) {
  Eigen::Matrix<double, kHeightmapCells, 3> coords;
  for (int r = 0; r < kHeightmapRows; ++r) {
    for (int c = 0; c < kHeightmapCols; ++c) {
      const int t = token_index(r, c);
      coords(t, 0) = grid.cell_x(r, c);
      coords(t, 1) = grid.cell_y(r, c);
      coords(t, 2) = grid.values(r, c);
    }
  }
  return coords;
}

ObservationFrame build_frame(const Heightfield& hf, const RobotState& state,
                             const Eigen::Vector3d& command, const JointVector& prev_action,
                             const SampleOptions& options, const FootmapParams& footmap_params) {
  ObservationFrame frame;
  frame.heightmap = sample_heightmap(hf, state, options);
  frame.footmap = build_footmap(feet_in_base_frame(state), frame.heightmap, footmap_params);
  frame.proprio = assemble_proprio(state, command, prev_action);
  return frame;
}

}  // namespace locokernel
