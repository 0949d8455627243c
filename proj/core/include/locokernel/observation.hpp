#pragma once

#include <array>

#include <Eigen/Core>

#include "locokernel/rng.hpp"
#include "locokernel/terrain.hpp"

namespace locokernel {

// Heightmap grid geometry: 17 samples along the base x axis and 11 along y,
// 0.1 m apart, spanning 1.6 m x 1.0 m centered on the base.
inline constexpr int kHeightmapRows = 17;
inline constexpr int kHeightmapCols = 11;
inline constexpr int kHeightmapCells = kHeightmapRows * kHeightmapCols;  // 187
inline constexpr double kHeightmapPitch = 0.1;
inline constexpr int kFootCount = 4;
inline constexpr int kJointCount = 12;
inline constexpr int kProprioDim = 48;

using HeightmapMatrix = Eigen::Matrix<double, kHeightmapRows, kHeightmapCols>;
using JointVector = Eigen::Matrix<double, kJointCount, 1>;
using ProprioVector = Eigen::Matrix<double, kProprioDim, 1>;

/// Foot index order used everywhere: Front Right, Front Left, Rear Right,
/// Rear Left.
enum class Leg : int { FR = 0, FL = 1, RR = 2, RL = 3 };

using FootVectors = std::array<Eigen::Vector3d, kFootCount>;

// Eigen's default constructor leaves coefficients uninitialized, so arrays
// of vectors need explicit zeroing.
inline FootVectors zero_foot_vectors() {
  return {Eigen::Vector3d::Zero(), Eigen::Vector3d::Zero(), Eigen::Vector3d::Zero(),
          Eigen::Vector3d::Zero()};
}

struct RobotState {
  Eigen::Vector3d base_position{0, 0, 0};  // world, m
  double base_yaw = 0;                     // rad
  Eigen::Vector3d lin_vel{0, 0, 0};        // base frame, m/s
  Eigen::Vector3d ang_vel{0, 0, 0};        // base frame, rad/s
  Eigen::Vector3d gravity{0, 0, -1};       // unit vector, base frame
  JointVector joint_pos = JointVector::Zero();
  JointVector joint_vel = JointVector::Zero();
  FootVectors foot_positions = zero_foot_vectors();  // world, m
  FootVectors foot_forces = zero_foot_vectors();     // N
  std::array<bool, kFootCount> foot_contact{};

  void validate() const;  // throws std::invalid_argument on bad invariants
};

/// Terrain heights relative to the base, plus each sample's base-frame xy.
struct HeightmapGrid {
  HeightmapMatrix values = HeightmapMatrix::Zero();
  HeightmapMatrix cell_x = HeightmapMatrix::Zero();
  HeightmapMatrix cell_y = HeightmapMatrix::Zero();
};

/// One Gaussian bump per foot rasterized onto the heightmap grid.
struct Footmap {
  std::array<HeightmapMatrix, kFootCount> channels = {
      HeightmapMatrix::Zero(), HeightmapMatrix::Zero(), HeightmapMatrix::Zero(),
      HeightmapMatrix::Zero()};
};

struct FootmapParams {
  double weight = 10.0;  // peak value w
  double sigma = 0.1;    // std dev, m
};

struct SampleOptions {
  double deep_void = -1.0;            // relative height reported for void cells
  Eigen::Vector3d drift{0, 0, 0};     // per-episode sensing offset, base frame
};

/// Samples the 17x11 grid around the base, axes rotated with base yaw.
/// Values are terrain height minus base height; void cells report the
/// configured deep-void value. Throws std::out_of_range when a sample point
/// leaves the heightfield.
HeightmapGrid sample_heightmap(const Heightfield& hf, const RobotState& state,
                               const SampleOptions& options = {});

/// True when all 187 sample points (including drift) stay inside the field.
bool heightmap_in_bounds(const Heightfield& hf, const RobotState& state,
                         const SampleOptions& options = {});

/// One uniform draw from [-magnitude, magnitude]^3.
Eigen::Vector3d draw_heightmap_drift(Rng& rng, double magnitude);

/// Draws a drift offset and re-samples the grid with it: the xy components
/// shift every sample position, the z component adds to every value. Meant
/// to be applied once per episode.
HeightmapGrid heightmap_drift(const Heightfield& hf, const RobotState& state, Rng& rng,
                              double magnitude, SampleOptions options = {});

/// f_k(x) = w * exp(-d_k(x)^2 / (2 sigma^2)) with d_k the planar distance
/// from sample point x to foot k, both in the base frame.
Footmap build_footmap(const std::array<Eigen::Vector2d, kFootCount>& feet_base_xy,
                      const HeightmapGrid& grid, const FootmapParams& params = {});

/// Foot world positions expressed in the base frame (yaw-aligned, origin at
/// the base).
std::array<Eigen::Vector2d, kFootCount> feet_in_base_frame(const RobotState& state);

/// [v(3), w(3), g(3), c(3), q(12), qd(12), a_prev(12)] -> 48 values.
ProprioVector assemble_proprio(const RobotState& state, const Eigen::Vector3d& command,
                               const JointVector& prev_action);

/// Per-cell (x, y, relative height) rows in token order (row-major over the
/// grid), 187 x 3.
Eigen::Matrix<double, kHeightmapCells, 3> cell_coords_3d(const HeightmapGrid& grid);

/// Everything the encoder consumes for one timestep.
struct ObservationFrame {
  HeightmapGrid heightmap;
  Footmap footmap;
  ProprioVector proprio = ProprioVector::Zero();
};

ObservationFrame build_frame(const Heightfield& hf, const RobotState& state,
                             const Eigen::Vector3d& command, const JointVector& prev_action,
                             const SampleOptions& options = {},
                             const FootmapParams& footmap_params = {});

inline int token_index(int row, int col) { return row * kHeightmapCols + col; }

}  // namespace locokernel
