#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "locokernel/rng.hpp"

namespace locokernel {

enum class TerrainKind {
  smooth,
  rough,
  discrete,
  stairs_up,
  stairs_down,
  stones,
  beams,
  pallets,
  circles,
  small_stones,
  pits,
  gaps,
  combo,
};

std::string kind_name(TerrainKind kind);
TerrainKind parse_kind(const std::string& name);  // atomic kinds only

/// Requested terrain tile. `combo_a`/`combo_b` are read only when
/// kind == combo and must themselves be atomic kinds.
struct TerrainSpec {
  TerrainKind kind = TerrainKind::smooth;
  TerrainKind combo_a = TerrainKind::smooth;
  TerrainKind combo_b = TerrainKind::smooth;
  int level = 0;  // difficulty 0..9
  Eigen::Vector2d extent{8.0, 8.0};
  std::uint64_t seed = 0;
  double platform_margin = 1.0;  // flat spawn half-width around the origin

  std::string name() const;  // "stones" or "stones+rough"
};

TerrainSpec parse_terrain_spec_name(const std::string& name);  // "stones" / "stones+rough"

/// Stepping-stone parameters at one difficulty level, all in meters.
struct StoneParams {
  double stone_size;
  double stone_gap;
  double max_shift;
  double max_height;
};

/// Level 0 and 9 are the published endpoints; intermediate levels
/// interpolate linearly between them.
StoneParams stones_params(int level);

/// Everything the procedural generators leave open, with defaults chosen so
/// hazard grows monotonically in difficulty level. Values suffixed
/// `_level0`/`_level9` are endpoints interpolated by level/9.
struct TerrainTuning {
  double resolution = 0.05;  // generation cell edge, meters

  double rough_amp_level0 = 0.01;
  double rough_amp_level9 = 0.10;
  double rough_cell = 0.20;  // noise lattice pitch

  int discrete_blocks = 40;
  double discrete_height_level0 = 0.05;
  double discrete_height_level9 = 0.15;
  double discrete_size_min = 0.40;
  double discrete_size_max = 1.50;

  double stair_rise_level0 = 0.05;
  double stair_rise_level9 = 0.20;
  double stair_run = 0.30;

  double beam_width_level0 = 0.30;
  double beam_width_level9 = 0.12;
  double beam_gap_level0 = 0.15;
  double beam_gap_level9 = 0.40;

  double pallet_size = 1.20;
  double pallet_gap_level0 = 0.05;
  double pallet_gap_level9 = 0.15;
  double pallet_height_level0 = 0.02;
  double pallet_height_level9 = 0.15;

  double circle_radius_level0 = 0.35;
  double circle_radius_level9 = 0.16;
  double circle_gap_level0 = 0.10;
  double circle_gap_level9 = 0.25;

  double small_stone_size_level0 = 0.30;
  double small_stone_size_level9 = 0.20;
  double small_stone_gap_level0 = 0.08;
  double small_stone_gap_level9 = 0.15;
  double small_stone_height_level9 = 0.06;

  int pit_count = 12;
  double pit_size_level0 = 0.30;
  double pit_size_level9 = 0.80;

  double gap_width_per_level = 0.05;  // gap width = 0.05 * (level + 1)
  double gap_spacing = 1.50;
};

/// World-frame elevation grid, immutable after construction. Cell (r, c) is
/// centered at origin + (c, r) * resolution; heights are stored row-major.
/// Void cells model bottomless gap/pit regions: they have no height and give
/// no support.
class Heightfield {
 public:
  Heightfield(Eigen::Vector2d origin, double resolution, int rows, int cols,
              std::vector<double> heights, std::vector<std::uint8_t> void_mask);

  const Eigen::Vector2d& origin() const { return origin_; }
  double resolution() const { return resolution_; }
  int rows() const { return rows_; }
  int cols() const { return cols_; }

  double height(int row, int col) const { return heights_[index(row, col)]; }
  bool is_void(int row, int col) const { return void_mask_[index(row, col)] != 0; }

  /// Nearest-cell lookup: the height of the cell containing (x, y), or
  /// nullopt when that cell is void. Throws std::out_of_range outside the
  /// covered rectangle; stepped terrain keeps its sharp edges (no
  /// interpolation).
  std::optional<double> height_at(double x, double y) const;

  bool in_bounds(double x, double y) const;

  double min_x() const { return origin_.x() - 0.5 * resolution_; }
  double max_x() const { return origin_.x() + (cols_ - 0.5) * resolution_; }
  double min_y() const { return origin_.y() - 0.5 * resolution_; }
  double max_y() const { return origin_.y() + (rows_ - 0.5) * resolution_; }

  const std::vector<double>& heights() const { return heights_; }
  const std::vector<std::uint8_t>& void_mask() const { return void_mask_; }

  // `HF v1 rows cols resolution origin_x origin_y` header, then rows*cols
  // whitespace-separated heights row-major with `void` marking void cells.
  void save(std::ostream& out) const;
  void save(const std::string& path) const;
  static Heightfield load(std::istream& in);
  static Heightfield load(const std::string& path);

 private:
  int index(int row, int col) const { return row * cols_ + col; }

  Eigen::Vector2d origin_;
  double resolution_;
  int rows_;
  int cols_;
  std::vector<double> heights_;
  std::vector<std::uint8_t> void_mask_;
};

/// Pure function of its TerrainSpec: repeated calls give bit-identical
/// fields. A flat solid strip of platform_margin at height 0 always
/// surrounds the origin, whatever the kind, level and seed.
Heightfield generate_terrain(const TerrainSpec& spec, const TerrainTuning& tuning = {});

}  // namespace locokernel
