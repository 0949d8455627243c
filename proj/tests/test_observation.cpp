#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "locokernel/observation.hpp"

using namespace locokernel;

namespace {

Heightfield flat_field(double extent = 8.0) {
  TerrainSpec spec;
  spec.extent = {extent, extent};
  return generate_terrain(spec);
}

RobotState base_at(double x, double y, double z, double yaw = 0) {
  RobotState s;
  s.base_position = {x, y, z};
  s.base_yaw = yaw;
  return s;
}

// hand-built field: 0.1 m plateau in one block, one void cell, flat elsewhere
Heightfield stone_and_gap_field() {
  const int n = 80;
  const double res = 0.05;
  std::vector<double> heights(n * n, 0.0);
  std::vector<std::uint8_t> voids(n * n, 0);
  for (int r = 30; r < 40; ++r)
    for (int c = 44; c < 54; ++c) heights[r * n + c] = 0.10;
  voids[46 * n + 34] = 1;
  return Heightfield({-0.5 * n * res + 0.5 * res, -0.5 * n * res + 0.5 * res}, res, n, n,
                     std::move(heights), std::move(voids));
}

}  // namespace

TEST_CASE("flat terrain samples a uniform base-relative offset") {
  const Heightfield hf = flat_field();
  const HeightmapGrid grid = sample_heightmap(hf, base_at(0, 0, 0.35));
  for (int r = 0; r < kHeightmapRows; ++r)
    for (int c = 0; c < kHeightmapCols; ++c) CHECK(grid.values(r, c) == -0.35);
}

TEST_CASE("grid spans 1.6 m x 1.0 m at 0.1 m pitch around the base") {
  const Heightfield hf = flat_field();
  const HeightmapGrid grid = sample_heightmap(hf, base_at(0, 0, 0.3));
  CHECK(grid.cell_x(0, 0) == doctest::Approx(-0.8).epsilon(1e-12));
  CHECK(grid.cell_x(16, 0) == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(grid.cell_y(0, 0) == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(grid.cell_y(0, 10) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(grid.cell_x(8, 5) == 0.0);
  CHECK(grid.cell_y(8, 5) == 0.0);
}

TEST_CASE("values match direct height_at queries, voids read the deep value") {
  const Heightfield hf = stone_and_gap_field();
  const RobotState state = base_at(0.1, -0.05, 0.30, 0.4);
  SampleOptions options;
  options.deep_void = -1.0;
  const HeightmapGrid grid = sample_heightmap(hf, state, options);
  const double cy = std::cos(state.base_yaw), sy = std::sin(state.base_yaw);
  bool saw_stone = false, saw_void = false;
  for (int r = 0; r < kHeightmapRows; ++r) {
    for (int c = 0; c < kHeightmapCols; ++c) {
      const double lx = grid.cell_x(r, c), ly = grid.cell_y(r, c);
      const double wx = state.base_position.x() + cy * lx - sy * ly;
      const double wy = state.base_position.y() + sy * lx + cy * ly;
      const auto h = hf.height_at(wx, wy);
      if (h) {
        CHECK(grid.values(r, c) == doctest::Approx(*h - 0.30).epsilon(1e-12));
        if (*h == 0.10) saw_stone = true;
      } else {
        CHECK(grid.values(r, c) == -1.0);
        saw_void = true;
      }
    }
  }
  CHECK(saw_stone);
  CHECK(saw_void);
}

TEST_CASE("flat terrain sampling is yaw invariant") {
  const Heightfield hf = flat_field();
  const HeightmapGrid a = sample_heightmap(hf, base_at(0.3, -0.2, 0.35, 0.0));
  const HeightmapGrid b = sample_heightmap(hf, base_at(0.3, -0.2, 0.35, M_PI));
  CHECK((a.values - b.values).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("translating terrain and base together leaves the grid unchanged") {
  const Heightfield hf = stone_and_gap_field();
  const Eigen::Vector2d shift{13.7, -4.2};
  const Heightfield moved(hf.origin() + shift, hf.resolution(), hf.rows(), hf.cols(),
                          hf.heights(), hf.void_mask());
  RobotState s0 = base_at(0.1, 0.2, 0.32, 0.7);
  RobotState s1 = s0;
  s1.base_position.head<2>() += shift;
  const HeightmapGrid a = sample_heightmap(hf, s0);
  const HeightmapGrid b = sample_heightmap(moved, s1);
  CHECK((a.values - b.values).cwiseAbs().maxCoeff() <= 1e-9);
}

TEST_CASE("sample points outside the field raise out-of-bounds") {
  const Heightfield hf = flat_field(4.0);
  CHECK_THROWS_AS(sample_heightmap(hf, base_at(1.6, 0, 0.3)), std::out_of_range);
  CHECK(heightmap_in_bounds(hf, base_at(0, 0, 0.3)));
  CHECK_FALSE(heightmap_in_bounds(hf, base_at(1.6, 0, 0.3)));
}

TEST_CASE("zero drift magnitude reproduces the plain grid") {
  const Heightfield hf = stone_and_gap_field();
  const RobotState state = base_at(0, 0, 0.3);
  Rng rng(9);
  const HeightmapGrid plain = sample_heightmap(hf, state);
  const HeightmapGrid drifted = heightmap_drift(hf, state, rng, 0.0);
  CHECK((plain.values - drifted.values).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("drift draws stay inside the magnitude bound") {
  Rng rng(3);
  for (int i = 0; i < 10000; ++i) {
    const Eigen::Vector3d d = draw_heightmap_drift(rng, 0.05);
    CHECK(d.cwiseAbs().maxCoeff() <= 0.05);
  }
  // on flat ground the value offset is exactly the z component of the draw
  const Heightfield hf = flat_field();
  const RobotState state = base_at(0, 0, 0.3);
  const HeightmapGrid plain = sample_heightmap(hf, state);
  Rng rng2(17);
  const Eigen::Vector3d drawn = draw_heightmap_drift(rng2, 0.05);
  Rng rng3(17);
  const HeightmapGrid drifted = heightmap_drift(hf, state, rng3, 0.05);
  CHECK((drifted.values.array() - plain.values.array()).abs().maxCoeff() <= 0.05);
  CHECK(drifted.values(0, 0) - plain.values(0, 0) == doctest::Approx(drawn.z()).epsilon(1e-12));
}

TEST_CASE("identical drift seeds give identical grids") {
  const Heightfield hf = stone_and_gap_field();
  const RobotState state = base_at(0.05, 0.02, 0.3, 0.2);
  Rng a(42), b(42);
  const HeightmapGrid ga = heightmap_drift(hf, state, a, 0.05);
  const HeightmapGrid gb = heightmap_drift(hf, state, b, 0.05);
  CHECK((ga.values - gb.values).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("footmap evaluates the Gaussian bump exactly") {
  const Heightfield hf = flat_field();
  const HeightmapGrid grid = sample_heightmap(hf, base_at(0, 0, 0.3));
  // foot 0 exactly on the center sample point, foot 1 one pitch away (d = sigma)
  std::array<Eigen::Vector2d, kFootCount> feet = {
      Eigen::Vector2d{0.0, 0.0}, Eigen::Vector2d{0.1, 0.0}, Eigen::Vector2d{0.0, 0.3},
      Eigen::Vector2d{5.0, 5.0}};
  const Footmap fm = build_footmap(feet, grid);
  CHECK(fm.channels[0](8, 5) == 10.0);
  CHECK(fm.channels[1](8, 5) == doctest::Approx(6.06531).epsilon(1e-5));
  CHECK(fm.channels[1](8, 5) == doctest::Approx(10.0 * std::exp(-0.5)).epsilon(1e-12));
  CHECK(fm.channels[2](8, 5) == doctest::Approx(0.11109).epsilon(1e-4));
  CHECK(fm.channels[2](8, 5) == doctest::Approx(10.0 * std::exp(-4.5)).epsilon(1e-12));
  // a far-away foot contributes a near-zero channel, not an error
  CHECK(fm.channels[3].maxCoeff() < 1e-6);
}

TEST_CASE("footmap values stay within [0, w] and peak at the nearest cell") {
  const Heightfield hf = flat_field();
  const HeightmapGrid grid = sample_heightmap(hf, base_at(0, 0, 0.3));
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    std::array<Eigen::Vector2d, kFootCount> feet;
    for (auto& f : feet) f = {rng.uniform(-0.8, 0.8), rng.uniform(-0.5, 0.5)};
    const Footmap fm = build_footmap(feet, grid);
    for (int k = 0; k < kFootCount; ++k) {
      double best_d = 1e9;
      int best_r = 0, best_c = 0;
      for (int r = 0; r < kHeightmapRows; ++r) {
        for (int c = 0; c < kHeightmapCols; ++c) {
          CHECK(fm.channels[k](r, c) >= 0.0);
          CHECK(fm.channels[k](r, c) <= 10.0);
          const double d = std::hypot(grid.cell_x(r, c) - feet[k].x(),
                                      grid.cell_y(r, c) - feet[k].y());
          if (d < best_d) {
            best_d = d;
            best_r = r;
            best_c = c;
          }
        }
      }
      CHECK(fm.channels[k](best_r, best_c) == fm.channels[k].maxCoeff());
    }
  }
}

TEST_CASE("footmap decreases strictly with distance and is symmetric") {
  const Heightfield hf = flat_field();
  const HeightmapGrid grid = sample_heightmap(hf, base_at(0, 0, 0.3));
  std::array<Eigen::Vector2d, kFootCount> feet = {
      Eigen::Vector2d{0.0, 0.0}, Eigen::Vector2d{0, 0}, Eigen::Vector2d{0, 0},
      Eigen::Vector2d{0, 0}};
  const Footmap fm = build_footmap(feet, grid);
  for (int r = 0; r < kHeightmapRows; ++r) {
    for (int c = 0; c < kHeightmapCols; ++c) {
      const int mr = kHeightmapRows - 1 - r;
      const int mc = kHeightmapCols - 1 - c;
      CHECK(std::abs(fm.channels[0](r, c) - fm.channels[0](mr, mc)) <= 1e-12);
    }
  }
  // strictly decreasing along the center row away from the foot
  for (int c = 5; c + 1 < kHeightmapCols; ++c)
    CHECK(fm.channels[0](8, c) > fm.channels[0](8, c + 1));
}

TEST_CASE("proprioception layout follows the published order") {
  RobotState state;
  const ProprioVector zero = assemble_proprio(state, {0, 0, 0}, JointVector::Zero());
  CHECK(zero.size() == 48);
  for (int i = 0; i < 48; ++i) {
    if (i == 8)
      CHECK(zero(i) == -1.0);  // gravity z
    else
      CHECK(zero(i) == 0.0);
  }

  state.lin_vel = {1, 2, 3};
  state.ang_vel = {4, 5, 6};
  state.joint_pos = JointVector::Constant(0.25);
  state.joint_vel = JointVector::Constant(-0.5);
  const Eigen::Vector3d cmd{0.7, -0.1, 0.3};
  JointVector prev = JointVector::Constant(2.0);
  const ProprioVector o = assemble_proprio(state, cmd, prev);
  CHECK(o.segment<3>(0) == state.lin_vel);
  CHECK(o.segment<3>(9) == cmd);  // slice [9..12) round-trips the command
  CHECK(o.segment<12>(12) == state.joint_pos);
  CHECK(o.segment<12>(36) == prev);
}

TEST_CASE("cell coordinates carry xy and the relative height") {
  const Heightfield hf = flat_field();
  const HeightmapGrid grid = sample_heightmap(hf, base_at(0, 0, 0.35));
  const auto coords = cell_coords_3d(grid);
  CHECK(coords.rows() == kHeightmapCells);
  const int center = token_index(8, 5);
  CHECK(coords(center, 0) == 0.0);
  CHECK(coords(center, 1) == 0.0);
  CHECK(coords(center, 2) == -0.35);
  const int corner = token_index(0, 0);
  CHECK(coords(corner, 0) == doctest::Approx(-0.8).epsilon(1e-12));
  CHECK(coords(corner, 1) == doctest::Approx(-0.5).epsilon(1e-12));
  // flat terrain: all relative heights equal
  for (int t = 0; t < kHeightmapCells; ++t) CHECK(coords(t, 2) == -0.35);
}

TEST_CASE("full observation is 48 proprio + 64 code = 112 dims") {
  CHECK(kProprioDim == 48);
  CHECK(kProprioDim + 64 == 112);
}

TEST_CASE("robot state invariants are enforced") {
  RobotState bad;
  bad.gravity = {0, 0, -2};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  RobotState nan_state;
  nan_state.base_position.x() = std::nan("");
  CHECK_THROWS_AS(nan_state.validate(), std::invalid_argument);
  RobotState ok;
  CHECK_NOTHROW(ok.validate());
}
