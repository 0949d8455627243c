#include "locokernel/stability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Geometry>

namespace locokernel {

namespace {

constexpr double kDuplicateEps = 1e-9;

double cross2(const Eigen::Vector2d& o, const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
  return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
}

double point_segment_distance(const Eigen::Vector2d& p, const Eigen::Vector2d& a,
                              const Eigen::Vector2d& b) {
  const Eigen::Vector2d ab = b - a;
  const double len_sq = ab.squaredNorm();
  if (len_sq == 0.0) return (p - a).norm();
  const double t = std::clamp((p - a).dot(ab) / len_sq, 0.0, 1.0);
  return (p - (a + t * ab)).norm();
}

}  // namespace

std::string stability_kind_name(StabilityKind kind) {
  switch (kind) {
    case StabilityKind::cop: return "cop";
    case StabilityKind::com: return "com";
    case StabilityKind::capture_point: return "cp";
  }
  return "unknown";
}

StabilityKind parse_stability_kind(const std::string& name) {
  if (name == "cop") return StabilityKind::cop;
  if (name == "com") return StabilityKind::com;
  if (name == "cp" || name == "capture_point") return StabilityKind::capture_point;
  throw std::invalid_argument("unknown stability kind: " + name);
}

// Andrew's monotone chain with strict turns, so collinear boundary points
// are dropped and only extreme points remain.
std::optional<SupportPolygon> support_polygon(std::span<const Eigen::Vector2d> contact_points) {
  std::vector<Eigen::Vector2d> pts(contact_points.begin(), contact_points.end());
  std::sort(pts.begin(), pts.end(), [](const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  pts.erase(std::unique(pts.begin(), pts.end(),
                        [](const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
                          return (a - b).norm() < kDuplicateEps;
                        }),
            pts.end());
  const int n = static_cast<int>(pts.size());
  if (n < 3) return std::nullopt;

  std::vector<Eigen::Vector2d> hull(2 * n);
  int k = 0;
  for (int i = 0; i < n; ++i) {
    while (k >= 2 && cross2(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  const int lower = k + 1;
  for (int i = n - 2; i >= 0; --i) {
    while (k >= lower && cross2(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);  // last point repeats the first
  if (hull.size() < 3) return std::nullopt;
  return SupportPolygon{std::move(hull)};
}

std::optional<Eigen::Vector2d> center_of_pressure(std::span<const Eigen::Vector3d> positions,
                                                  std::span<const Eigen::Vector3d> forces) {
  if (positions.size() != forces.size())
    throw std::invalid_argument("contact positions and forces must pair up");
  Eigen::Vector2d weighted{0, 0};
  double total = 0;
  for (std::size_t i = 0; i < positions.size(); ++i) {
    const double fz = forces[i].z();
    if (fz <= 0) continue;
    weighted += fz * positions[i].head<2>();
    total += fz;
  }
  if (total <= 0) return std::nullopt;
  return Eigen::Vector2d(weighted / total);
}

std::optional<Eigen::Vector2d> center_of_pressure(const RobotState& state) {
  std::vector<Eigen::Vector3d> pos, force;
  for (int k = 0; k < kFootCount; ++k) {
    if (!state.foot_contact[k]) continue;
    pos.push_back(state.foot_positions[k]);
    force.push_back(state.foot_forces[k]);
  }
  return center_of_pressure(pos, force);
}

double point_polygon_margin(const Eigen::Vector2d& point, const SupportPolygon& polygon) {
  const auto& v = polygon.vertices;
  const int n = static_cast<int>(v.size());
  if (n < 3) throw std::invalid_argument("support polygon is degenerate");
  bool inside = true;
  double min_dist = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    const Eigen::Vector2d& a = v[i];
    const Eigen::Vector2d& b = v[(i + 1) % n];
    if (cross2(a, b, point) < 0) inside = false;
    min_dist = std::min(min_dist, point_segment_distance(point, a, b));
  }
  return inside ? min_dist : -min_dist;
}

namespace {

std::optional<SupportPolygon> contact_polygon(const RobotState& state) {
  std::vector<Eigen::Vector2d> pts;
  for (int k = 0; k < kFootCount; ++k)
    if (state.foot_contact[k]) pts.push_back(state.foot_positions[k].head<2>());
  return support_polygon(pts);
}

// Points on the boundary must read 0, not the penalty; the CoP sits exactly
// on a hull edge whenever only two contacts carry force, so give the sign
// test a little room.
constexpr double kBoundaryEps = 1e-9;

double margin_reward(const std::optional<StabilityResult>& result,
                     const StabilityOptions& options) {
  if (!result) return 0.0;
  if (result->margin >= 0) return result->margin;
  if (result->margin >= -kBoundaryEps) return 0.0;
  return options.outside_penalty;
}

}  // namespace

std::optional<StabilityResult> stability_result(const RobotState& state, StabilityKind kind,
                                                const StabilityOptions& options) {
  const auto polygon = contact_polygon(state);
  if (!polygon) return std::nullopt;
  Eigen::Vector2d point;
  switch (kind) {
    case StabilityKind::cop: {
      const auto cop = center_of_pressure(state);
      if (!cop) return std::nullopt;
      point = *cop;
      break;
    }
    case StabilityKind::com:
      point = state.base_position.head<2>();
      break;
    case StabilityKind::capture_point:
      // pendulum model undefined at or below the ground: degenerate, not an
      // error, so reward evaluation survives a falling robot
      if (state.base_position.z() - options.ground_height <= 0) return std::nullopt;
      point = capture_point(state, options.gravity, options.ground_height);
      break;
  }
  return StabilityResult{point_polygon_margin(point, *polygon), point, kind};
}

double stability_margin(const RobotState& state, StabilityKind kind,
                        const StabilityOptions& options) {
  return margin_reward(stability_result(state, kind, options), options);
}

double stability_reward_cop(const RobotState& state, const StabilityOptions& options) {
  return stability_margin(state, StabilityKind::cop, options);
}

double static_margin_com(const RobotState& state, const StabilityOptions& options) {
  return stability_margin(state, StabilityKind::com, options);
}

Eigen::Vector2d capture_point(const RobotState& state, double gravity, double ground_height) {
  const double z_rel = state.base_position.z() - ground_height;
  if (z_rel <= 0 || gravity <= 0)
    throw std::domain_error("capture point requires positive pendulum height and gravity");
  const Eigen::Rotation2D<double> rot(state.base_yaw);
  const Eigen::Vector2d v_world = rot * state.lin_vel.head<2>();
  return state.base_position.head<2>() + v_world * std::sqrt(z_rel / gravity);
}

double dynamic_margin_cp(const RobotState& state, const StabilityOptions& options) {
  return stability_margin(state, StabilityKind::capture_point, options);
}

}  // namespace locokernel
