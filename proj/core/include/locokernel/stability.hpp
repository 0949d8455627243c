#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "locokernel/observation.hpp"

namespace locokernel {

/// Convex hull of the ground-contact foot positions, counter-clockwise,
/// extreme points only.
struct SupportPolygon {
  std::vector<Eigen::Vector2d> vertices;
};

enum class StabilityKind { cop, com, capture_point };

std::string stability_kind_name(StabilityKind kind);
StabilityKind parse_stability_kind(const std::string& name);

struct StabilityResult {
  double margin = 0;            // signed, positive strictly inside
  Eigen::Vector2d point{0, 0};  // evaluated reference point
  StabilityKind kind = StabilityKind::cop;
};

/// Convex hull of the contact points for three or more non-collinear
/// points; nullopt marks the degenerate cases (fewer contacts, collinear).
std::optional<SupportPolygon> support_polygon(std::span<const Eigen::Vector2d> contact_points);

/// Vertical-force-weighted mean of the contact positions, using contacts
/// with positive vertical force only; nullopt when no weight remains.
std::optional<Eigen::Vector2d> center_of_pressure(std::span<const Eigen::Vector3d> positions,
                                                  std::span<const Eigen::Vector3d> forces);
std::optional<Eigen::Vector2d> center_of_pressure(const RobotState& state);

/// Minimum distance from the point to the polygon edges, positive inside
/// and negative outside. Throws std::invalid_argument for polygons with
/// fewer than three vertices.
double point_polygon_margin(const Eigen::Vector2d& point, const SupportPolygon& polygon);

struct StabilityOptions {
  double outside_penalty = -1.0;  // reward when the point leaves the polygon
  double gravity = 9.81;          // m/s^2, for the capture point
  double ground_height = 0.0;     // world z of the support surface under the base
};

/// Margin of the CoP inside the contact-foot support polygon; the fixed
/// outside penalty when the CoP leaves it, 0 when the polygon is degenerate
/// or there is no CoP (flight).
double stability_reward_cop(const RobotState& state, const StabilityOptions& options = {});

/// Static variant: the base position's vertical projection stands in for
/// the CoM.
double static_margin_com(const RobotState& state, const StabilityOptions& options = {});

/// Linear-inverted-pendulum capture point: CoM_xy + v_xy * sqrt(z/g) with
/// the planar velocity rotated to the world frame. Throws std::domain_error
/// when the base is not above the ground.
Eigen::Vector2d capture_point(const RobotState& state, double gravity, double ground_height = 0.0);

/// Dynamic variant using the capture point as the reference.
double dynamic_margin_cp(const RobotState& state, const StabilityOptions& options = {});

/// Reference point and raw signed margin for one of the three criteria;
/// nullopt when degenerate (no polygon, or no CoP for the cop kind).
std::optional<StabilityResult> stability_result(const RobotState& state, StabilityKind kind,
                                                const StabilityOptions& options = {});

/// Reward-shaped margin for the chosen criterion (outside penalty and
/// degenerate-zero rules applied).
double stability_margin(const RobotState& state, StabilityKind kind,
                        const StabilityOptions& options = {});

}  // namespace locokernel
