#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <span>
#include <vector>

namespace drivebench {

inline constexpr double kPi = std::numbers::pi;

/// Planar vector in meters. Right-handed frame: x forward/east, y left/north.
struct Vec2 {
  double x{0.0};
  double y{0.0};

  constexpr Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  constexpr Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
  constexpr Vec2 operator-() const { return {-x, -y}; }
  constexpr Vec2& operator+=(Vec2 o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  constexpr bool operator==(const Vec2&) const = default;

  double norm() const { return std::hypot(x, y); }
  constexpr double dot(Vec2 o) const { return x * o.x + y * o.y; }
  constexpr double cross(Vec2 o) const { return x * o.y - y * o.x; }
  /// Rotated +90 degrees (to the left).
  constexpr Vec2 left() const { return {-y, x}; }
  /// Rotated -90 degrees (to the right).
  constexpr Vec2 right() const { return {y, -x}; }
};

inline constexpr Vec2 operator*(double s, Vec2 v) { return v * s; }

inline double distance(Vec2 a, Vec2 b) { return (a - b).norm(); }

inline Vec2 unit_from_angle(double angle) { return {std::cos(angle), std::sin(angle)}; }

/// Wraps an angle into (-pi, pi].
double wrap_angle(double angle);

struct Pose2D {
  double x{0.0};
  double y{0.0};
  double yaw{0.0};

  constexpr Vec2 position() const { return {x, y}; }
  Vec2 heading() const { return unit_from_angle(yaw); }
  constexpr bool operator==(const Pose2D&) const = default;
};

/// Expresses a global point in the frame's local coordinates.
Vec2 global_to_local(const Pose2D& frame, Vec2 point);
/// Inverse of global_to_local.
Vec2 local_to_global(const Pose2D& frame, Vec2 point);

/// Pose composition: `child` given in `parent`'s frame, returned in the global frame.
Pose2D compose(const Pose2D& parent, const Pose2D& child);
/// Expresses `pose` relative to `frame` (inverse of compose).
Pose2D relative_pose(const Pose2D& frame, const Pose2D& pose);

/// Oriented rectangle. Extents are half sizes along its own heading (length) and left axis (width).
struct OrientedBox {
  Vec2 center;
  double yaw{0.0};
  double half_length{0.0};
  double half_width{0.0};

  std::array<Vec2, 4> corners() const;
  bool contains(Vec2 p) const;
  double area() const { return 4.0 * half_length * half_width; }
};

/// Separating-axis test. Touching edges count as overlap.
bool obb_overlap(const OrientedBox& a, const OrientedBox& b);

/// Thin box spanning a segment, used for line-crossing checks against boxes.
OrientedBox segment_box(Vec2 a, Vec2 b, double thickness = 0.1);

/// True if segments [p0,p1] and [q0,q1] intersect (inclusive of endpoints).
bool segments_intersect(Vec2 p0, Vec2 p1, Vec2 q0, Vec2 q1);

using Polygon = std::vector<Vec2>;

/// Even-odd point-in-polygon test.
bool polygon_contains(std::span<const Vec2> polygon, Vec2 p);

/// Convex polygon vs oriented box overlap (SAT). The polygon must be convex.
bool convex_polygon_overlaps_box(std::span<const Vec2> polygon, const OrientedBox& box);

/// Axis-aligned rectangle polygon around a centered oriented box.
Polygon box_polygon(const OrientedBox& box);

/// Result of projecting a point onto a polyline.
struct Projection {
  double s{0.0};        ///< arc length of the closest point
  double lateral{0.0};  ///< signed distance, positive to the left of the travel direction
  double distance{0.0};
  Vec2 point;
  std::size_t segment{0};
};

/**
 * Polyline with cached cumulative arc length.
 *
 * Requires at least two points with distinct consecutive vertices.
 */
class Polyline {
 public:
  Polyline() = default;
  explicit Polyline(std::vector<Vec2> points);

  const std::vector<Vec2>& points() const { return points_; }
  const std::vector<double>& arc_lengths() const { return cumulative_; }
  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }
  double length() const { return cumulative_.empty() ? 0.0 : cumulative_.back(); }

  /// Point at arc length s, clamped to the ends.
  Vec2 point_at(double s) const;
  /// Tangent heading at arc length s.
  double heading_at(double s) const;
  /// Point at arc length s; beyond the ends the first/last segment is extended linearly.
  Vec2 extrapolate(double s) const;

  /// Closest point over the whole polyline.
  Projection project(Vec2 p) const;
  /// Closest point restricted to arc lengths in [s_min, s_max].
  Projection project(Vec2 p, double s_min, double s_max) const;

  /// Resamples at a fixed arc-length step; the final point is always kept.
  Polyline resampled(double step) const;

  /// Index of the segment containing arc length s.
  std::size_t segment_at(double s) const;

  /**
   * Walks forward from the point at arc length s and returns `count` points,
   * each exactly `spacing` (Euclidean) from its predecessor. The last segment
   * is extended past the end when needed.
   */
  std::vector<Vec2> chord_walk(double s, std::size_t count, double spacing) const;

 private:
  std::vector<Vec2> points_;
  std::vector<double> cumulative_;
};

}  // namespace drivebench
