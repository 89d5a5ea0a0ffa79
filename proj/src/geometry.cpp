#include "drivebench/geometry.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace drivebench {

double wrap_angle(double angle) {
  double r = std::remainder(angle, 2.0 * kPi);
  if (r <= -kPi) r += 2.0 * kPi;
  return r;
}

Vec2 global_to_local(const Pose2D& frame, Vec2 point) {
  const double c = std::cos(frame.yaw);
  const double s = std::sin(frame.yaw);
  const double dx = point.x - frame.x;
  const double dy = point.y - frame.y;
  return {c * dx + s * dy, -s * dx + c * dy};
}

Vec2 local_to_global(const Pose2D& frame, Vec2 point) {
  const double c = std::cos(frame.yaw);
  const double s = std::sin(frame.yaw);
  return {frame.x + c * point.x - s * point.y, frame.y + s * point.x + c * point.y};
}

Pose2D compose(const Pose2D& parent, const Pose2D& child) {
  const Vec2 p = local_to_global(parent, child.position());
  return {p.x, p.y, wrap_angle(parent.yaw + child.yaw)};
}

Pose2D relative_pose(const Pose2D& frame, const Pose2D& pose) {
  const Vec2 p = global_to_local(frame, pose.position());
  return {p.x, p.y, wrap_angle(pose.yaw - frame.yaw)};
}

std::array<Vec2, 4> OrientedBox::corners() const {
  const Vec2 ax = unit_from_angle(yaw) * half_length;
  const Vec2 ay = unit_from_angle(yaw).left() * half_width;
  return {center + ax + ay, center - ax + ay, center - ax - ay, center + ax - ay};
}

bool OrientedBox::contains(Vec2 p) const {
  const Vec2 local = global_to_local({center.x, center.y, yaw}, p);
  return std::abs(local.x) <= half_length && std::abs(local.y) <= half_width;
}

namespace {

double box_radius(const OrientedBox& box, Vec2 axis) {
  const Vec2 ax = unit_from_angle(box.yaw);
  return box.half_length * std::abs(axis.dot(ax)) + box.half_width * std::abs(axis.dot(ax.left()));
}

}  // namespace

bool obb_overlap(const OrientedBox& a, const OrientedBox& b) {
  const Vec2 d = b.center - a.center;
  const Vec2 ua = unit_from_angle(a.yaw);
  const Vec2 ub = unit_from_angle(b.yaw);
  const std::array<Vec2, 4> axes{ua, ua.left(), ub, ub.left()};
  for (const Vec2& axis : axes) {
    if (std::abs(d.dot(axis)) > box_radius(a, axis) + box_radius(b, axis)) return false;
  }
  return true;
}

OrientedBox segment_box(Vec2 a, Vec2 b, double thickness) {
  const Vec2 d = b - a;
  return {(a + b) * 0.5, std::atan2(d.y, d.x), 0.5 * d.norm(), 0.5 * thickness};
}

namespace {

int orientation(Vec2 a, Vec2 b, Vec2 c) {
  const double v = (b - a).cross(c - a);
  if (v > 0.0) return 1;
  if (v < 0.0) return -1;
  return 0;
}

bool on_segment(Vec2 a, Vec2 b, Vec2 p) {
  return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= p.y &&
         p.y <= std::max(a.y, b.y);
}

}  // namespace

bool segments_intersect(Vec2 p0, Vec2 p1, Vec2 q0, Vec2 q1) {
  const int o1 = orientation(p0, p1, q0);
  const int o2 = orientation(p0, p1, q1);
  const int o3 = orientation(q0, q1, p0);
  const int o4 = orientation(q0, q1, p1);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(p0, p1, q0)) return true;
  if (o2 == 0 && on_segment(p0, p1, q1)) return true;
  if (o3 == 0 && on_segment(q0, q1, p0)) return true;
  if (o4 == 0 && on_segment(q0, q1, p1)) return true;
  return false;
}

bool polygon_contains(std::span<const Vec2> polygon, Vec2 p) {
  bool inside = false;
  const std::size_t n = polygon.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Vec2 a = polygon[i];
    const Vec2 b = polygon[j];
    if ((a.y > p.y) != (b.y > p.y)) {
      const double x_cross = (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x;
      if (p.x < x_cross) inside = !inside;
    }
  }
  return inside;
}

bool convex_polygon_overlaps_box(std::span<const Vec2> polygon, const OrientedBox& box) {
  if (polygon.size() < 3) return false;
  const auto corners = box.corners();
  auto separated_on = [&](Vec2 axis) {
    double pmin = std::numeric_limits<double>::infinity();
    double pmax = -pmin;
    for (const Vec2& v : polygon) {
      const double t = v.dot(axis);
      pmin = std::min(pmin, t);
      pmax = std::max(pmax, t);
    }
    double bmin = std::numeric_limits<double>::infinity();
    double bmax = -bmin;
    for (const Vec2& c : corners) {
      const double t = c.dot(axis);
      bmin = std::min(bmin, t);
      bmax = std::max(bmax, t);
    }
    return pmax < bmin || bmax < pmin;
  };
  const Vec2 u = unit_from_angle(box.yaw);
  if (separated_on(u) || separated_on(u.left())) return false;
  for (std::size_t i = 0; i < polygon.size(); ++i) {
    const Vec2 edge = polygon[(i + 1) % polygon.size()] - polygon[i];
    if (edge.x == 0.0 && edge.y == 0.0) continue;
    if (separated_on(edge.left())) return false;
  }
  return true;
}

Polygon box_polygon(const OrientedBox& box) {
  const auto c = box.corners();
  return {c[0], c[1], c[2], c[3]};
}

Polyline::Polyline(std::vector<Vec2> points) : points_(std::move(points)) {
  if (points_.size() < 2) throw std::invalid_argument("polyline needs at least two points");
  cumulative_.reserve(points_.size());
  cumulative_.push_back(0.0);
  for (std::size_t i = 1; i < points_.size(); ++i) {
    const double len = distance(points_[i - 1], points_[i]);
    if (len <= 0.0) throw std::invalid_argument("polyline has repeated consecutive points");
    cumulative_.push_back(cumulative_.back() + len);
  }
}

std::size_t Polyline::segment_at(double s) const {
  if (s <= 0.0) return 0;
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), s);
  const auto idx = static_cast<std::size_t>(std::distance(cumulative_.begin(), it));
  return std::min(idx == 0 ? 0 : idx - 1, points_.size() - 2);
}

Vec2 Polyline::point_at(double s) const {
  return extrapolate(std::clamp(s, 0.0, length()));
}

Vec2 Polyline::extrapolate(double s) const {
  const std::size_t i = segment_at(s);
  const double seg_len = cumulative_[i + 1] - cumulative_[i];
  const double t = (s - cumulative_[i]) / seg_len;
  return points_[i] + (points_[i + 1] - points_[i]) * t;
}

double Polyline::heading_at(double s) const {
  const std::size_t i = segment_at(std::clamp(s, 0.0, length()));
  const Vec2 d = points_[i + 1] - points_[i];
  return std::atan2(d.y, d.x);
}

Projection Polyline::project(Vec2 p) const {
  return project(p, 0.0, length());
}

Projection Polyline::project(Vec2 p, double s_min, double s_max) const {
  s_min = std::clamp(s_min, 0.0, length());
  s_max = std::clamp(s_max, s_min, length());
  Projection best;
  double best_d2 = std::numeric_limits<double>::infinity();
  const std::size_t first = segment_at(s_min);
  const std::size_t last = segment_at(s_max);
  for (std::size_t i = first; i <= last; ++i) {
    const Vec2 a = points_[i];
    const Vec2 d = points_[i + 1] - a;
    const double seg_len = cumulative_[i + 1] - cumulative_[i];
    const double lo = std::max(0.0, (s_min - cumulative_[i]) / seg_len);
    const double hi = std::min(1.0, (s_max - cumulative_[i]) / seg_len);
    double t = (p - a).dot(d) / (seg_len * seg_len);
    t = std::clamp(t, lo, hi);
    const Vec2 q = a + d * t;
    const double d2 = (p - q).dot(p - q);
    if (d2 < best_d2) {
      best_d2 = d2;
      best.s = cumulative_[i] + t * seg_len;
      best.point = q;
      best.segment = i;
      best.distance = std::sqrt(d2);
      best.lateral = d.cross(p - q) >= 0.0 ? best.distance : -best.distance;
    }
  }
  return best;
}

Polyline Polyline::resampled(double step) const {
  if (step <= 0.0) throw std::invalid_argument("resample step must be positive");
  std::vector<Vec2> out;
  const double total = length();
  const auto n = static_cast<std::size_t>(std::floor(total / step + 1e-9));
  out.reserve(n + 2);
  for (std::size_t k = 0; k <= n; ++k) out.push_back(point_at(static_cast<double>(k) * step));
  const Vec2 end = points_.back();
  if (distance(out.back(), end) > 0.05 * step) {
    out.push_back(end);
  } else {
    out.back() = end;
  }
  return Polyline(std::move(out));
}

std::vector<Vec2> Polyline::chord_walk(double s, std::size_t count, double spacing) const {
  std::vector<Vec2> out;
  out.reserve(count);
  Vec2 current = point_at(s);
  std::size_t seg = segment_at(std::clamp(s, 0.0, length()));
  double t_min = (std::clamp(s, 0.0, length()) - cumulative_[seg]) / (cumulative_[seg + 1] - cumulative_[seg]);
  const double r2 = spacing * spacing;
  while (out.size() < count) {
    const Vec2 a = points_[seg];
    const Vec2 d = points_[seg + 1] - a;
    const bool last = seg + 2 == points_.size();
    // |a + t·d − current|² = r²
    const Vec2 w = a - current;
    const double qa = d.dot(d);
    const double qb = 2.0 * w.dot(d);
    const double qc = w.dot(w) - r2;
    const double disc = qb * qb - 4.0 * qa * qc;
    bool found = false;
    if (disc >= 0.0) {
      const double sq = std::sqrt(disc);
      for (double t : {(-qb - sq) / (2.0 * qa), (-qb + sq) / (2.0 * qa)}) {
        if (t >= t_min - 1e-12 && (t <= 1.0 || last)) {
          current = a + d * t;
          t_min = t;
          out.push_back(current);
          found = true;
          break;
        }
      }
    }
    if (!found) {
      if (last) break;
      ++seg;
      t_min = 0.0;
    }
  }
  return out;
}

}  // namespace drivebench
