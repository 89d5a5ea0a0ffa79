#include "drivebench/controllers.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace drivebench {

double pid_step(PidState& state, double error, double dt, const PidGains& gains) {
  state.integral = std::clamp(state.integral + error * dt, -gains.integral_limit, gains.integral_limit);
  const double derivative = state.initialized ? (error - state.previous_error) / dt : 0.0;
  state.previous_error = error;
  state.initialized = true;
  return gains.kp * error + gains.ki * state.integral + gains.kd * derivative;
}

SpeedDistribution SpeedDistribution::one_hot(std::size_t index) {
  SpeedDistribution d;
  d.probs[index] = 1.0;
  return d;
}

bool SpeedDistribution::valid(double tol) const {
  double sum = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0)) return false;
    sum += p;
  }
  return std::abs(sum - 1.0) <= tol;
}

double aim_distance(double speed, const ControllerConfig& cfg) {
  return speed < cfg.aim_switch_speed ? cfg.aim_slow : cfg.aim_fast;
}

Vec2 select_aim_point(std::span<const Vec2> points, double min_distance) {
  for (const Vec2& p : points) {
    if (p.norm() >= min_distance) return p;
  }
  return points.empty() ? Vec2{} : points.back();
}

double lateral_command(PidState& pid, Vec2 aim_local, double dt, const PidGains& gains) {
  const double angle = aim_local.norm() < 1e-6 ? 0.0 : std::atan2(aim_local.y, aim_local.x);
  return std::clamp(pid_step(pid, -angle, dt, gains), -1.0, 1.0);
}

Longitudinal longitudinal_command(PidState& pid, double target_speed, double speed, double dt,
                                  const PidGains& gains) {
  Longitudinal out;
  if (target_speed <= 1e-6 || speed > 1.05 * target_speed + 0.2) {
    out.brake = true;
    pid = {};
    return out;
  }
  out.throttle = std::clamp(pid_step(pid, target_speed - speed, dt, gains), 0.0, 1.0);
  return out;
}

double waypoint_target_speed(const WaypointPlan& plan) {
  return distance(plan.points[3], plan.points[1]) / (2.0 * kWaypointInterval);
}

SpeedDecision confidence_weighted_speed(const SpeedDistribution& dist, const ControllerConfig& cfg) {
  if (dist.probs[kStopClass] >= cfg.brake_threshold) return {0.0, true};
  double mass = 0.0;
  double weighted = 0.0;
  std::size_t best = 0;
  for (std::size_t i = 0; i < kStopClass; ++i) {
    mass += dist.probs[i];
    weighted += dist.probs[i] * class_speed(i);
    if (dist.probs[i] > dist.probs[best]) best = i;
  }
  if (mass <= 0.0) return {0.0, true};
  const double speed = cfg.argmax ? class_speed(best) : weighted / mass;
  return {std::max(0.0, speed - cfg.inference_speed_offset), false};
}

ControlCommand WaypointController::step(const WaypointPlan& plan, const VehicleState& state, double dt) {
  ControlCommand cmd;
  const Vec2 aim = select_aim_point(plan.points, aim_distance(state.speed, cfg_));
  cmd.steer = lateral_command(lateral_, aim, dt, cfg_.lateral);
  const double target = waypoint_target_speed(plan);
  if (target < cfg_.stop_epsilon) {
    cmd.brake = true;
    longitudinal_ = {};
    return cmd;
  }
  const Longitudinal lon = longitudinal_command(longitudinal_, target, state.speed, dt, cfg_.longitudinal);
  cmd.throttle = lon.throttle;
  cmd.brake = lon.brake;
  return cmd;
}

ControlCommand PathSpeedController::step(const PathPlan& plan, const SpeedDistribution& dist,
                                         const VehicleState& state, double dt) {
  ControlCommand cmd;
  const Vec2 aim = select_aim_point(plan.points, aim_distance(state.speed, cfg_));
  cmd.steer = lateral_command(lateral_, aim, dt, cfg_.lateral);
  const SpeedDecision speed = confidence_weighted_speed(dist, cfg_);
  if (speed.brake) {
    cmd.brake = true;
    longitudinal_ = {};
    return cmd;
  }
  const Longitudinal lon = longitudinal_command(longitudinal_, speed.target_speed, state.speed, dt, cfg_.longitudinal);
  cmd.throttle = lon.throttle;
  cmd.brake = lon.brake;
  return cmd;
}

bool stop_sign_buffer_step(StopSignBuffer& buffer, const std::vector<OrientedBox>& detected,
                           const Pose2D& ego_motion, double ego_speed, const StopBufferParams& params) {
  if (buffer.sign) {
    OrientedBox& b = *buffer.sign;
    b.center = global_to_local(ego_motion, b.center);
    b.yaw = wrap_angle(b.yaw - ego_motion.yaw);
  }
  if (!detected.empty()) {
    const auto nearest = std::min_element(detected.begin(), detected.end(), [](const auto& a, const auto& b) {
      return a.center.norm() < b.center.norm();
    });
    const bool same = buffer.sign && distance(buffer.sign->center, nearest->center) < params.same_sign_distance;
    if (!same) buffer.served = false;
    buffer.sign = *nearest;
  }
  if (!buffer.sign) return false;

  const OrientedBox ego{{0.0, 0.0}, 0.0, 0.5 * params.ego_length, 0.5 * params.ego_width};
  const bool on = obb_overlap(ego, *buffer.sign);
  if (on && ego_speed < params.served_speed) buffer.served = true;
  if (buffer.served && !on) {
    buffer = {};
    return false;
  }
  return on && !buffer.served;
}

}  // namespace drivebench
