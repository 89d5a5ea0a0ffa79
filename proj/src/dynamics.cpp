#include "drivebench/dynamics.hpp"

#include <algorithm>
#include <cmath>

namespace drivebench {

double steering_angle(const ControlCommand& cmd, const BicycleParams& params) {
  return -std::clamp(cmd.steer, -1.0, 1.0) * params.max_steer_angle;
}

double command_accel(const ControlCommand& cmd, const BicycleParams& params) {
  if (cmd.brake) return -params.brake_decel;
  return std::clamp(cmd.throttle, 0.0, 1.0) * params.max_accel;
}

VehicleState step_bicycle_raw(const VehicleState& state, double steer_angle, double accel,
                              const BicycleParams& params, double dt) {
  const double lr = params.rear_axle_offset;
  const double delta = std::clamp(steer_angle, -params.max_steer_angle, params.max_steer_angle);
  const double beta = std::atan(lr / params.wheelbase() * std::tan(delta));
  const double v = state.speed;
  const double yaw = state.pose.yaw;

  VehicleState next;
  next.pose.x = state.pose.x + v * std::cos(yaw + beta) * dt;
  next.pose.y = state.pose.y + v * std::sin(yaw + beta) * dt;
  next.pose.yaw = wrap_angle(yaw + v / lr * std::sin(beta) * dt);
  next.speed = std::clamp(v + accel * dt, 0.0, params.max_speed);
  return next;
}

VehicleState step_bicycle(const VehicleState& state, const ControlCommand& cmd,
                          const BicycleParams& params, double dt) {
  return step_bicycle_raw(state, steering_angle(cmd, params), command_accel(cmd, params), params, dt);
}

std::vector<VehicleState> unroll(const VehicleState& state, std::span<const ControlCommand> cmds,
                                 const BicycleParams& params, double dt) {
  std::vector<VehicleState> out;
  out.reserve(cmds.size() + 1);
  out.push_back(state);
  for (const auto& cmd : cmds) out.push_back(step_bicycle(out.back(), cmd, params, dt));
  return out;
}

OrientedBox vehicle_box(const Pose2D& pose, double length, double width) {
  return {pose.position(), pose.yaw, 0.5 * length, 0.5 * width};
}

}  // namespace drivebench
