#pragma once

#include <span>
#include <vector>

#include "drivebench/geometry.hpp"

namespace drivebench {

struct VehicleState {
  Pose2D pose;
  double speed{0.0};  ///< m/s, never negative

  bool operator==(const VehicleState&) const = default;
};

/**
 * Kinematic bicycle parameters plus the first-order longitudinal model.
 *
 * The pose reference point is the center of mass, lf/lr ahead/behind it.
 */
struct BicycleParams {
  double front_axle_offset{1.3};
  double rear_axle_offset{1.3};
  double max_steer_angle{1.22};
  double bbox_length{4.5};
  double bbox_width{2.0};
  double max_accel{3.0};    ///< at throttle = 1
  double brake_decel{6.0};  ///< applied whenever brake is set
  double max_speed{20.0};

  double wheelbase() const { return front_axle_offset + rear_axle_offset; }

  static BicycleParams car() { return {}; }
  static BicycleParams pedestrian() { return {0.25, 0.25, 1.2, 0.8, 0.8, 2.0, 6.0, 4.0}; }
  static BicycleParams cyclist() { return {0.5, 0.5, 0.8, 1.8, 0.8, 2.0, 5.0, 9.0}; }
};

/**
 * Actuation command.
 *
 * steer in [-1, 1]; positive steers right (clockwise), i.e. towards negative yaw.
 */
struct ControlCommand {
  double steer{0.0};
  double throttle{0.0};
  bool brake{false};

  bool operator==(const ControlCommand&) const = default;
};

/// Road-wheel angle for a command, counter-clockwise positive.
double steering_angle(const ControlCommand& cmd, const BicycleParams& params);

/// Longitudinal acceleration for a command under the first-order model.
double command_accel(const ControlCommand& cmd, const BicycleParams& params);

/// One kinematic-bicycle step driven by a road-wheel angle and an acceleration.
VehicleState step_bicycle_raw(const VehicleState& state, double steer_angle, double accel,
                              const BicycleParams& params, double dt);

/// One step of the kinematic bicycle model. Inputs are clamped to their valid ranges.
VehicleState step_bicycle(const VehicleState& state, const ControlCommand& cmd,
                          const BicycleParams& params, double dt);

/// Folds step_bicycle over the command sequence; result has cmds.size() + 1 states.
std::vector<VehicleState> unroll(const VehicleState& state, std::span<const ControlCommand> cmds,
                                 const BicycleParams& params, double dt);

/// Bounding box of a vehicle at the given pose.
OrientedBox vehicle_box(const Pose2D& pose, double length, double width);
inline OrientedBox vehicle_box(const Pose2D& pose, const BicycleParams& params) {
  return vehicle_box(pose, params.bbox_length, params.bbox_width);
}

}  // namespace drivebench
