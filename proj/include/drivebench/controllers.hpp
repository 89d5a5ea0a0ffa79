#pragma once

#include <array>
#include <optional>
#include <vector>

#include "drivebench/dynamics.hpp"
#include "drivebench/geometry.hpp"

namespace drivebench {

struct PidGains {
  double kp{1.0};
  double ki{0.0};
  double kd{0.0};
  double integral_limit{10.0};  ///< |integral| is clamped to this value
};

struct PidState {
  double integral{0.0};
  double previous_error{0.0};
  bool initialized{false};
};

/// Discrete PID: I += e·dt (clamped), D = (e − e_prev)/dt (zero on the first step).
double pid_step(PidState& state, double error, double dt, const PidGains& gains);

/// Target-speed classes, fastest first; index 3 is the stop class.
inline constexpr std::array<double, 4> kSpeedClassesKmh{29.0, 18.0, 7.0, 0.0};
inline constexpr std::size_t kStopClass = 3;
inline constexpr std::size_t kNumSpeedClasses = 4;
inline constexpr double class_speed(std::size_t index) { return kSpeedClassesKmh[index] / 3.6; }

inline constexpr std::size_t kNumWaypoints = 8;
inline constexpr double kWaypointInterval = 0.25;
inline constexpr std::size_t kNumPathPoints = 10;
inline constexpr double kPathSpacing = 1.0;

/// Future ego positions at 250 ms intervals, ego frame.
struct WaypointPlan {
  std::array<Vec2, kNumWaypoints> points{};
};

/// Future path points at 1 m spacing, ego frame.
struct PathPlan {
  std::array<Vec2, kNumPathPoints> points{};
};

struct SpeedDistribution {
  std::array<double, kNumSpeedClasses> probs{};

  static SpeedDistribution one_hot(std::size_t index);
  bool valid(double tol = 1e-9) const;
};

struct ControllerConfig {
  double aim_slow{2.25};
  double aim_fast{3.0};
  double aim_switch_speed{5.5};
  double brake_threshold{0.5};
  double inference_speed_offset{2.0};
  double stop_epsilon{0.1};
  bool argmax{false};  ///< ablation: argmax over the moving classes instead of the weighted mean
  PidGains lateral{1.0, 0.0, 0.1, 10.0};
  PidGains longitudinal{1.0, 0.05, 0.0, 1.0};

  /// Preset for dense traffic.
  static ControllerConfig dense() {
    ControllerConfig c;
    c.brake_threshold = 0.33;
    return c;
  }
};

/// Aim distance for the current speed.
double aim_distance(double speed, const ControllerConfig& cfg);

/// First point at least `min_distance` from the origin; the last point otherwise.
Vec2 select_aim_point(std::span<const Vec2> points, double min_distance);

/// Steering command from the angle (ego frame, counter-clockwise positive) to an aim point.
double lateral_command(PidState& pid, Vec2 aim_local, double dt, const PidGains& gains);

struct Longitudinal {
  double throttle{0.0};
  bool brake{false};
};

/**
 * Shared speed loop. Brakes when the target is zero or the ego is clearly
 * above the target; otherwise throttle = clamp(PID(target − speed), 0, 1).
 */
Longitudinal longitudinal_command(PidState& pid, double target_speed, double speed, double dt,
                                  const PidGains& gains);

/// Target speed implied by a waypoint plan: distance between the 0.5 s and 1.0 s points over 0.5 s.
double waypoint_target_speed(const WaypointPlan& plan);

struct SpeedDecision {
  double target_speed{0.0};
  bool brake{false};
};

/**
 * Brake if p(stop) ≥ threshold. Otherwise the mean (or argmax) speed over the
 * moving classes renormalized without the stop mass, minus the inference
 * offset, floored at zero.
 */
SpeedDecision confidence_weighted_speed(const SpeedDistribution& dist, const ControllerConfig& cfg);

/// Entangled waypoint controller.
class WaypointController {
 public:
  explicit WaypointController(ControllerConfig cfg = {}) : cfg_(cfg) {}
  ControlCommand step(const WaypointPlan& plan, const VehicleState& state, double dt);
  const ControllerConfig& config() const { return cfg_; }

 private:
  ControllerConfig cfg_;
  PidState lateral_;
  PidState longitudinal_;
};

/// Disentangled path + target-speed controller.
class PathSpeedController {
 public:
  explicit PathSpeedController(ControllerConfig cfg = {}) : cfg_(cfg) {}
  ControlCommand step(const PathPlan& plan, const SpeedDistribution& dist, const VehicleState& state, double dt);
  const ControllerConfig& config() const { return cfg_; }

 private:
  ControllerConfig cfg_;
  PidState lateral_;
  PidState longitudinal_;
};

/// Last detected stop sign, kept in the current ego frame.
struct StopSignBuffer {
  std::optional<OrientedBox> sign;
  bool served{false};
};

struct StopBufferParams {
  double served_speed{0.1};
  double same_sign_distance{2.0};
  double ego_length{4.5};
  double ego_width{2.0};
};

/**
 * Advances the buffer by one step.
 *
 * `detected` are sign trigger boxes in the current ego frame; `ego_motion` is
 * the current ego pose expressed in the previous ego frame. Returns true while
 * the ego box is on the buffered sign and the stop has not been served.
 */
bool stop_sign_buffer_step(StopSignBuffer& buffer, const std::vector<OrientedBox>& detected,
                           const Pose2D& ego_motion, double ego_speed, const StopBufferParams& params = {});

}  // namespace drivebench
