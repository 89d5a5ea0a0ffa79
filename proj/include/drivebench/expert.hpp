#pragma once

#include <optional>
#include <set>
#include <vector>

#include "drivebench/controllers.hpp"
#include "drivebench/world.hpp"

namespace drivebench {

struct ExpertConfig {
  double speed_regular{8.0};
  double speed_intersection{5.0};
  double speed_caution{2.0};
  double speed_stop{0.0};
  double lateral_min_aim{3.5};
  double pedestrian_radius{30.0};
  double pedestrian_cone{60.0 * kPi / 180.0};  ///< half angle
  double pedestrian_corridor{4.75};            ///< max distance from the route path
  double forecast_horizon{2.0};
  double forecast_dt{0.05};
  double forecast_range{60.0};  ///< actors farther than this are not unrolled
  double stop_served_speed{0.1};
  bool yellow_is_red{true};
  double light_heading_tolerance{60.0 * kPi / 180.0};
  /// Stop signs are only perceived ahead, within range, and not while the ego box covers them.
  bool occluded_stop_signs{false};
  double sign_detection_range{30.0};
  /// Rectangular sign triggers apply only when their first edge points within this angle of the ego heading.
  double sign_heading_tolerance{60.0 * kPi / 180.0};
  double safety_step{0.25};  ///< arc-length step of the safety-box unroll
  PidGains lateral{1.0, 0.0, 0.1, 10.0};
  PidGains longitudinal{1.0, 0.05, 0.0, 1.0};
};

enum class ExpertReason {
  regular,
  intersection,
  pedestrian_near,
  collision_predicted,
  red_light,
  stop_sign_approach,
  stop_sign_on_trigger,
};

const char* to_string(ExpertReason reason);

struct ExpertDecision {
  double target_speed{0.0};
  std::size_t speed_class_index{0};
  Vec2 aim_point;
  ExpertReason reason{ExpertReason::regular};
  std::optional<int> collision_actor;
};

/// Class index of an expert target speed: 8→0, 5→1, 2→2, 0→3.
std::size_t speed_class_for(double target_speed, const ExpertConfig& cfg = {});

/// Stopping distance d = 0.5·((v·3.6)/10)² + 2.5.
double stopping_distance(double speed);

/// First path vertex past the cursor at Euclidean distance ≥ min_distance from `position`; last vertex otherwise.
Vec2 lateral_aim(const Polyline& path, double cursor_s, Vec2 position, double min_distance = 3.5);

/// Ego box posed after following the path for stopping_distance(speed) meters.
OrientedBox safety_box(const VehicleState& ego, const BicycleParams& params, const Polyline& path,
                       double cursor_s, const ExpertConfig& cfg = {});

struct CollisionForecast {
  double time{0.0};
  int step{0};
  int actor_id{-1};
};

/// Ego commands and states of a path-following forecast toward a fixed target speed.
struct EgoForecast {
  std::vector<ControlCommand> commands;
  std::vector<VehicleState> states;  ///< commands.size() + 1 entries
};

EgoForecast forecast_ego(const VehicleState& ego, const BicycleParams& params, const Polyline& path, double cursor_s,
                         double target_speed, int steps, double dt, const ExpertConfig& cfg = {});

/**
 * Unrolls actors with their last action held constant and the ego with
 * path-following PID actions; returns the earliest step with a box overlap.
 */
std::optional<CollisionForecast> predict_collision(const Actor& ego, const std::vector<Actor>& actors,
                                                   const Polyline& path, double cursor_s, double target_speed,
                                                   const ExpertConfig& cfg = {});

/// Signs the expert can perceive in the current state.
std::vector<const StopSign*> perceived_stop_signs(const WorldState& world, const ExpertConfig& cfg);

/// Minimum over the rule table. `served_signs` lists stop signs already stopped at.
ExpertDecision target_speed_decision(const WorldState& world, const std::set<int>& served_signs,
                                     const ExpertConfig& cfg = {});

/// Rule-based driver with its per-episode controller and stop-sign memory.
class Expert {
 public:
  explicit Expert(ExpertConfig cfg = {}) : cfg_(cfg) {}

  /// Decision for the current state; records served stop signs.
  ExpertDecision decide(const WorldState& world);
  /// Command toward a decision.
  ControlCommand control(const WorldState& world, const ExpertDecision& decision);
  ControlCommand act(const WorldState& world, ExpertDecision* decision_out = nullptr);

  const ExpertConfig& config() const { return cfg_; }
  const std::set<int>& served_signs() const { return served_; }

 private:
  ExpertConfig cfg_;
  PidState lateral_;
  PidState longitudinal_;
  std::set<int> served_;
};

}  // namespace drivebench
