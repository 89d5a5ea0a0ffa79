#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "drivebench/dynamics.hpp"
#include "drivebench/geometry.hpp"
#include "drivebench/random.hpp"

namespace drivebench {

/// Lane-center polylines plus junction areas. Shared read-only between episodes.
struct LaneMap {
  std::vector<Polyline> lanes;
  double lane_width{3.5};
  std::vector<Polygon> intersections;
  /// Leaving the drivable corridor counts as a static collision when set.
  bool offroad_is_collision{true};

  /// successors[i] lists lanes whose first point coincides with the last point of lane i.
  std::vector<std::vector<std::size_t>> successors() const;
  /// Closest lane-center distance over all lanes.
  double distance_to_nearest_lane(Vec2 p) const;
  bool in_intersection(Vec2 p) const;
};

enum class TriggerKind { pedestrian_crossing, cyclist_cut_in, opposing_vehicle, light_change };

struct ScenarioTrigger {
  double route_s{0.0};
  TriggerKind kind{TriggerKind::pedestrian_crossing};
  std::map<std::string, double> params;

  double param(const std::string& key, double fallback) const;
};

/// Lane-center route with sparse target points.
struct Route {
  Polyline path;                      ///< resampled at 1 m
  std::vector<Vec2> target_points;    ///< ordered, on the path
  std::vector<double> target_s;       ///< arc length of each target point
  std::vector<ScenarioTrigger> triggers;

  double length() const { return path.length(); }
};

/// Builds a route from an explicit path and target-point list; TPs are snapped onto the path.
Route make_route(const Polyline& path, const std::vector<Vec2>& target_points,
                 std::vector<ScenarioTrigger> triggers = {});

struct TargetPointSpacing {
  double min_spacing{20.0};
  double max_spacing{50.0};
  std::uint64_t seed{0};
};

/**
 * Builds a route through the lane graph visiting `waypoints` in order.
 *
 * The path is resampled at 1 m. Target points are spaced uniformly in
 * [min_spacing, max_spacing], with a mandatory target point at every junction
 * exit (the first point of a lane that follows a lane ending inside an
 * intersection). Throws std::invalid_argument when the waypoints cannot be
 * connected along the lane graph.
 */
Route build_route(const LaneMap& map, const std::vector<Vec2>& waypoints,
                  const TargetPointSpacing& spacing);

struct RouteProgress {
  double s{0.0};
  double lateral{0.0};
  double completed_fraction{0.0};
};

/// Unconstrained projection; also used to initialize the cursor.
RouteProgress route_progress(const Route& route, const Pose2D& pose);
/// Cursor-constrained projection: s never decreases below `previous.s`.
RouteProgress route_progress(const Route& route, const Pose2D& pose, const RouteProgress& previous);

/// First target point strictly ahead of s (by more than advance_epsilon); the last one otherwise.
Vec2 next_target_point(const Route& route, double s, double advance_epsilon = 0.0);
std::size_t next_target_index(const Route& route, double s, double advance_epsilon = 0.0);

enum class ActorKind { vehicle, pedestrian, cyclist };

struct Keyframe {
  double t{0.0};  ///< seconds after activation
  ControlCommand command;
};

struct SpeedKeyframe {
  double t{0.0};
  double target_speed{0.0};
};

/// Scripted behaviour. No reactive traffic model.
struct ActorBehavior {
  enum class Mode { constant, keyframed, follow_path };
  Mode mode{Mode::constant};
  ControlCommand command;                 ///< constant
  std::vector<Keyframe> keyframes;        ///< keyframed: last keyframe with t <= elapsed applies
  std::vector<Vec2> path;                 ///< follow_path, global coordinates
  double target_speed{0.0};               ///< follow_path
  std::vector<SpeedKeyframe> speed_profile;  ///< follow_path: overrides target_speed over time
};

struct Actor {
  int id{0};
  ActorKind kind{ActorKind::vehicle};
  VehicleState state;
  BicycleParams params;
  ActorBehavior behavior;
  double activation_time{0.0};
  ControlCommand last_command;  ///< action applied at the most recent tick
  double path_cursor{0.0};

  OrientedBox box() const { return vehicle_box(state.pose, params); }
};

/// Command an actor's behaviour prescribes at `time`. Updates the path cursor.
ControlCommand scripted_command(Actor& actor, double time);

enum class LightPhase { green, yellow, red };

struct PhaseSpan {
  LightPhase phase{LightPhase::green};
  double duration{1.0};
};

struct TrafficLight {
  int id{0};
  Vec2 stop_line_a;
  Vec2 stop_line_b;
  double heading{0.0};  ///< direction of travel across the stop line
  Polygon trigger_area;
  std::vector<PhaseSpan> schedule;
  double offset{0.0};  ///< seconds into the cycle at t = 0

  // Runtime: the cycle is re-anchored by light_change triggers.
  long anchor_tick{0};
  long anchor_offset_ticks{-1};  ///< -1: derive from `offset`

  LightPhase phase_at(long tick, double dt) const;
  /// Re-anchors the cycle so that schedule entry `index` starts at `tick`.
  void restart_at(std::size_t index, long tick, double dt);
  OrientedBox stop_line_box() const { return segment_box(stop_line_a, stop_line_b, 0.2); }
};

struct StopSign {
  int id{0};
  Polygon trigger_area;
};

struct Disturbance {
  double route_s{0.0};
  double lateral_offset{0.0};
  double heading_error{0.0};
  bool applied{false};
};

struct SimConfig {
  double dt{0.05};
  double max_episode_time{0.0};  ///< 0: derived from route length
  std::uint64_t rng_seed{0};
  double gnss_sigma{0.5585};
  double offroad_margin{1.0};
};

enum class RawEventKind {
  collision,
  offroad,
  stop_line_crossed,
  stop_zone_enter,
  stop_zone_exit,
  trigger_fired,
  disturbance_applied,
};

struct RawEvent {
  RawEventKind kind{RawEventKind::collision};
  long tick{0};
  double time{0.0};
  double route_s{0.0};
  int object_id{-1};  ///< actor, light, sign or trigger index
  ActorKind actor_kind{ActorKind::vehicle};
  LightPhase phase{LightPhase::green};
};

struct WorldState {
  double time{0.0};
  long tick{0};
  Actor ego;
  std::vector<Actor> actors;
  std::vector<TrafficLight> lights;
  std::vector<StopSign> signs;
  std::shared_ptr<const LaneMap> map;
  std::shared_ptr<const Route> route;
  std::vector<ScenarioTrigger> pending_triggers;
  std::vector<Disturbance> disturbances;
  RouteProgress progress;
  SimConfig config;
  Rng rng;

  // Event bookkeeping.
  std::set<int> overlapping_actors;
  std::set<int> occupied_stop_zones;
  bool offroad{false};
  int next_actor_id{1000};

  const Actor* find_actor(int id) const;
  LightPhase light_phase(const TrafficLight& light) const { return light.phase_at(tick, config.dt); }
};

/// Advances the world by one fixed step. Deterministic given the world (including its rng).
std::vector<RawEvent> tick(WorldState& world, const ControlCommand& ego_command);

/// Offsets the ego laterally along the route normal and in heading, once; logs the event.
void apply_disturbance(WorldState& world, Disturbance& d, std::vector<RawEvent>& events);

/// GNSS position with i.i.d. zero-mean Gaussian noise per axis.
Vec2 gnss_sample(Vec2 true_position, double sigma, Rng& rng);

/// Spawns the actor(s) or light changes described by a trigger, at the ego's current progress.
void fire_trigger(WorldState& world, const ScenarioTrigger& trigger, std::vector<RawEvent>& events);

/// True if the ego's bounding box overlaps the given polygon.
bool box_on_polygon(const OrientedBox& box, const Polygon& polygon);

}  // namespace drivebench
