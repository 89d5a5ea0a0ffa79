#pragma once

#include <array>
#include <optional>
#include <vector>

#include "drivebench/scenario.hpp"

namespace drivebench {

enum class Turn { straight, left, right };

/// Two-lane road along +x from the origin; lane 0 drives +x on the right, lane 1 drives back on the left.
LaneMap straight_map(double length, double lane_width = 3.5);

/// Two-lane road that runs straight, bends by `angle` (positive left) with the given radius, then runs straight.
LaneMap curve_map(double approach, double radius, double angle, double exit, double lane_width = 3.5);

struct JunctionOptions {
  double half_size{10.0};
  double arm_length{60.0};
  double lane_width{3.5};
  bool lights{false};
  bool stop_signs{false};
  double green{8.0};
  double yellow{2.0};
};

/**
 * Four-way junction centered at the origin. Arm k points along
 * -x, -y, +x, +y for k = 0..3; the ego approaches from arm 0 driving +x.
 */
struct Junction {
  LaneMap map;
  JunctionOptions options;
  std::array<std::size_t, 4> incoming{};
  std::array<std::size_t, 4> outgoing{};
  std::vector<TrafficLight> lights;  ///< one per arm when enabled, id = arm
  std::vector<StopSign> signs;       ///< one per arm when enabled, id = arm

  /// Connector lane from arm `from` to arm `to`.
  std::size_t connector(std::size_t from, std::size_t to) const;
  std::vector<std::array<std::size_t, 3>> connectors;  ///< (from, to, lane)
};

Junction make_junction(const JunctionOptions& options);

/// Exit arm reached from arm 0 by a turn.
std::size_t exit_arm(Turn turn);

/// Route through a junction from the far end of arm `from` to the far end of arm `to`.
Route junction_route(const Junction& j, std::size_t from, std::size_t to, std::uint64_t tp_seed);

/// Route along lane 0 of a map from `s_from` to `s_to`.
Route lane_route(const LaneMap& map, std::size_t lane, std::uint64_t tp_seed, double s_from = 0.0,
                 double s_to = -1.0);

/// Wraps a map and route into a scenario with default simulation settings.
Scenario make_scenario(std::string name, LaneMap map, Route route);

/// 20 routes: straights, turns, lights, stop signs, pedestrians, cyclists, oncoming traffic.
std::vector<Scenario> fixture_suite();

/// Ten roads with a diverging ramp on the right and a 3 m disturbance toward it at mid-route.
std::vector<Scenario> deviation_suite();

/**
 * Left corner with a lateral disturbance before it. With `far_tp` the next
 * target point lies well past the corner exit; otherwise it sits just after
 * the disturbance, before the corner.
 */
Scenario corner_scenario(bool far_tp);

/// Light-change and cyclist cut-in routes with speed ambiguity windows.
std::vector<Scenario> uncertainty_suite();

/// About 600 m of alternating left and right bends with one pedestrian crossing.
Scenario urban_loop();

/// Stop-sign junctions whose signs are hidden once the ego is on them.
std::vector<Scenario> occlusion_suite();

}  // namespace drivebench
