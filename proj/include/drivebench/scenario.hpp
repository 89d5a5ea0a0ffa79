#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "drivebench/policies.hpp"
#include "drivebench/world.hpp"

namespace drivebench {

/// Everything needed to start an episode. Immutable once built; worlds are created per seed.
struct Scenario {
  std::string name;
  std::shared_ptr<const LaneMap> map;
  std::shared_ptr<const Route> route;
  std::vector<TrafficLight> lights;
  std::vector<StopSign> signs;
  std::vector<Actor> actors;
  std::vector<Disturbance> disturbances;
  std::vector<AmbiguityWindow> ambiguity;
  double start_speed{0.0};
  SimConfig sim;

  // Per-seed variation, drawn from streams independent of the world rng.
  double light_offset_jitter{0.0};        ///< seconds added to every light offset, U[0, jitter]
  double disturbance_s_jitter{0.0};       ///< meters, U[-j, j]
  double disturbance_offset_jitter{0.0};  ///< meters, U[-j, j]
};

/// Initial world for one seed: ego at the route start, triggers pending, jitter applied.
WorldState make_world(const Scenario& scenario, std::uint64_t seed);

/// Rectangle polygon of a sign or light trigger as an oriented box.
OrientedBox polygon_box(const Polygon& rectangle);

class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string scenario_to_json(const Scenario& scenario);
/// `source` names the input in diagnostics: "source:line:col: ..." for syntax errors,
/// "source: /json/pointer: ..." for schema errors.
Scenario scenario_from_json(const std::string& text, const std::string& source = "<scenario>");

void write_scenario_file(const std::string& path, const Scenario& scenario);
Scenario read_scenario_file(const std::string& path);

}  // namespace drivebench
