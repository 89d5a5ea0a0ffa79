#include "drivebench/fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace drivebench {

namespace {

struct Sample {
  Vec2 p;
  double h{0.0};
};

/// Road centerline sketch built from straight and circular pieces.
class Sketch {
 public:
  Sketch(Vec2 start, double heading) { samples_.push_back({start, heading}); }

  Sketch& straight(double length, double step = 1.0) {
    const Sample s0 = samples_.back();
    const int n = std::max(1, static_cast<int>(std::ceil(length / step - 1e-9)));
    for (int i = 1; i <= n; ++i) {
      const double d = length * i / n;
      samples_.push_back({s0.p + unit_from_angle(s0.h) * d, s0.h});
    }
    return *this;
  }

  /// Circular arc; positive angle turns left.
  Sketch& arc(double radius, double angle, double step = 0.5) {
    const Sample s0 = samples_.back();
    const double side = angle > 0.0 ? 1.0 : -1.0;
    const Vec2 center = s0.p + unit_from_angle(s0.h).left() * (side * radius);
    const double a0 = std::atan2(s0.p.y - center.y, s0.p.x - center.x);
    const int n = std::max(2, static_cast<int>(std::ceil(std::abs(angle) * radius / step)));
    for (int i = 1; i <= n; ++i) {
      const double a = a0 + angle * i / n;
      samples_.push_back({center + unit_from_angle(a) * radius, wrap_angle(s0.h + angle * i / n)});
    }
    return *this;
  }

  /// Lane offset to the left of the sketch direction; reversed when `reverse`.
  Polyline lane(double offset, bool reverse = false) const {
    std::vector<Vec2> pts;
    for (const auto& s : samples_) pts.push_back(s.p + unit_from_angle(s.h).left() * offset);
    if (reverse) std::reverse(pts.begin(), pts.end());
    return Polyline(pts);
  }

 private:
  std::vector<Sample> samples_;
};

Vec2 right_of(Vec2 v) { return v.right(); }

const std::array<Vec2, 4> kArmDirs{Vec2{-1.0, 0.0}, Vec2{0.0, -1.0}, Vec2{1.0, 0.0}, Vec2{0.0, 1.0}};

Polygon rectangle(Vec2 a, Vec2 b, double width) {
  const Vec2 u = (b - a) * (1.0 / (b - a).norm());
  const Vec2 n = u.left() * (0.5 * width);
  return {a - n, b - n, b + n, a + n};
}

Polyline connector_lane(Vec2 entry, Vec2 entry_dir, Vec2 exit, Vec2 exit_dir) {
  const double cross = entry_dir.cross(exit_dir);
  if (std::abs(cross) < 1e-9) {
    const double len = distance(entry, exit);
    const int n = std::max(2, static_cast<int>(std::ceil(len)));
    std::vector<Vec2> pts;
    for (int i = 0; i <= n; ++i) pts.push_back(entry + (exit - entry) * (static_cast<double>(i) / n));
    return Polyline(pts);
  }
  const double radius = std::abs((exit - entry).dot(entry_dir));
  const Vec2 normal = cross > 0.0 ? entry_dir.left() : right_of(entry_dir);
  const Vec2 center = entry + normal * radius;
  const double a0 = std::atan2(entry.y - center.y, entry.x - center.x);
  const double a1 = std::atan2(exit.y - center.y, exit.x - center.x);
  const double sweep = wrap_angle(a1 - a0);
  const int n = std::max(4, static_cast<int>(std::ceil(std::abs(sweep) * radius / 0.5)));
  std::vector<Vec2> pts;
  for (int i = 0; i <= n; ++i) pts.push_back(center + unit_from_angle(a0 + sweep * i / n) * radius);
  pts.front() = entry;
  pts.back() = exit;
  return Polyline(pts);
}

TrafficLight arm_light(int arm, Vec2 entrance, Vec2 travel, double lane_width, const JunctionOptions& o) {
  TrafficLight l;
  l.id = arm;
  const Vec2 across = travel.left() * (0.5 * lane_width);
  l.stop_line_a = entrance - across;
  l.stop_line_b = entrance + across;
  l.heading = std::atan2(travel.y, travel.x);
  l.trigger_area = rectangle(entrance - travel * 6.0, entrance, lane_width);
  const double red = o.green + o.yellow;
  l.schedule = {{LightPhase::green, o.green}, {LightPhase::yellow, o.yellow}, {LightPhase::red, red}};
  l.offset = (arm % 2 == 0) ? 0.0 : red;
  return l;
}

ScenarioTrigger trigger(double s, TriggerKind kind, std::map<std::string, double> params = {}) {
  return {s, kind, std::move(params)};
}

Scenario with_triggers(Scenario sc, std::vector<ScenarioTrigger> triggers) {
  Route r = *sc.route;
  r.triggers = std::move(triggers);
  sc.route = std::make_shared<const Route>(std::move(r));
  return sc;
}

Scenario junction_scenario(const std::string& name, const JunctionOptions& o, Turn turn, std::uint64_t tp_seed) {
  Junction j = make_junction(o);
  Route r = junction_route(j, 0, exit_arm(turn), tp_seed);
  Scenario sc = make_scenario(name, j.map, std::move(r));
  sc.lights = j.lights;
  sc.signs = j.signs;
  return sc;
}

}  // namespace

LaneMap straight_map(double length, double lane_width) {
  LaneMap m;
  m.lane_width = lane_width;
  Sketch s({0.0, 0.0}, 0.0);
  s.straight(length);
  m.lanes.push_back(s.lane(-0.5 * lane_width));
  m.lanes.push_back(s.lane(0.5 * lane_width, true));
  return m;
}

LaneMap curve_map(double approach, double radius, double angle, double exit, double lane_width) {
  LaneMap m;
  m.lane_width = lane_width;
  Sketch s({0.0, 0.0}, 0.0);
  s.straight(approach).arc(radius, angle).straight(exit);
  m.lanes.push_back(s.lane(-0.5 * lane_width));
  m.lanes.push_back(s.lane(0.5 * lane_width, true));
  return m;
}

std::size_t Junction::connector(std::size_t from, std::size_t to) const {
  for (const auto& c : connectors) {
    if (c[0] == from && c[1] == to) return c[2];
  }
  throw std::invalid_argument("no connector between these arms");
}

Junction make_junction(const JunctionOptions& o) {
  Junction j;
  j.options = o;
  j.map.lane_width = o.lane_width;
  const double h = o.half_size;
  const double w = o.lane_width;
  std::array<Vec2, 4> entrance{};
  std::array<Vec2, 4> exit{};
  for (std::size_t k = 0; k < 4; ++k) {
    const Vec2 d = kArmDirs[k];
    entrance[k] = d * h + right_of(d * -1.0) * (0.5 * w);
    exit[k] = d * h + right_of(d) * (0.5 * w);
    j.incoming[k] = j.map.lanes.size();
    j.map.lanes.push_back(Polyline({entrance[k] + d * o.arm_length, entrance[k]}).resampled(1.0));
    j.outgoing[k] = j.map.lanes.size();
    j.map.lanes.push_back(Polyline({exit[k], exit[k] + d * o.arm_length}).resampled(1.0));
  }
  for (std::size_t from = 0; from < 4; ++from) {
    for (std::size_t to = 0; to < 4; ++to) {
      if (from == to) continue;
      j.connectors.push_back({from, to, j.map.lanes.size()});
      j.map.lanes.push_back(connector_lane(entrance[from], kArmDirs[from] * -1.0, exit[to], kArmDirs[to]));
    }
  }
  j.map.intersections.push_back({{-h, -h}, {h, -h}, {h, h}, {-h, h}});
  for (std::size_t k = 0; k < 4; ++k) {
    const Vec2 travel = kArmDirs[k] * -1.0;
    if (o.lights) j.lights.push_back(arm_light(static_cast<int>(k), entrance[k], travel, w, o));
    if (o.stop_signs) {
      StopSign s;
      s.id = static_cast<int>(k);
      s.trigger_area = rectangle(entrance[k] - travel * 5.0, entrance[k] - travel * 1.0, w);
      j.signs.push_back(s);
    }
  }
  return j;
}

std::size_t exit_arm(Turn turn) {
  switch (turn) {
    case Turn::straight: return 2;
    case Turn::right: return 1;
    case Turn::left: return 3;
  }
  return 2;
}

Route junction_route(const Junction& j, std::size_t from, std::size_t to, std::uint64_t tp_seed) {
  const Polyline& in = j.map.lanes[j.incoming[from]];
  const Polyline& conn = j.map.lanes[j.connector(from, to)];
  const Polyline& out = j.map.lanes[j.outgoing[to]];
  return build_route(j.map, {in.points().front(), conn.point_at(0.5 * conn.length()), out.points().back()},
                     {20.0, 50.0, tp_seed});
}

Route lane_route(const LaneMap& map, std::size_t lane, std::uint64_t tp_seed, double s_from, double s_to) {
  const Polyline& l = map.lanes.at(lane);
  if (s_to < 0.0) s_to = l.length();
  return build_route(map, {l.point_at(s_from), l.point_at(s_to)}, {20.0, 50.0, tp_seed});
}

Scenario make_scenario(std::string name, LaneMap map, Route route) {
  Scenario sc;
  sc.name = std::move(name);
  sc.map = std::make_shared<const LaneMap>(std::move(map));
  sc.route = std::make_shared<const Route>(std::move(route));
  return sc;
}

std::vector<Scenario> fixture_suite() {
  std::vector<Scenario> out;
  JunctionOptions plain;
  JunctionOptions lights;
  lights.lights = true;
  JunctionOptions signs;
  signs.stop_signs = true;

  {
    LaneMap m = straight_map(150.0);
    out.push_back(make_scenario("straight_150", m, lane_route(m, 0, 150)));
  }
  {
    LaneMap m = straight_map(300.0);
    Route r = lane_route(m, 0, 3);
    out.push_back(with_triggers(make_scenario("straight_oncoming", m, r),
                                {trigger(20.0, TriggerKind::opposing_vehicle, {{"ahead_jitter", 10.0}}),
                                 trigger(150.0, TriggerKind::opposing_vehicle, {{"speed", 8.0}})}));
  }
  out.push_back(junction_scenario("junction_straight", plain, Turn::straight, 4));
  out.push_back(junction_scenario("junction_left", plain, Turn::left, 5));
  out.push_back(junction_scenario("junction_right", plain, Turn::right, 6));
  for (auto [name, turn] : {std::pair{"lights_straight", Turn::straight}, std::pair{"lights_left", Turn::left},
                            std::pair{"lights_right", Turn::right}}) {
    Scenario sc = junction_scenario(name, lights, turn, 7 + static_cast<std::uint64_t>(turn));
    sc.light_offset_jitter = 2.0 * (lights.green + lights.yellow);
    out.push_back(std::move(sc));
  }
  for (auto [name, turn] : {std::pair{"stop_straight", Turn::straight}, std::pair{"stop_left", Turn::left},
                            std::pair{"stop_right", Turn::right}}) {
    out.push_back(junction_scenario(name, signs, turn, 10 + static_cast<std::uint64_t>(turn)));
  }
  {
    LaneMap m = straight_map(200.0);
    Route r = lane_route(m, 0, 13);
    out.push_back(with_triggers(make_scenario("pedestrian_right", m, r),
                                {trigger(50.0, TriggerKind::pedestrian_crossing, {{"ahead_jitter", 4.0}})}));
    out.push_back(with_triggers(
        make_scenario("pedestrian_left", m, lane_route(m, 0, 14)),
        {trigger(60.0, TriggerKind::pedestrian_crossing, {{"side", 4.25}, {"speed_jitter", 0.4}}),
         trigger(140.0, TriggerKind::pedestrian_crossing, {{"ahead", 20.0}})}));
  }
  {
    LaneMap m = straight_map(260.0);
    out.push_back(with_triggers(make_scenario("cyclist_cut_in", m, lane_route(m, 0, 15, 0.0, 200.0)),
                                {trigger(40.0, TriggerKind::cyclist_cut_in, {{"ahead_jitter", 3.0}})}));
    out.push_back(with_triggers(make_scenario("cyclist_maybe_yield", m, lane_route(m, 0, 16, 0.0, 200.0)),
                                {trigger(60.0, TriggerKind::cyclist_cut_in, {{"yield_probability", 0.5}})}));
  }
  {
    LaneMap m = curve_map(60.0, 25.0, kPi / 2.0, 80.0);
    out.push_back(make_scenario("curve_left", m, lane_route(m, 0, 17)));
    LaneMap mr = curve_map(60.0, 30.0, -kPi / 2.0, 80.0);
    out.push_back(make_scenario("curve_right", mr, lane_route(mr, 0, 18)));
  }
  {
    Scenario sc = junction_scenario("lights_pedestrian", lights, Turn::straight, 19);
    sc.light_offset_jitter = 2.0 * (lights.green + lights.yellow);
    out.push_back(with_triggers(std::move(sc), {trigger(80.0, TriggerKind::pedestrian_crossing)}));
  }
  {
    LaneMap m = straight_map(400.0);
    Scenario sc = make_scenario("lead_vehicle", m, lane_route(m, 0, 20, 0.0, 220.0));
    Actor lead;
    lead.id = 1;
    lead.kind = ActorKind::vehicle;
    const Polyline& lane = sc.map->lanes[0];
    const Vec2 p = lane.point_at(30.0);
    lead.state.pose = {p.x, p.y, 0.0};
    lead.state.speed = 5.0;
    lead.behavior.mode = ActorBehavior::Mode::follow_path;
    lead.behavior.path = {p, lane.points().back()};
    lead.behavior.target_speed = 5.0;
    sc.actors.push_back(lead);
    out.push_back(std::move(sc));
  }
  {
    Scenario sc = junction_scenario("stop_pedestrian", signs, Turn::left, 21);
    out.push_back(with_triggers(std::move(sc), {trigger(20.0, TriggerKind::pedestrian_crossing)}));
  }
  return out;
}

std::vector<Scenario> deviation_suite() {
  std::vector<Scenario> out;
  const double w = 3.5;
  for (int i = 0; i < 10; ++i) {
    const double length = 260.0 + 10.0 * i;
    const double disturb_s = 90.0 + 3.0 * i;
    const double diverge = disturb_s + 25.0 + 2.0 * (i % 4);
    const double angle = (12.0 + 2.0 * (i % 5)) * kPi / 180.0;

    LaneMap m = straight_map(length, w);
    Sketch ramp({0.0, -w}, 0.0);
    ramp.straight(diverge).arc(80.0, -angle).straight(250.0);
    m.lanes.push_back(ramp.lane(0.0));

    Route r = lane_route(m, 0, 100 + static_cast<std::uint64_t>(i));
    Scenario sc = make_scenario("ramp_" + std::to_string(i), m, std::move(r));
    sc.start_speed = 6.0;
    sc.disturbances.push_back({disturb_s, -3.0, 0.0, false});
    sc.disturbance_s_jitter = 5.0;
    sc.disturbance_offset_jitter = 0.3;
    out.push_back(std::move(sc));
  }
  return out;
}

Scenario corner_scenario(bool far_tp) {
  const double approach = 80.0;
  const double radius = 20.0;
  const double w = 3.5;
  LaneMap m = curve_map(approach, radius, kPi / 2.0, 80.0, w);
  const Polyline path = m.lanes[0].resampled(1.0);
  const double disturb_s = approach - 20.0;
  const double exit_s = approach + 0.5 * kPi * (radius + 0.5 * w);
  std::vector<Vec2> tps{path.point_at(30.0)};
  if (!far_tp) tps.push_back(path.point_at(disturb_s + 15.0));
  tps.push_back(path.point_at(exit_s + 25.0));
  tps.push_back(path.points().back());
  Route r = make_route(path, tps);
  Scenario sc = make_scenario(far_tp ? "corner_far_tp" : "corner_near_tp", m, std::move(r));
  sc.start_speed = 6.0;
  sc.disturbances.push_back({disturb_s, -3.0, 0.0, false});
  sc.disturbance_s_jitter = 2.0;
  sc.disturbance_offset_jitter = 0.3;
  return sc;
}

std::vector<Scenario> uncertainty_suite() {
  std::vector<Scenario> out;
  const std::vector<AmbiguityAlternative> cut_in_alts{{0, 0.325, 0.125}, {2, 0.25, 0.1}};
  for (int i = 0; i < 4; ++i) {
    LaneMap m = straight_map(320.0);
    Scenario sc = make_scenario("cut_in_" + std::to_string(i), m, lane_route(m, 0, 200 + i, 0.0, 240.0));
    const double s1 = 40.0 + 5.0 * i;
    const double s2 = s1 + 100.0;
    sc = with_triggers(std::move(sc), {trigger(s1, TriggerKind::cyclist_cut_in, {{"ahead_jitter", 2.0}, {"speed_jitter", 1.5}}),
                                       trigger(s2, TriggerKind::cyclist_cut_in, {{"ahead_jitter", 2.0}, {"speed_jitter", 1.5}})});
    sc.ambiguity.push_back({s1, s1 + 40.0, cut_in_alts, 6.0});
    sc.ambiguity.push_back({s2, s2 + 40.0, cut_in_alts, 6.0});
    out.push_back(std::move(sc));
  }
  JunctionOptions o;
  o.lights = true;
  o.arm_length = 80.0;
  for (int i = 0; i < 2; ++i) {
    Junction j = make_junction(o);
    Route r = junction_route(j, 0, exit_arm(i == 0 ? Turn::straight : Turn::left), 210 + i);
    for (auto& l : j.lights) l.offset = (l.id % 2 == 0) ? 0.0 : o.green + o.yellow;
    Scenario sc = make_scenario("light_change_" + std::to_string(i), j.map, std::move(r));
    sc.lights = j.lights;
    // Arm 0 starts green; the change to yellow is triggered on approach.
    for (auto& l : sc.lights) {
      if (l.id == 0) l.schedule[0].duration = 1e6;
    }
    const double change_s = 45.0 + 5.0 * i;
    sc = with_triggers(std::move(sc),
                       {trigger(change_s, TriggerKind::light_change, {{"light", 0.0}, {"phase", 1.0}}),
                        trigger(change_s + 70.0, TriggerKind::cyclist_cut_in, {{"speed_jitter", 1.5}})});
    sc.ambiguity.push_back({change_s - 20.0, change_s + 20.0, {{kStopClass, 0.4, 0.15}}, 4.0});
    sc.ambiguity.push_back({change_s + 70.0, change_s + 110.0, cut_in_alts, 6.0});
    out.push_back(std::move(sc));
  }
  return out;
}

Scenario urban_loop() {
  LaneMap m;
  m.lane_width = 3.5;
  Sketch s({0.0, 0.0}, 0.0);
  s.straight(80.0).arc(20.0, kPi / 2.0).straight(60.0).arc(25.0, -kPi / 2.0).straight(80.0);
  s.arc(15.0, kPi / 2.0).straight(100.0).arc(30.0, -kPi / 2.0).straight(120.0);
  m.lanes.push_back(s.lane(-0.5 * m.lane_width));
  m.lanes.push_back(s.lane(0.5 * m.lane_width, true));
  Route r = lane_route(m, 0, 400);
  return with_triggers(make_scenario("urban_loop", m, std::move(r)),
                       {trigger(170.0, TriggerKind::pedestrian_crossing, {{"ahead", 20.0}})});
}

std::vector<Scenario> occlusion_suite() {
  std::vector<Scenario> out;
  JunctionOptions o;
  o.stop_signs = true;
  int k = 0;
  for (Turn t : {Turn::straight, Turn::left, Turn::right}) {
    for (double arm : {50.0, 70.0}) {
      o.arm_length = arm;
      out.push_back(junction_scenario("occluded_stop_" + std::to_string(k), o, t, 300 + k));
      ++k;
    }
  }
  return out;
}

}  // namespace drivebench
