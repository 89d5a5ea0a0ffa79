#include "drivebench/world.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <stdexcept>

namespace drivebench {

// ---------------------------------------------------------------------------
// LaneMap

std::vector<std::vector<std::size_t>> LaneMap::successors() const {
  std::vector<std::vector<std::size_t>> out(lanes.size());
  for (std::size_t i = 0; i < lanes.size(); ++i) {
    const Vec2 end = lanes[i].points().back();
    for (std::size_t j = 0; j < lanes.size(); ++j) {
      if (i != j && distance(end, lanes[j].points().front()) < 0.05) out[i].push_back(j);
    }
  }
  return out;
}

double LaneMap::distance_to_nearest_lane(Vec2 p) const {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& lane : lanes) best = std::min(best, lane.project(p).distance);
  return best;
}

bool LaneMap::in_intersection(Vec2 p) const {
  return std::any_of(intersections.begin(), intersections.end(),
                     [&](const Polygon& poly) { return polygon_contains(poly, p); });
}

double ScenarioTrigger::param(const std::string& key, double fallback) const {
  const auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

// ---------------------------------------------------------------------------
// Routes

Route make_route(const Polyline& path, const std::vector<Vec2>& target_points,
                 std::vector<ScenarioTrigger> triggers) {
  Route route;
  route.path = path;
  route.triggers = std::move(triggers);
  for (const Vec2& tp : target_points) {
    const Projection proj = path.project(tp);
    route.target_points.push_back(proj.point);
    route.target_s.push_back(proj.s);
  }
  return route;
}

namespace {

struct LaneLocation {
  std::size_t lane{0};
  double s{0.0};
};

LaneLocation locate_on_lanes(const LaneMap& map, Vec2 p) {
  LaneLocation best;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < map.lanes.size(); ++i) {
    const Projection proj = map.lanes[i].project(p);
    if (proj.distance < best_d) {
      best_d = proj.distance;
      best = {i, proj.s};
    }
  }
  if (best_d > 0.5 * map.lane_width) {
    throw std::invalid_argument("route waypoint is not on any lane");
  }
  return best;
}

std::vector<std::size_t> lane_path(const std::vector<std::vector<std::size_t>>& successors,
                                   std::size_t from, std::size_t to) {
  std::vector<long> parent(successors.size(), -1);
  std::vector<bool> seen(successors.size(), false);
  std::deque<std::size_t> queue{from};
  seen[from] = true;
  while (!queue.empty()) {
    const std::size_t cur = queue.front();
    queue.pop_front();
    for (std::size_t next : successors[cur]) {
      if (seen[next]) continue;
      seen[next] = true;
      parent[next] = static_cast<long>(cur);
      if (next == to) {
        std::vector<std::size_t> out{to};
        for (long p = parent[to]; p >= 0; p = parent[static_cast<std::size_t>(p)]) {
          out.push_back(static_cast<std::size_t>(p));
          if (static_cast<std::size_t>(p) == from) break;
        }
        std::reverse(out.begin(), out.end());
        return out;
      }
      queue.push_back(next);
    }
  }
  return {};
}

struct LanePiece {
  std::size_t lane;
  double s_from;
  double s_to;
};

}  // namespace

Route build_route(const LaneMap& map, const std::vector<Vec2>& waypoints,
                  const TargetPointSpacing& spacing) {
  if (waypoints.size() < 2) throw std::invalid_argument("route needs at least two waypoints");
  if (spacing.min_spacing <= 0.0 || spacing.max_spacing < spacing.min_spacing) {
    throw std::invalid_argument("invalid target point spacing");
  }
  const auto successors = map.successors();

  std::vector<LanePiece> pieces;
  LaneLocation cur = locate_on_lanes(map, waypoints.front());
  for (std::size_t w = 1; w < waypoints.size(); ++w) {
    const LaneLocation next = locate_on_lanes(map, waypoints[w]);
    if (next.lane == cur.lane && next.s >= cur.s) {
      pieces.push_back({cur.lane, cur.s, next.s});
    } else {
      const auto lanes = lane_path(successors, cur.lane, next.lane);
      if (lanes.empty()) throw std::invalid_argument("route waypoints are not connectable along the lane graph");
      pieces.push_back({cur.lane, cur.s, map.lanes[cur.lane].length()});
      for (std::size_t k = 1; k + 1 < lanes.size(); ++k) {
        pieces.push_back({lanes[k], 0.0, map.lanes[lanes[k]].length()});
      }
      pieces.push_back({next.lane, 0.0, next.s});
    }
    cur = next;
  }

  // Concatenate the pieces and remember where the route leaves a junction.
  std::vector<Vec2> raw;
  std::vector<double> mandatory_raw_s;
  double raw_length = 0.0;
  std::size_t prev_lane = std::numeric_limits<std::size_t>::max();
  auto append = [&](Vec2 p) {
    if (!raw.empty()) {
      const double d = distance(raw.back(), p);
      if (d < 1e-6) return;
      raw_length += d;
    }
    raw.push_back(p);
  };
  for (const LanePiece& piece : pieces) {
    if (piece.s_to - piece.s_from < 1e-9) continue;
    const Polyline& lane = map.lanes[piece.lane];
    if (prev_lane != std::numeric_limits<std::size_t>::max() && prev_lane != piece.lane &&
        map.in_intersection(map.lanes[prev_lane].point_at(0.5 * map.lanes[prev_lane].length())) &&
        !map.in_intersection(lane.point_at(0.5 * lane.length()))) {
      mandatory_raw_s.push_back(raw_length);
    }
    append(lane.point_at(piece.s_from));
    const auto& arc = lane.arc_lengths();
    for (std::size_t i = 0; i < lane.size(); ++i) {
      if (arc[i] > piece.s_from && arc[i] < piece.s_to) append(lane.points()[i]);
    }
    append(lane.point_at(piece.s_to));
    prev_lane = piece.lane;
  }
  const Polyline raw_line(raw);

  // 1 m resampling with junction exits inserted as exact vertices.
  std::vector<std::pair<double, bool>> samples;
  const double total = raw_line.length();
  for (double s = 0.0; s < total - 1e-9; s += 1.0) samples.emplace_back(s, false);
  samples.emplace_back(total, false);
  for (double m : mandatory_raw_s) {
    std::erase_if(samples, [&](const auto& smp) { return !smp.second && std::abs(smp.first - m) < 0.05; });
    samples.emplace_back(m, true);
  }
  std::sort(samples.begin(), samples.end());
  if (samples.size() >= 2 && samples[samples.size() - 1].first - samples[samples.size() - 2].first < 0.05) {
    samples.erase(samples.end() - 2);
  }
  std::vector<Vec2> pts;
  pts.reserve(samples.size());
  for (const auto& smp : samples) pts.push_back(raw_line.point_at(smp.first));
  Polyline path(pts);
  std::vector<double> mandatory;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (samples[i].second) mandatory.push_back(path.arc_lengths()[i]);
  }

  // Target points.
  Rng rng = make_rng(spacing.seed, 0x7470);
  std::vector<double> tp_s;
  const double length = path.length();
  double last = 0.0;
  while (true) {
    double next = last + uniform(rng, spacing.min_spacing, spacing.max_spacing);
    const auto m = std::find_if(mandatory.begin(), mandatory.end(), [&](double v) { return v > last + 1e-6; });
    if (m != mandatory.end() && *m <= next) next = *m;
    const bool is_mandatory = m != mandatory.end() && next == *m;
    if (next >= length || (!is_mandatory && length - next < 5.0 && length - last <= spacing.max_spacing)) {
      tp_s.push_back(length);
      break;
    }
    tp_s.push_back(next);
    last = next;
  }

  Route route;
  route.path = std::move(path);
  for (double s : tp_s) {
    route.target_s.push_back(s);
    route.target_points.push_back(route.path.point_at(s));
  }
  return route;
}

RouteProgress route_progress(const Route& route, const Pose2D& pose) {
  const Projection proj = route.path.project(pose.position());
  const double length = route.length();
  return {proj.s, proj.lateral, length > 0.0 ? std::clamp(proj.s / length, 0.0, 1.0) : 1.0};
}

RouteProgress route_progress(const Route& route, const Pose2D& pose, const RouteProgress& previous) {
  const Projection proj = route.path.project(pose.position(), previous.s - 2.0, previous.s + 15.0);
  const double s = std::max(previous.s, proj.s);
  const double length = route.length();
  return {s, proj.lateral, length > 0.0 ? std::clamp(s / length, 0.0, 1.0) : 1.0};
}

std::size_t next_target_index(const Route& route, double s, double advance_epsilon) {
  for (std::size_t i = 0; i < route.target_s.size(); ++i) {
    if (route.target_s[i] > s + advance_epsilon) return i;
  }
  return route.target_s.empty() ? 0 : route.target_s.size() - 1;
}

Vec2 next_target_point(const Route& route, double s, double advance_epsilon) {
  if (route.target_points.empty()) return route.path.points().back();
  return route.target_points[next_target_index(route, s, advance_epsilon)];
}

// ---------------------------------------------------------------------------
// Actors

namespace {

double profile_speed(const ActorBehavior& b, double elapsed) {
  double v = b.target_speed;
  for (const auto& kf : b.speed_profile) {
    if (kf.t <= elapsed) v = kf.target_speed;
  }
  return v;
}

}  // namespace

ControlCommand scripted_command(Actor& actor, double time) {
  const ActorBehavior& b = actor.behavior;
  const double elapsed = time - actor.activation_time;
  switch (b.mode) {
    case ActorBehavior::Mode::constant:
      return b.command;
    case ActorBehavior::Mode::keyframed: {
      ControlCommand cmd;
      for (const auto& kf : b.keyframes) {
        if (kf.t <= elapsed + 1e-9) cmd = kf.command;
      }
      return cmd;
    }
    case ActorBehavior::Mode::follow_path: {
      if (b.path.size() < 2) return {0.0, 0.0, true};
      const Polyline line(b.path);
      const VehicleState& st = actor.state;
      const Projection proj = line.project(st.pose.position(), actor.path_cursor - 2.0, actor.path_cursor + 10.0);
      actor.path_cursor = std::max(actor.path_cursor, proj.s);
      const double lookahead = std::max(3.0, 0.8 * st.speed + 2.0);
      const Vec2 target = line.extrapolate(actor.path_cursor + lookahead);
      const Vec2 local = global_to_local(st.pose, target);
      const double alpha = std::atan2(local.y, local.x);
      const double delta = std::atan(2.0 * actor.params.wheelbase() * std::sin(alpha) / lookahead);
      ControlCommand cmd;
      cmd.steer = std::clamp(-delta / actor.params.max_steer_angle, -1.0, 1.0);
      double vt = profile_speed(b, elapsed);
      if (actor.path_cursor >= line.length() - 0.5) vt = 0.0;
      if (vt <= 0.01) {
        cmd.brake = st.speed > 0.0;
      } else {
        cmd.throttle = std::clamp(0.8 * (vt - st.speed), 0.0, 1.0);
        cmd.brake = st.speed > vt + 0.3;
      }
      return cmd;
    }
  }
  return {};
}

// ---------------------------------------------------------------------------
// Traffic lights

namespace {

long phase_ticks(double duration, double dt) {
  return std::max(1L, std::lround(duration / dt));
}

}  // namespace

LightPhase TrafficLight::phase_at(long tick, double dt) const {
  if (schedule.empty()) return LightPhase::green;
  long cycle = 0;
  for (const auto& span : schedule) cycle += phase_ticks(span.duration, dt);
  const long offset_ticks = anchor_offset_ticks >= 0 ? anchor_offset_ticks : std::lround(offset / dt);
  long pos = (tick - anchor_tick + offset_ticks) % cycle;
  if (pos < 0) pos += cycle;
  for (const auto& span : schedule) {
    const long n = phase_ticks(span.duration, dt);
    if (pos < n) return span.phase;
    pos -= n;
  }
  return schedule.back().phase;
}

void TrafficLight::restart_at(std::size_t index, long tick, double dt) {
  long offset_ticks = 0;
  for (std::size_t i = 0; i < index && i < schedule.size(); ++i) offset_ticks += phase_ticks(schedule[i].duration, dt);
  anchor_tick = tick;
  anchor_offset_ticks = offset_ticks;
}

// ---------------------------------------------------------------------------
// World

const Actor* WorldState::find_actor(int id) const {
  for (const auto& a : actors) {
    if (a.id == id) return &a;
  }
  return nullptr;
}

bool box_on_polygon(const OrientedBox& box, const Polygon& polygon) {
  return convex_polygon_overlaps_box(polygon, box);
}

Vec2 gnss_sample(Vec2 true_position, double sigma, Rng& rng) {
  if (sigma <= 0.0) return true_position;
  std::normal_distribution<double> noise(0.0, sigma);
  const double nx = noise(rng);
  const double ny = noise(rng);
  return {true_position.x + nx, true_position.y + ny};
}

namespace {

double jittered(const ScenarioTrigger& t, const std::string& key, double fallback, Rng& rng) {
  const double base = t.param(key, fallback);
  const double j = t.param(key + "_jitter", 0.0);
  return j > 0.0 ? base + uniform(rng, -j, j) : base;
}

}  // namespace

void fire_trigger(WorldState& world, const ScenarioTrigger& trigger, std::vector<RawEvent>& events) {
  const Route& route = *world.route;
  const double w = world.map ? world.map->lane_width : 3.5;
  const double s0 = world.progress.s;
  Rng& rng = world.rng;

  auto frame_at = [&](double s) {
    const double sc = std::clamp(s, 0.0, route.length());
    return std::pair{route.path.point_at(sc), route.path.heading_at(sc)};
  };

  switch (trigger.kind) {
    case TriggerKind::pedestrian_crossing: {
      const double ahead = jittered(trigger, "ahead", 15.0, rng);
      const double side = trigger.param("side", -(0.5 * w + 2.5));
      const double speed = jittered(trigger, "speed", 1.5, rng);
      const double walk = trigger.param("walk", 2.0 * std::abs(side));
      const auto [p, h] = frame_at(s0 + ahead);
      Actor ped;
      ped.id = world.next_actor_id++;
      ped.kind = ActorKind::pedestrian;
      ped.params = BicycleParams::pedestrian();
      ped.state.pose = {p.x + unit_from_angle(h).left().x * side, p.y + unit_from_angle(h).left().y * side,
                        wrap_angle(h + (side < 0.0 ? 0.5 * kPi : -0.5 * kPi))};
      ped.state.speed = speed;
      ped.behavior.mode = ActorBehavior::Mode::keyframed;
      ped.behavior.keyframes = {{0.0, {}}, {walk / std::max(speed, 1e-3), {0.0, 0.0, true}}};
      ped.activation_time = world.time;
      world.actors.push_back(ped);
      break;
    }
    case TriggerKind::cyclist_cut_in: {
      const double ahead = jittered(trigger, "ahead", 12.0, rng);
      const double side = trigger.param("side", -(0.5 * w + 1.5));
      const double speed = jittered(trigger, "speed", 4.0, rng);
      const double merge = trigger.param("merge_length", 8.0);
      const double yield_probability = trigger.param("yield_probability", 0.0);
      const bool yields = uniform(rng, 0.0, 1.0) < yield_probability;
      const auto [p, h] = frame_at(s0 + ahead);
      const Vec2 spawn = p + unit_from_angle(h).left() * side;
      std::vector<Vec2> path{spawn};
      const double s_merge = s0 + ahead + merge;
      for (double s = s_merge; s <= std::max(route.length(), s_merge) + 150.0; s += 2.0) {
        path.push_back(route.path.extrapolate(s));
      }
      const Vec2 d = path[1] - path[0];
      Actor bike;
      bike.id = world.next_actor_id++;
      bike.kind = ActorKind::cyclist;
      bike.params = BicycleParams::cyclist();
      bike.state.pose = {spawn.x, spawn.y, std::atan2(d.y, d.x)};
      bike.activation_time = world.time;
      if (yields) {
        bike.state.pose.yaw = h;
        bike.state.speed = 0.0;
        bike.behavior.mode = ActorBehavior::Mode::constant;
        bike.behavior.command = {0.0, 0.0, true};
      } else {
        bike.state.speed = speed;
        bike.behavior.mode = ActorBehavior::Mode::follow_path;
        bike.behavior.path = std::move(path);
        bike.behavior.target_speed = trigger.param("cruise_speed", speed);
      }
      world.actors.push_back(bike);
      break;
    }
    case TriggerKind::opposing_vehicle: {
      const double ahead = jittered(trigger, "ahead", 60.0, rng);
      const double speed = jittered(trigger, "speed", 6.0, rng);
      const double offset = trigger.param("lane_offset", w);
      const double s_start = std::min(route.length(), s0 + ahead);
      std::vector<Vec2> path;
      for (double s = s_start; s >= std::max(0.0, s_start - 200.0); s -= 2.0) {
        const auto [p, h] = frame_at(s);
        path.push_back(p + unit_from_angle(h).left() * offset);
      }
      if (path.size() < 2) break;
      const Vec2 d = path[1] - path[0];
      Actor car;
      car.id = world.next_actor_id++;
      car.kind = ActorKind::vehicle;
      car.params = BicycleParams::car();
      car.state.pose = {path[0].x, path[0].y, std::atan2(d.y, d.x)};
      car.state.speed = speed;
      car.behavior.mode = ActorBehavior::Mode::follow_path;
      car.behavior.path = std::move(path);
      car.behavior.target_speed = speed;
      car.activation_time = world.time;
      world.actors.push_back(car);
      break;
    }
    case TriggerKind::light_change: {
      const int light_id = static_cast<int>(trigger.param("light", 0.0));
      const auto phase_index = static_cast<std::size_t>(trigger.param("phase", 1.0));
      for (auto& light : world.lights) {
        if (light.id == light_id) light.restart_at(phase_index, world.tick, world.config.dt);
      }
      break;
    }
  }
  RawEvent ev;
  ev.kind = RawEventKind::trigger_fired;
  ev.tick = world.tick;
  ev.time = world.time;
  ev.route_s = s0;
  ev.object_id = static_cast<int>(trigger.kind);
  events.push_back(ev);
}

void apply_disturbance(WorldState& world, Disturbance& d, std::vector<RawEvent>& events) {
  if (d.applied) return;
  const Route& route = *world.route;
  const Vec2 normal = unit_from_angle(route.path.heading_at(world.progress.s)).left();
  Pose2D& pose = world.ego.state.pose;
  pose.x += normal.x * d.lateral_offset;
  pose.y += normal.y * d.lateral_offset;
  pose.yaw = wrap_angle(pose.yaw + d.heading_error);
  d.applied = true;
  world.progress = route_progress(route, pose, world.progress);
  RawEvent ev;
  ev.kind = RawEventKind::disturbance_applied;
  ev.tick = world.tick;
  ev.time = world.time;
  ev.route_s = world.progress.s;
  events.push_back(ev);
}

std::vector<RawEvent> tick(WorldState& world, const ControlCommand& ego_command) {
  std::vector<RawEvent> events;
  const double dt = world.config.dt;
  const Vec2 prev_pos = world.ego.state.pose.position();

  world.ego.state = step_bicycle(world.ego.state, ego_command, world.ego.params, dt);
  world.ego.last_command = ego_command;
  for (auto& actor : world.actors) {
    const ControlCommand cmd = scripted_command(actor, world.time);
    actor.state = step_bicycle(actor.state, cmd, actor.params, dt);
    actor.last_command = cmd;
  }
  ++world.tick;
  world.time = static_cast<double>(world.tick) * dt;

  const Route& route = *world.route;
  world.progress = route_progress(route, world.ego.state.pose, world.progress);

  auto make_event = [&](RawEventKind kind) {
    RawEvent ev;
    ev.kind = kind;
    ev.tick = world.tick;
    ev.time = world.time;
    ev.route_s = world.progress.s;
    return ev;
  };

  for (auto& d : world.disturbances) {
    if (!d.applied && world.progress.s >= d.route_s) apply_disturbance(world, d, events);
  }

  for (std::size_t i = 0; i < world.pending_triggers.size();) {
    if (world.progress.s >= world.pending_triggers[i].route_s) {
      const ScenarioTrigger trig = world.pending_triggers[i];
      world.pending_triggers.erase(world.pending_triggers.begin() + static_cast<long>(i));
      fire_trigger(world, trig, events);
    } else {
      ++i;
    }
  }

  const OrientedBox ego_box = world.ego.box();
  for (const auto& actor : world.actors) {
    const bool overlap = obb_overlap(ego_box, actor.box());
    const bool was = world.overlapping_actors.contains(actor.id);
    if (overlap && !was) {
      RawEvent ev = make_event(RawEventKind::collision);
      ev.object_id = actor.id;
      ev.actor_kind = actor.kind;
      events.push_back(ev);
      world.overlapping_actors.insert(actor.id);
    } else if (!overlap && was) {
      world.overlapping_actors.erase(actor.id);
    }
  }

  if (world.map && world.map->offroad_is_collision) {
    const Vec2 pos = world.ego.state.pose.position();
    const bool off = !world.map->in_intersection(pos) &&
                     world.map->distance_to_nearest_lane(pos) > 0.5 * world.map->lane_width + world.config.offroad_margin;
    if (off && !world.offroad) events.push_back(make_event(RawEventKind::offroad));
    world.offroad = off;
  }

  const Vec2 pos = world.ego.state.pose.position();
  for (const auto& light : world.lights) {
    if (segments_intersect(prev_pos, pos, light.stop_line_a, light.stop_line_b) &&
        (pos - prev_pos).dot(unit_from_angle(light.heading)) > 0.0) {
      RawEvent ev = make_event(RawEventKind::stop_line_crossed);
      ev.object_id = light.id;
      ev.phase = world.light_phase(light);
      events.push_back(ev);
    }
  }

  for (const auto& sign : world.signs) {
    const bool on = box_on_polygon(ego_box, sign.trigger_area);
    const bool was = world.occupied_stop_zones.contains(sign.id);
    if (on && !was) {
      RawEvent ev = make_event(RawEventKind::stop_zone_enter);
      ev.object_id = sign.id;
      events.push_back(ev);
      world.occupied_stop_zones.insert(sign.id);
    } else if (!on && was) {
      RawEvent ev = make_event(RawEventKind::stop_zone_exit);
      ev.object_id = sign.id;
      events.push_back(ev);
      world.occupied_stop_zones.erase(sign.id);
    }
  }
  return events;
}

}  // namespace drivebench
