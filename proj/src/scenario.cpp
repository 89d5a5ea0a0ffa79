#include "drivebench/scenario.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace drivebench {

WorldState make_world(const Scenario& sc, std::uint64_t seed) {
  if (!sc.map || !sc.route) throw std::invalid_argument("scenario has no map or route");
  WorldState w;
  w.map = sc.map;
  w.route = sc.route;
  w.config = sc.sim;
  w.config.rng_seed = seed;
  w.rng = make_rng(seed, 0x776f726c64);

  const Route& route = *sc.route;
  const Vec2 start = route.path.point_at(0.0);
  w.ego.id = 0;
  w.ego.kind = ActorKind::vehicle;
  w.ego.params = BicycleParams::car();
  w.ego.state.pose = {start.x, start.y, route.path.heading_at(0.0)};
  w.ego.state.speed = sc.start_speed;
  w.progress = route_progress(route, w.ego.state.pose);

  w.actors = sc.actors;
  w.signs = sc.signs;
  w.lights = sc.lights;
  w.pending_triggers = route.triggers;
  w.disturbances = sc.disturbances;

  Rng jitter = make_rng(seed, 0x6a6974);
  if (sc.light_offset_jitter > 0.0) {
    const double extra = uniform(jitter, 0.0, sc.light_offset_jitter);
    for (auto& l : w.lights) l.offset += extra;
  }
  for (auto& d : w.disturbances) {
    if (sc.disturbance_s_jitter > 0.0) d.route_s += uniform(jitter, -sc.disturbance_s_jitter, sc.disturbance_s_jitter);
    if (sc.disturbance_offset_jitter > 0.0) {
      d.lateral_offset += uniform(jitter, -sc.disturbance_offset_jitter, sc.disturbance_offset_jitter);
    }
  }
  return w;
}

OrientedBox polygon_box(const Polygon& r) {
  if (r.size() != 4) throw std::invalid_argument("polygon_box: expected a rectangle");
  const Vec2 center = (r[0] + r[1] + r[2] + r[3]) * 0.25;
  const Vec2 e0 = r[1] - r[0];
  const Vec2 e1 = r[2] - r[1];
  return {center, std::atan2(e0.y, e0.x), 0.5 * e0.norm(), 0.5 * e1.norm()};
}

namespace {

using json = nlohmann::ordered_json;

const char* kind_name(TriggerKind k) {
  switch (k) {
    case TriggerKind::pedestrian_crossing: return "pedestrian_crossing";
    case TriggerKind::cyclist_cut_in: return "cyclist_cut_in";
    case TriggerKind::opposing_vehicle: return "opposing_vehicle";
    case TriggerKind::light_change: return "light_change";
  }
  return "?";
}

const char* actor_kind_name(ActorKind k) {
  switch (k) {
    case ActorKind::vehicle: return "vehicle";
    case ActorKind::pedestrian: return "pedestrian";
    case ActorKind::cyclist: return "cyclist";
  }
  return "?";
}

const char* phase_name(LightPhase p) {
  switch (p) {
    case LightPhase::green: return "green";
    case LightPhase::yellow: return "yellow";
    case LightPhase::red: return "red";
  }
  return "?";
}

const char* mode_name(ActorBehavior::Mode m) {
  switch (m) {
    case ActorBehavior::Mode::constant: return "constant";
    case ActorBehavior::Mode::keyframed: return "keyframed";
    case ActorBehavior::Mode::follow_path: return "follow_path";
  }
  return "?";
}

json pt(Vec2 p) { return json::array({p.x, p.y}); }

json pts(const std::vector<Vec2>& v) {
  json a = json::array();
  for (const auto& p : v) a.push_back(pt(p));
  return a;
}

json command_json(const ControlCommand& c) {
  return {{"steer", c.steer}, {"throttle", c.throttle}, {"brake", c.brake}};
}

json params_json(const BicycleParams& p) {
  return {{"lf", p.front_axle_offset}, {"lr", p.rear_axle_offset}, {"max_steer", p.max_steer_angle},
          {"length", p.bbox_length},   {"width", p.bbox_width},     {"max_accel", p.max_accel},
          {"brake_decel", p.brake_decel}, {"max_speed", p.max_speed}};
}

json actor_json(const Actor& a) {
  json j;
  j["id"] = a.id;
  j["kind"] = actor_kind_name(a.kind);
  j["state"] = {{"x", a.state.pose.x}, {"y", a.state.pose.y}, {"yaw", a.state.pose.yaw}, {"speed", a.state.speed}};
  j["params"] = params_json(a.params);
  json b;
  b["mode"] = mode_name(a.behavior.mode);
  b["command"] = command_json(a.behavior.command);
  b["keyframes"] = json::array();
  for (const auto& k : a.behavior.keyframes) b["keyframes"].push_back({{"t", k.t}, {"command", command_json(k.command)}});
  b["path"] = pts(a.behavior.path);
  b["target_speed"] = a.behavior.target_speed;
  b["speed_profile"] = json::array();
  for (const auto& k : a.behavior.speed_profile) b["speed_profile"].push_back({{"t", k.t}, {"speed", k.target_speed}});
  j["behavior"] = b;
  j["activation_time"] = a.activation_time;
  return j;
}

/// JSON node with its pointer, for schema diagnostics.
class Node {
 public:
  Node(const json& j, std::string ptr, const std::string& source) : j_(j), ptr_(std::move(ptr)), source_(source) {}

  [[noreturn]] void fail(const std::string& msg) const {
    throw ScenarioError(source_ + ": " + (ptr_.empty() ? "/" : ptr_) + ": " + msg);
  }

  bool has(const std::string& key) const { return j_.is_object() && j_.contains(key); }

  Node at(const std::string& key) const {
    if (!j_.is_object()) fail("expected an object");
    if (!j_.contains(key)) fail("missing field '" + key + "'");
    return {j_.at(key), ptr_ + "/" + key, source_};
  }

  std::size_t size() const {
    if (!j_.is_array()) fail("expected an array");
    return j_.size();
  }

  Node operator[](std::size_t i) const {
    size();
    return {j_.at(i), ptr_ + "/" + std::to_string(i), source_};
  }

  double num() const {
    if (!j_.is_number()) fail("expected a number");
    return j_.get<double>();
  }

  long integer() const {
    if (!j_.is_number_integer()) fail("expected an integer");
    return j_.get<long>();
  }

  bool boolean() const {
    if (!j_.is_boolean()) fail("expected a boolean");
    return j_.get<bool>();
  }

  std::string str() const {
    if (!j_.is_string()) fail("expected a string");
    return j_.get<std::string>();
  }

  Vec2 point() const {
    if (size() != 2) fail("expected [x, y]");
    return {(*this)[0].num(), (*this)[1].num()};
  }

  std::vector<Vec2> points() const {
    std::vector<Vec2> out;
    for (std::size_t i = 0; i < size(); ++i) out.push_back((*this)[i].point());
    return out;
  }

  double num_or(const std::string& key, double fallback) const { return has(key) ? at(key).num() : fallback; }

  const json& raw() const { return j_; }

 private:
  const json& j_;
  std::string ptr_;
  const std::string& source_;
};

ControlCommand command_from(const Node& n) {
  ControlCommand c;
  c.steer = n.at("steer").num();
  c.throttle = n.at("throttle").num();
  c.brake = n.at("brake").boolean();
  return c;
}

BicycleParams params_from(const Node& n) {
  BicycleParams p;
  p.front_axle_offset = n.at("lf").num();
  p.rear_axle_offset = n.at("lr").num();
  p.max_steer_angle = n.at("max_steer").num();
  p.bbox_length = n.at("length").num();
  p.bbox_width = n.at("width").num();
  p.max_accel = n.at("max_accel").num();
  p.brake_decel = n.at("brake_decel").num();
  p.max_speed = n.at("max_speed").num();
  if (p.front_axle_offset <= 0.0 || p.rear_axle_offset <= 0.0) n.fail("axle offsets must be positive");
  if (p.bbox_length <= 0.0 || p.bbox_width <= 0.0) n.fail("box dimensions must be positive");
  return p;
}

template <typename E>
E enum_from(const Node& n, std::initializer_list<E> values, const char* (*name)(E)) {
  const std::string s = n.str();
  for (E v : values) {
    if (s == name(v)) return v;
  }
  n.fail("unknown value '" + s + "'");
}

Actor actor_from(const Node& n) {
  Actor a;
  a.id = static_cast<int>(n.at("id").integer());
  a.kind = enum_from<ActorKind>(n.at("kind"), {ActorKind::vehicle, ActorKind::pedestrian, ActorKind::cyclist},
                                actor_kind_name);
  const Node st = n.at("state");
  a.state.pose = {st.at("x").num(), st.at("y").num(), st.at("yaw").num()};
  a.state.speed = st.at("speed").num();
  a.params = params_from(n.at("params"));
  const Node b = n.at("behavior");
  a.behavior.mode = enum_from<ActorBehavior::Mode>(
      b.at("mode"),
      {ActorBehavior::Mode::constant, ActorBehavior::Mode::keyframed, ActorBehavior::Mode::follow_path}, mode_name);
  a.behavior.command = command_from(b.at("command"));
  const Node kfs = b.at("keyframes");
  for (std::size_t i = 0; i < kfs.size(); ++i) {
    a.behavior.keyframes.push_back({kfs[i].at("t").num(), command_from(kfs[i].at("command"))});
  }
  a.behavior.path = b.at("path").points();
  a.behavior.target_speed = b.at("target_speed").num();
  const Node prof = b.at("speed_profile");
  for (std::size_t i = 0; i < prof.size(); ++i) {
    a.behavior.speed_profile.push_back({prof[i].at("t").num(), prof[i].at("speed").num()});
  }
  if (a.behavior.mode == ActorBehavior::Mode::follow_path && a.behavior.path.size() < 2) {
    b.at("path").fail("follow_path needs at least two points");
  }
  a.activation_time = n.at("activation_time").num();
  return a;
}

std::pair<std::size_t, std::size_t> line_col(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t col = 1;
  for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

Polyline polyline_from(const Node& n) {
  const auto p = n.points();
  if (p.size() < 2) n.fail("polyline needs at least two points");
  for (std::size_t i = 1; i < p.size(); ++i) {
    if (p[i] == p[i - 1]) n[i].fail("duplicate consecutive point");
  }
  return Polyline(p);
}

}  // namespace

std::string scenario_to_json(const Scenario& sc) {
  if (!sc.map || !sc.route) throw std::invalid_argument("scenario has no map or route");
  json j;
  j["name"] = sc.name;
  j["lane_width"] = sc.map->lane_width;
  j["offroad_is_collision"] = sc.map->offroad_is_collision;
  j["lanes"] = json::array();
  for (const auto& l : sc.map->lanes) j["lanes"].push_back(pts(l.points()));
  j["intersections"] = json::array();
  for (const auto& poly : sc.map->intersections) j["intersections"].push_back(pts(poly));
  j["route"] = pts(sc.route->path.points());
  j["target_points"] = pts(sc.route->target_points);
  j["triggers"] = json::array();
  for (const auto& t : sc.route->triggers) {
    json params = json::object();
    for (const auto& [k, v] : t.params) params[k] = v;
    j["triggers"].push_back({{"s", t.route_s}, {"kind", kind_name(t.kind)}, {"params", params}});
  }
  j["lights"] = json::array();
  for (const auto& l : sc.lights) {
    json schedule = json::array();
    for (const auto& span : l.schedule) schedule.push_back({{"phase", phase_name(span.phase)}, {"duration", span.duration}});
    j["lights"].push_back({{"id", l.id},
                           {"stop_line", json::array({pt(l.stop_line_a), pt(l.stop_line_b)})},
                           {"heading", l.heading},
                           {"trigger_area", pts(l.trigger_area)},
                           {"schedule", schedule},
                           {"offset", l.offset}});
  }
  j["signs"] = json::array();
  for (const auto& s : sc.signs) j["signs"].push_back({{"id", s.id}, {"trigger_area", pts(s.trigger_area)}});
  j["actors"] = json::array();
  for (const auto& a : sc.actors) j["actors"].push_back(actor_json(a));
  j["disturbances"] = json::array();
  for (const auto& d : sc.disturbances) {
    j["disturbances"].push_back({{"s", d.route_s}, {"lateral_offset", d.lateral_offset}, {"heading_error", d.heading_error}});
  }
  j["ambiguity"] = json::array();
  for (const auto& w : sc.ambiguity) {
    json alts = json::array();
    for (const auto& a : w.alternatives) alts.push_back({{"class", a.speed_class}, {"weight", a.weight}, {"jitter", a.jitter}});
    j["ambiguity"].push_back(
        {{"s_begin", w.s_begin}, {"s_end", w.s_end}, {"max_duration", w.max_duration}, {"alternatives", alts}});
  }
  j["start_speed"] = sc.start_speed;
  j["sim"] = {{"dt", sc.sim.dt},
              {"max_episode_time", sc.sim.max_episode_time},
              {"rng_seed", sc.sim.rng_seed},
              {"gnss_sigma", sc.sim.gnss_sigma},
              {"offroad_margin", sc.sim.offroad_margin}};
  j["jitter"] = {{"light_offset", sc.light_offset_jitter},
                 {"disturbance_s", sc.disturbance_s_jitter},
                 {"disturbance_offset", sc.disturbance_offset_jitter}};
  return j.dump(2) + "\n";
}

Scenario scenario_from_json(const std::string& text, const std::string& source) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    const auto [line, col] = line_col(text, e.byte);
    std::string what = e.what();
    const auto pos = what.find("parse error");
    throw ScenarioError(source + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " +
                        (pos == std::string::npos ? what : what.substr(pos)));
  }
  const Node root(doc, "", source);
  if (!doc.is_object()) root.fail("expected an object");

  Scenario sc;
  sc.name = root.has("name") ? root.at("name").str() : std::string{};

  auto map = std::make_shared<LaneMap>();
  map->lane_width = root.at("lane_width").num();
  if (!(map->lane_width > 0.0)) root.at("lane_width").fail("must be positive");
  if (root.has("offroad_is_collision")) map->offroad_is_collision = root.at("offroad_is_collision").boolean();
  const Node lanes = root.at("lanes");
  for (std::size_t i = 0; i < lanes.size(); ++i) map->lanes.push_back(polyline_from(lanes[i]));
  const Node inter = root.at("intersections");
  for (std::size_t i = 0; i < inter.size(); ++i) map->intersections.push_back(inter[i].points());
  sc.map = map;

  auto route = std::make_shared<Route>();
  route->path = polyline_from(root.at("route"));
  const Node tps = root.at("target_points");
  for (std::size_t i = 0; i < tps.size(); ++i) {
    const Vec2 p = tps[i].point();
    const Projection proj = route->path.project(p);
    if (proj.distance > 1e-6) tps[i].fail("target point is not on the route");
    route->target_points.push_back(p);
    route->target_s.push_back(proj.s);
  }
  if (route->target_points.empty()) tps.fail("at least one target point is required");
  const Node trigs = root.at("triggers");
  for (std::size_t i = 0; i < trigs.size(); ++i) {
    const Node t = trigs[i];
    ScenarioTrigger trig;
    trig.route_s = t.at("s").num();
    if (trig.route_s < 0.0 || trig.route_s > route->length()) t.at("s").fail("outside [0, route length]");
    trig.kind = enum_from<TriggerKind>(t.at("kind"),
                                       {TriggerKind::pedestrian_crossing, TriggerKind::cyclist_cut_in,
                                        TriggerKind::opposing_vehicle, TriggerKind::light_change},
                                       kind_name);
    const Node params = t.at("params");
    if (!params.raw().is_object()) params.fail("expected an object");
    for (const auto& [k, v] : params.raw().items()) trig.params[k] = params.at(k).num();
    route->triggers.push_back(trig);
  }
  sc.route = route;

  const Node lights = root.at("lights");
  for (std::size_t i = 0; i < lights.size(); ++i) {
    const Node l = lights[i];
    TrafficLight light;
    light.id = static_cast<int>(l.at("id").integer());
    const Node line = l.at("stop_line");
    if (line.size() != 2) line.fail("expected two points");
    light.stop_line_a = line[0].point();
    light.stop_line_b = line[1].point();
    light.heading = l.at("heading").num();
    light.trigger_area = l.at("trigger_area").points();
    const Node sched = l.at("schedule");
    if (sched.size() == 0) sched.fail("schedule must not be empty");
    for (std::size_t k = 0; k < sched.size(); ++k) {
      PhaseSpan span;
      span.phase = enum_from<LightPhase>(sched[k].at("phase"), {LightPhase::green, LightPhase::yellow, LightPhase::red},
                                         phase_name);
      span.duration = sched[k].at("duration").num();
      if (!(span.duration > 0.0)) sched[k].at("duration").fail("must be positive");
      light.schedule.push_back(span);
    }
    light.offset = l.at("offset").num();
    sc.lights.push_back(light);
  }

  const Node signs = root.at("signs");
  for (std::size_t i = 0; i < signs.size(); ++i) {
    StopSign s;
    s.id = static_cast<int>(signs[i].at("id").integer());
    s.trigger_area = signs[i].at("trigger_area").points();
    if (s.trigger_area.size() < 3) signs[i].at("trigger_area").fail("polygon needs at least three points");
    sc.signs.push_back(s);
  }

  if (root.has("actors")) {
    const Node actors = root.at("actors");
    for (std::size_t i = 0; i < actors.size(); ++i) sc.actors.push_back(actor_from(actors[i]));
  }
  if (root.has("disturbances")) {
    const Node ds = root.at("disturbances");
    for (std::size_t i = 0; i < ds.size(); ++i) {
      Disturbance d;
      d.route_s = ds[i].at("s").num();
      d.lateral_offset = ds[i].at("lateral_offset").num();
      d.heading_error = ds[i].at("heading_error").num();
      sc.disturbances.push_back(d);
    }
  }
  if (root.has("ambiguity")) {
    const Node ws = root.at("ambiguity");
    for (std::size_t i = 0; i < ws.size(); ++i) {
      AmbiguityWindow w;
      w.s_begin = ws[i].at("s_begin").num();
      w.s_end = ws[i].at("s_end").num();
      w.max_duration = ws[i].at("max_duration").num();
      const Node alts = ws[i].at("alternatives");
      for (std::size_t k = 0; k < alts.size(); ++k) {
        AmbiguityAlternative a;
        const long cls = alts[k].at("class").integer();
        if (cls < 0 || cls >= static_cast<long>(kNumSpeedClasses)) alts[k].at("class").fail("speed class out of range");
        a.speed_class = static_cast<std::size_t>(cls);
        a.weight = alts[k].at("weight").num();
        a.jitter = alts[k].at("jitter").num();
        w.alternatives.push_back(a);
      }
      sc.ambiguity.push_back(w);
    }
  }
  sc.start_speed = root.num_or("start_speed", 0.0);
  if (root.has("sim")) {
    const Node sim = root.at("sim");
    sc.sim.dt = sim.num_or("dt", sc.sim.dt);
    if (!(sc.sim.dt > 0.0)) sim.at("dt").fail("must be positive");
    sc.sim.max_episode_time = sim.num_or("max_episode_time", sc.sim.max_episode_time);
    if (sim.has("rng_seed")) sc.sim.rng_seed = static_cast<std::uint64_t>(sim.at("rng_seed").integer());
    sc.sim.gnss_sigma = sim.num_or("gnss_sigma", sc.sim.gnss_sigma);
    sc.sim.offroad_margin = sim.num_or("offroad_margin", sc.sim.offroad_margin);
  }
  if (root.has("jitter")) {
    const Node jit = root.at("jitter");
    sc.light_offset_jitter = jit.num_or("light_offset", 0.0);
    sc.disturbance_s_jitter = jit.num_or("disturbance_s", 0.0);
    sc.disturbance_offset_jitter = jit.num_or("disturbance_offset", 0.0);
  }
  return sc;
}

void write_scenario_file(const std::string& path, const Scenario& scenario) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  os << scenario_to_json(scenario);
}

Scenario read_scenario_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ScenarioError(path + ": cannot open file");
  std::stringstream ss;
  ss << is.rdbuf();
  return scenario_from_json(ss.str(), path);
}

}  // namespace drivebench
