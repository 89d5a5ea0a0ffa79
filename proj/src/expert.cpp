#include "drivebench/expert.hpp"

#include <algorithm>
#include <cmath>

namespace drivebench {

const char* to_string(ExpertReason reason) {
  switch (reason) {
    case ExpertReason::regular: return "regular";
    case ExpertReason::intersection: return "intersection";
    case ExpertReason::pedestrian_near: return "pedestrian_near";
    case ExpertReason::collision_predicted: return "collision_predicted";
    case ExpertReason::red_light: return "red_light";
    case ExpertReason::stop_sign_approach: return "stop_sign_approach";
    case ExpertReason::stop_sign_on_trigger: return "stop_sign_on_trigger";
  }
  return "unknown";
}

std::size_t speed_class_for(double target_speed, const ExpertConfig& cfg) {
  if (target_speed >= cfg.speed_regular) return 0;
  if (target_speed >= cfg.speed_intersection) return 1;
  if (target_speed >= cfg.speed_caution) return 2;
  return 3;
}

double stopping_distance(double speed) {
  const double kmh_tenths = speed * 3.6 / 10.0;
  return 0.5 * kmh_tenths * kmh_tenths + 2.5;
}

Vec2 lateral_aim(const Polyline& path, double cursor_s, Vec2 position, double min_distance) {
  const auto& pts = path.points();
  for (std::size_t i = path.segment_at(cursor_s) + 1; i < pts.size(); ++i) {
    if (distance(pts[i], position) >= min_distance) return pts[i];
  }
  return pts.back();
}

namespace {

double advance_cursor(const Polyline& path, Vec2 p, double cursor, double reach) {
  return std::max(cursor, path.project(p, cursor - 1.0, cursor + reach).s);
}

}  // namespace

OrientedBox safety_box(const VehicleState& ego, const BicycleParams& params, const Polyline& path, double cursor_s,
                       const ExpertConfig& cfg) {
  VehicleState st{ego.pose, 1.0};
  double cursor = cursor_s;
  double remaining = stopping_distance(ego.speed);
  while (remaining > 1e-12) {
    const double ds = std::min(cfg.safety_step, remaining);
    const Vec2 aim = global_to_local(st.pose, lateral_aim(path, cursor, st.pose.position(), cfg.lateral_min_aim));
    const double angle = aim.norm() < 1e-6 ? 0.0 : std::atan2(aim.y, aim.x);
    const ControlCommand cmd{std::clamp(-cfg.lateral.kp * angle, -1.0, 1.0), 0.0, false};
    st = step_bicycle_raw(st, steering_angle(cmd, params), 0.0, params, ds);
    st.speed = 1.0;
    cursor = advance_cursor(path, st.pose.position(), cursor, ds + 2.0);
    remaining -= ds;
  }
  return vehicle_box(st.pose, params);
}

EgoForecast forecast_ego(const VehicleState& ego, const BicycleParams& params, const Polyline& path, double cursor_s,
                         double target_speed, int steps, double dt, const ExpertConfig& cfg) {
  EgoForecast out;
  out.commands.reserve(static_cast<std::size_t>(steps));
  out.states.reserve(static_cast<std::size_t>(steps) + 1);
  out.states.push_back(ego);
  PidState lat;
  PidState lon;
  double cursor = cursor_s;
  for (int k = 0; k < steps; ++k) {
    const VehicleState& st = out.states.back();
    const Vec2 aim = lateral_aim(path, cursor, st.pose.position(), cfg.lateral_min_aim);
    ControlCommand cmd;
    cmd.steer = lateral_command(lat, global_to_local(st.pose, aim), dt, cfg.lateral);
    const Longitudinal l = longitudinal_command(lon, target_speed, st.speed, dt, cfg.longitudinal);
    cmd.throttle = l.throttle;
    cmd.brake = l.brake;
    out.commands.push_back(cmd);
    out.states.push_back(step_bicycle(st, cmd, params, dt));
    cursor = advance_cursor(path, out.states.back().pose.position(), cursor, st.speed * dt + 3.0);
  }
  return out;
}

std::optional<CollisionForecast> predict_collision(const Actor& ego, const std::vector<Actor>& actors,
                                                   const Polyline& path, double cursor_s, double target_speed,
                                                   const ExpertConfig& cfg) {
  struct Rollout {
    int id;
    VehicleState state;
    const Actor* actor;
  };
  std::vector<Rollout> relevant;
  for (const auto& a : actors) {
    const Vec2 local = global_to_local(ego.state.pose, a.state.pose.position());
    if (local.norm() <= cfg.forecast_range && local.x >= 0.0) relevant.push_back({a.id, a.state, &a});
  }
  if (relevant.empty()) return std::nullopt;
  const int steps = static_cast<int>(std::lround(cfg.forecast_horizon / cfg.forecast_dt));
  const EgoForecast fc = forecast_ego(ego.state, ego.params, path, cursor_s, target_speed, steps, cfg.forecast_dt, cfg);
  for (int k = 1; k <= steps; ++k) {
    const OrientedBox ego_box = vehicle_box(fc.states[static_cast<std::size_t>(k)].pose, ego.params);
    for (auto& a : relevant) {
      a.state = step_bicycle(a.state, a.actor->last_command, a.actor->params, cfg.forecast_dt);
      if (obb_overlap(ego_box, vehicle_box(a.state.pose, a.actor->params))) {
        return CollisionForecast{k * cfg.forecast_dt, k, a.id};
      }
    }
  }
  return std::nullopt;
}

namespace {

Vec2 polygon_center(const Polygon& poly) {
  Vec2 c;
  for (const Vec2& p : poly) c += p;
  return c * (1.0 / static_cast<double>(poly.size()));
}

/// Travel direction of a rectangular trigger (first edge); nullopt for other shapes.
std::optional<double> trigger_heading(const Polygon& poly) {
  if (poly.size() != 4) return std::nullopt;
  const Vec2 e = poly[1] - poly[0];
  return std::atan2(e.y, e.x);
}

}  // namespace

std::vector<const StopSign*> perceived_stop_signs(const WorldState& world, const ExpertConfig& cfg) {
  std::vector<const StopSign*> out;
  const OrientedBox ego_box = world.ego.box();
  for (const auto& sign : world.signs) {
    const auto heading = trigger_heading(sign.trigger_area);
    if (heading && std::abs(wrap_angle(*heading - world.ego.state.pose.yaw)) > cfg.sign_heading_tolerance) continue;
    if (cfg.occluded_stop_signs) {
      const Vec2 local = global_to_local(world.ego.state.pose, polygon_center(sign.trigger_area));
      if (local.x <= 0.0 || local.norm() > cfg.sign_detection_range) continue;
      if (box_on_polygon(ego_box, sign.trigger_area)) continue;
    }
    out.push_back(&sign);
  }
  return out;
}

ExpertDecision target_speed_decision(const WorldState& world, const std::set<int>& served_signs,
                                     const ExpertConfig& cfg) {
  const Actor& ego = world.ego;
  const Route& route = *world.route;
  const double cursor = world.progress.s;
  const Vec2 pos = ego.state.pose.position();

  ExpertDecision d;
  d.target_speed = cfg.speed_regular;
  d.reason = ExpertReason::regular;
  d.aim_point = lateral_aim(route.path, cursor, pos, cfg.lateral_min_aim);
  auto consider = [&](double speed, ExpertReason reason) {
    if (speed < d.target_speed) {
      d.target_speed = speed;
      d.reason = reason;
    }
  };

  const OrientedBox ego_box = ego.box();
  const OrientedBox sbox = safety_box(ego.state, ego.params, route.path, cursor, cfg);

  if (world.map) {
    for (const auto& poly : world.map->intersections) {
      if (convex_polygon_overlaps_box(poly, ego_box) || convex_polygon_overlaps_box(poly, sbox)) {
        consider(cfg.speed_intersection, ExpertReason::intersection);
        break;
      }
    }
  }
  const double map_speed = d.target_speed;

  for (const auto& a : world.actors) {
    if (a.kind != ActorKind::pedestrian) continue;
    const Vec2 local = global_to_local(ego.state.pose, a.state.pose.position());
    if (local.norm() > cfg.pedestrian_radius || local.x <= 0.0) continue;
    if (std::abs(std::atan2(local.y, local.x)) > cfg.pedestrian_cone) continue;
    const Projection proj = route.path.project(a.state.pose.position(), cursor, cursor + cfg.pedestrian_radius + 5.0);
    if (proj.distance > cfg.pedestrian_corridor) continue;
    consider(cfg.speed_caution, ExpertReason::pedestrian_near);
  }

  for (const StopSign* sign : perceived_stop_signs(world, cfg)) {
    if (served_signs.contains(sign->id)) continue;
    if (box_on_polygon(ego_box, sign->trigger_area)) {
      consider(cfg.speed_stop, ExpertReason::stop_sign_on_trigger);
    } else if (box_on_polygon(sbox, sign->trigger_area)) {
      consider(cfg.speed_caution, ExpertReason::stop_sign_approach);
    }
  }

  for (const auto& light : world.lights) {
    const LightPhase phase = world.light_phase(light);
    if (phase == LightPhase::green || (phase == LightPhase::yellow && !cfg.yellow_is_red)) continue;
    if (std::abs(wrap_angle(light.heading - ego.state.pose.yaw)) > cfg.light_heading_tolerance) continue;
    const Vec2 mid = (light.stop_line_a + light.stop_line_b) * 0.5;
    if ((pos - mid).dot(unit_from_angle(light.heading)) >= 0.0) continue;
    const OrientedBox line = light.stop_line_box();
    if (obb_overlap(sbox, line) || obb_overlap(ego_box, line)) consider(cfg.speed_stop, ExpertReason::red_light);
  }

  for (const auto& a : world.actors) {
    if (obb_overlap(sbox, a.box())) {
      consider(cfg.speed_stop, ExpertReason::collision_predicted);
      if (d.reason == ExpertReason::collision_predicted) d.collision_actor = a.id;
    }
  }
  if (d.target_speed > cfg.speed_stop) {
    if (const auto hit = predict_collision(ego, world.actors, route.path, cursor, map_speed, cfg)) {
      consider(cfg.speed_stop, ExpertReason::collision_predicted);
      d.collision_actor = hit->actor_id;
    }
  }

  d.speed_class_index = speed_class_for(d.target_speed, cfg);
  return d;
}

ExpertDecision Expert::decide(const WorldState& world) {
  if (world.ego.state.speed < cfg_.stop_served_speed) {
    const OrientedBox ego_box = world.ego.box();
    for (const StopSign* sign : perceived_stop_signs(world, cfg_)) {
      if (box_on_polygon(ego_box, sign->trigger_area)) served_.insert(sign->id);
    }
  }
  return target_speed_decision(world, served_, cfg_);
}

ControlCommand Expert::control(const WorldState& world, const ExpertDecision& decision) {
  const VehicleState& st = world.ego.state;
  ControlCommand cmd;
  cmd.steer = lateral_command(lateral_, global_to_local(st.pose, decision.aim_point), world.config.dt, cfg_.lateral);
  const Longitudinal lon = longitudinal_command(longitudinal_, decision.target_speed, st.speed, world.config.dt,
                                                cfg_.longitudinal);
  cmd.throttle = lon.throttle;
  cmd.brake = lon.brake;
  return cmd;
}

ControlCommand Expert::act(const WorldState& world, ExpertDecision* decision_out) {
  const ExpertDecision d = decide(world);
  if (decision_out) *decision_out = d;
  return control(world, d);
}

}  // namespace drivebench
