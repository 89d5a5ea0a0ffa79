#include "drivebench/policies.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace drivebench {

const char* to_string(NavCommand nc) {
  switch (nc) {
    case NavCommand::follow: return "follow";
    case NavCommand::turn_left: return "turn_left";
    case NavCommand::turn_right: return "turn_right";
    case NavCommand::straight: return "straight";
    case NavCommand::change_left: return "change_left";
    case NavCommand::change_right: return "change_right";
  }
  return "unknown";
}

NavCommand nav_command_for(const Route& route, double s, double horizon) {
  const double dh = wrap_angle(route.path.heading_at(std::min(s + horizon, route.length())) - route.path.heading_at(s));
  if (dh > kPi / 4.0) return NavCommand::turn_left;
  if (dh < -kPi / 4.0) return NavCommand::turn_right;
  return NavCommand::follow;
}

Conditioning make_conditioning(const WorldState& world, Conditioning::Kind kind) {
  Conditioning c;
  c.kind = kind;
  if (kind == Conditioning::Kind::tp) {
    c.tp = global_to_local(world.ego.state.pose, next_target_point(*world.route, world.progress.s));
  } else {
    c.nc = nav_command_for(*world.route, world.progress.s);
  }
  return c;
}

PathPlan route_path_plan(const WorldState& world) {
  PathPlan plan;
  const auto pts = world.route->path.chord_walk(world.progress.s, kNumPathPoints, kPathSpacing);
  for (std::size_t i = 0; i < pts.size() && i < kNumPathPoints; ++i) {
    plan.points[i] = global_to_local(world.ego.state.pose, pts[i]);
  }
  return plan;
}

WaypointPlan expert_waypoints(const WorldState& world, const Expert& expert) {
  WaypointPlan plan;
  WorldState sim = world;
  Expert e = expert;
  const int ticks_per_point = static_cast<int>(std::lround(kWaypointInterval / world.config.dt));
  for (std::size_t k = 0; k < kNumWaypoints; ++k) {
    for (int t = 0; t < ticks_per_point; ++t) tick(sim, e.act(sim));
    plan.points[k] = global_to_local(world.ego.state.pose, sim.ego.state.pose.position());
  }
  return plan;
}

PolicyOutput ExpertPolicy::act(const WorldState& world, const Conditioning&) {
  last_ = expert_.decide(world);
  if (rep_ == Representation::waypoints) return {expert_waypoints(world, expert_)};
  return {PathSpeedPlan{route_path_plan(world), SpeedDistribution::one_hot(last_.speed_class_index)}};
}

PolicyOutput ShortcutPolicy::act(const WorldState& world, const Conditioning& cond) {
  const ExpertDecision dec = expert_.decide(world);
  const Route& route = *world.route;
  const Pose2D& pose = world.ego.state.pose;
  const double s = world.progress.s;
  const bool outside = std::abs(world.progress.lateral) > params_.ood_threshold;

  if (!params_.latch_until_tp) {
    ood_ = outside;
  } else if (!ood_) {
    if (outside) {
      ood_ = true;
      latched_tp_ = next_target_index(route, s);
    }
  } else if (!route.target_s.empty()) {
    const bool reached = distance(pose.position(), route.target_points[latched_tp_]) < params_.tp_reached_distance ||
                         s >= route.target_s[latched_tp_];
    if (reached) {
      ood_ = outside;
      latched_tp_ = next_target_index(route, s);
    }
  }

  const double v = dec.target_speed;
  WaypointPlan plan;
  if (ood_ && cond.tp) {
    const Vec2 tp = local_to_global(pose, *cond.tp);
    const double h_lane = route.path.heading_at(s);
    const double h_tp = std::atan2(tp.y - pose.y, tp.x - pose.x);
    const double h = h_lane + params_.strength * wrap_angle(h_tp - h_lane);
    for (std::size_t k = 0; k < kNumWaypoints; ++k) {
      const double d = v * kWaypointInterval * static_cast<double>(k + 1);
      plan.points[k] = global_to_local(pose, pose.position() + unit_from_angle(h) * d);
    }
  } else {
    for (std::size_t k = 0; k < kNumWaypoints; ++k) {
      const double d = v * kWaypointInterval * static_cast<double>(k + 1);
      plan.points[k] = global_to_local(pose, route.path.extrapolate(s + d));
    }
  }
  return {plan};
}

std::optional<std::size_t> choose_successor(const LaneMap& map, const std::vector<std::vector<std::size_t>>& successors,
                                            std::size_t lane, NavCommand nc) {
  const auto& next = successors[lane];
  if (next.empty()) return std::nullopt;
  for (std::size_t cand : next) {
    const Polyline& l = map.lanes[cand];
    const double dh = wrap_angle(l.heading_at(l.length()) - l.heading_at(0.0));
    const NavCommand kind = dh > 0.5 ? NavCommand::turn_left : dh < -0.5 ? NavCommand::turn_right : NavCommand::straight;
    const NavCommand want =
        (nc == NavCommand::turn_left || nc == NavCommand::turn_right) ? nc : NavCommand::straight;
    if (kind == want) return cand;
  }
  return next.front();
}

PolicyOutput NcPolicy::act(const WorldState& world, const Conditioning& cond) {
  const ExpertDecision dec = expert_.decide(world);
  const LaneMap& map = *world.map;
  if (successors_map_ != &map) {
    successors_ = map.successors();
    successors_map_ = &map;
    lane_.reset();
  }
  const Pose2D& pose = world.ego.state.pose;
  const Vec2 pos = pose.position();
  const NavCommand nc = cond.nc.value_or(NavCommand::follow);

  auto nearest_compatible = [&]() {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < map.lanes.size(); ++i) {
      const Projection p = map.lanes[i].project(pos);
      if (std::abs(wrap_angle(map.lanes[i].heading_at(p.s) - pose.yaw)) > params_.heading_tolerance) continue;
      if (p.distance < best_d) {
        best_d = p.distance;
        best = i;
      }
    }
    return std::pair{best, best_d};
  };

  if (!lane_) {
    lane_ = nearest_compatible().first;
  } else {
    for (int guard = 0; guard < 8; ++guard) {
      const Polyline& l = map.lanes[*lane_];
      const Projection p = l.project(pos);
      if (p.s < l.length() - 1e-6) break;
      const auto next = choose_successor(map, successors_, *lane_, nc);
      if (!next) break;
      lane_ = next;
    }
    if (!map.in_intersection(pos)) {
      const auto [cand, cand_d] = nearest_compatible();
      if (cand != *lane_ && cand_d < map.lanes[*lane_].project(pos).distance - params_.switch_margin) lane_ = cand;
    }
  }

  const Polyline& lane = map.lanes[*lane_];
  const Projection proj = lane.project(pos);
  const double offset = proj.lateral;
  const double v = dec.target_speed;

  WaypointPlan plan;
  for (std::size_t k = 0; k < kNumWaypoints; ++k) {
    double remaining = v * kWaypointInterval * static_cast<double>(k + 1);
    std::size_t li = *lane_;
    double s = proj.s;
    while (s + remaining > map.lanes[li].length()) {
      const auto next = choose_successor(map, successors_, li, nc);
      if (!next) break;
      remaining -= map.lanes[li].length() - s;
      s = 0.0;
      li = *next;
    }
    const Polyline& l = map.lanes[li];
    const double sk = s + remaining;
    const Vec2 center = l.extrapolate(sk);
    const Vec2 global = center + unit_from_angle(l.heading_at(std::min(sk, l.length()))).left() * offset;
    const Vec2 local = global_to_local(pose, global);
    const double c = std::cos(params_.heading_bias);
    const double sn = std::sin(params_.heading_bias);
    plan.points[k] = {c * local.x - sn * local.y, sn * local.x + c * local.y};
  }
  return {plan};
}

UncertainSpeedPolicy::UncertainSpeedPolicy(std::vector<AmbiguityWindow> windows, std::uint64_t seed, ExpertConfig cfg)
    : windows_(std::move(windows)), entered_(windows_.size(), -1.0), expert_(cfg) {
  Rng rng = make_rng(seed, 0x756e63);
  for (const auto& w : windows_) {
    std::vector<double> ws;
    double sum = 0.0;
    for (const auto& alt : w.alternatives) {
      const double j = alt.jitter > 0.0 ? uniform(rng, -alt.jitter, alt.jitter) : 0.0;
      ws.push_back(std::clamp(alt.weight + j, 0.0, 1.0));
      sum += ws.back();
    }
    if (sum > 1.0) {
      for (double& x : ws) x /= sum;
    }
    weights_.push_back(std::move(ws));
  }
}

SpeedDistribution UncertainSpeedPolicy::distribution(const WorldState& world, std::size_t expert_class) {
  SpeedDistribution d;
  double rest = 1.0;
  const double s = world.progress.s;
  for (std::size_t i = 0; i < windows_.size(); ++i) {
    const AmbiguityWindow& w = windows_[i];
    if (s < w.s_begin || s > w.s_end) continue;
    if (entered_[i] < 0.0) entered_[i] = world.time;
    if (world.time - entered_[i] > w.max_duration) continue;
    for (std::size_t j = 0; j < w.alternatives.size(); ++j) {
      const double take = std::min(weights_[i][j], rest);
      d.probs[w.alternatives[j].speed_class] += take;
      rest -= take;
    }
  }
  d.probs[expert_class] += rest;
  return d;
}

PolicyOutput UncertainSpeedPolicy::act(const WorldState& world, const Conditioning&) {
  const ExpertDecision dec = expert_.decide(world);
  return {PathSpeedPlan{route_path_plan(world), distribution(world, dec.speed_class_index)}};
}

}  // namespace drivebench
