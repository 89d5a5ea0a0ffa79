#include <gtest/gtest.h>

#include <cmath>

#include "drivebench/expert.hpp"
#include "drivebench/fixtures.hpp"
#include "drivebench/random.hpp"
#include "drivebench/scenario.hpp"

using namespace drivebench;

namespace {

constexpr double kLaneY = -1.75;

WorldState road(double length = 300.0) {
  const LaneMap m = straight_map(length);
  WorldState w = make_world(make_scenario("road", m, lane_route(m, 0, 1)), 0);
  w.actors.clear();
  return w;
}

void place_ego(WorldState& w, double x, double speed) {
  w.ego.state = {{x, kLaneY, 0.0}, speed};
  w.progress = route_progress(*w.route, w.ego.state.pose);
}

Actor actor_at(int id, ActorKind kind, Pose2D pose, double speed = 0.0) {
  Actor a;
  a.id = id;
  a.kind = kind;
  a.params = kind == ActorKind::pedestrian ? BicycleParams::pedestrian()
             : kind == ActorKind::cyclist  ? BicycleParams::cyclist()
                                           : BicycleParams::car();
  a.state = {pose, speed};
  a.behavior.command = {0.0, 0.0, speed == 0.0};
  a.last_command = a.behavior.command;
  return a;
}

Polygon rect(double x0, double x1, double y0, double y1) { return {{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}}; }

double decide_speed(const WorldState& w) { return target_speed_decision(w, {}).target_speed; }

}  // namespace

TEST(StoppingDistance, KilometersPerHourFormula) {
  for (double kmh : {0.0, 7.2, 18.0, 28.8, 50.0, 72.0}) {
    const double want = 0.5 * (kmh / 10.0) * (kmh / 10.0) + 2.5;
    EXPECT_NEAR(stopping_distance(kmh / 3.6), want, 1e-9) << kmh;
  }
  EXPECT_DOUBLE_EQ(stopping_distance(0.0), 2.5);
  EXPECT_NEAR(stopping_distance(8.0), 6.6472, 1e-9);
}

TEST(SpeedClasses, MapExpertSpeedsToIndices) {
  EXPECT_EQ(speed_class_for(8.0), 0u);
  EXPECT_EQ(speed_class_for(5.0), 1u);
  EXPECT_EQ(speed_class_for(2.0), 2u);
  EXPECT_EQ(speed_class_for(0.0), 3u);
  const ExpertConfig c;
  EXPECT_NEAR(c.speed_regular * 3.6, 28.8, 1e-12);
  EXPECT_NEAR(c.speed_intersection * 3.6, 18.0, 1e-12);
  EXPECT_NEAR(c.speed_caution * 3.6, 7.2, 1e-12);
}

TEST(LateralAim, FirstVertexBeyondMinimumDistance) {
  const Polyline path = Polyline({{0, 0}, {100, 0}}).resampled(1.0);
  EXPECT_NEAR(lateral_aim(path, 10.0, {10, 0}).x, 14.0, 1e-9);
  EXPECT_NEAR(lateral_aim(path, 10.0, {10, 0}, 3.0).x, 13.0, 1e-9);
  EXPECT_NEAR(lateral_aim(path, 98.0, {98, 0}).x, 100.0, 1e-9);
}

TEST(SafetyBox, StraightRoadAtStoppingDistance) {
  const Polyline path = Polyline({{0, 0}, {100, 0}}).resampled(1.0);
  for (double v : {0.0, 3.0, 8.0}) {
    const OrientedBox b = safety_box({{0, 0, 0}, v}, BicycleParams::car(), path, 0.0);
    EXPECT_NEAR(b.center.x, stopping_distance(v), 1e-9);
    EXPECT_NEAR(b.center.y, 0.0, 1e-9);
    EXPECT_NEAR(b.yaw, 0.0, 1e-12);
    EXPECT_DOUBLE_EQ(b.half_length, 2.25);
    EXPECT_DOUBLE_EQ(b.half_width, 1.0);
  }
}

TEST(SafetyBox, FollowsCurveAndKeepsArea) {
  const LaneMap m = curve_map(2.0, 15.0, kPi / 2, 30.0);
  const Route r = lane_route(m, 0, 2);
  const Pose2D start{r.path.points()[0].x, r.path.points()[0].y, r.path.heading_at(0.0)};
  const OrientedBox b = safety_box({start, 8.0}, BicycleParams::car(), r.path, 0.0);
  EXPECT_LT(r.path.project(b.center).distance, 0.5);
  EXPECT_GT(std::abs(wrap_angle(b.yaw - start.yaw)), 0.2);
  EXPECT_DOUBLE_EQ(b.half_length * b.half_width, 2.25);
}

TEST(PredictCollision, NoActorsNoCollision) {
  WorldState w = road();
  place_ego(w, 10, 8);
  EXPECT_FALSE(predict_collision(w.ego, {}, w.route->path, w.progress.s, 8.0));
}

TEST(PredictCollision, ActorsBehindAreIgnored) {
  WorldState w = road();
  place_ego(w, 50, 2);
  const std::vector<Actor> actors{actor_at(1, ActorKind::vehicle, {45, kLaneY, 0}, 10.0)};
  EXPECT_FALSE(predict_collision(w.ego, actors, w.route->path, w.progress.s, 2.0));
}

TEST(PredictCollision, StationaryCarAheadAtConstantSpeed) {
  WorldState w = road();
  for (double gap : {2.0, 5.0, 9.0, 14.0}) {
    place_ego(w, 20, 8);
    const double x = 20 + 4.5 + gap;
    const std::vector<Actor> actors{actor_at(1, ActorKind::vehicle, {x, kLaneY, 0})};
    const auto hit = predict_collision(w.ego, actors, w.route->path, w.progress.s, 8.0);
    ASSERT_TRUE(hit) << gap;
    const int want = static_cast<int>(std::ceil(gap / (8.0 * 0.05)));
    EXPECT_NEAR(hit->step, want, 1) << gap;
    EXPECT_EQ(hit->actor_id, 1);
    EXPECT_NEAR(hit->time, hit->step * 0.05, 1e-12);
  }
  place_ego(w, 20, 8);
  const std::vector<Actor> far{actor_at(1, ActorKind::vehicle, {20 + 4.5 + 17.0, kLaneY, 0})};
  EXPECT_FALSE(predict_collision(w.ego, far, w.route->path, w.progress.s, 8.0));
}

TEST(PredictCollision, CarMovingAwayFasterIsSafe) {
  WorldState w = road();
  place_ego(w, 20, 8);
  Actor lead = actor_at(1, ActorKind::vehicle, {30, kLaneY, 0}, 10.0);
  lead.last_command = {0.0, 0.0, false};
  EXPECT_FALSE(predict_collision(w.ego, {lead}, w.route->path, w.progress.s, 8.0));
}

TEST(Decision, EmptyRoadIsRegular) {
  WorldState w = road();
  place_ego(w, 20, 5);
  const ExpertDecision d = target_speed_decision(w, {});
  EXPECT_EQ(d.target_speed, 8.0);
  EXPECT_EQ(d.reason, ExpertReason::regular);
  EXPECT_EQ(d.speed_class_index, 0u);
}

TEST(Decision, PedestrianAheadOnPathSlowsToCaution) {
  WorldState w = road();
  place_ego(w, 20, 5);
  w.actors.push_back(actor_at(1, ActorKind::pedestrian, {38, kLaneY + 3.0, -kPi / 2}));
  const ExpertDecision d = target_speed_decision(w, {});
  EXPECT_EQ(d.target_speed, 2.0);
  EXPECT_EQ(d.reason, ExpertReason::pedestrian_near);
}

TEST(Decision, PedestriansOutsideConeOrCorridorIgnored) {
  WorldState w = road();
  place_ego(w, 20, 5);
  w.actors.push_back(actor_at(1, ActorKind::pedestrian, {15, kLaneY, 0}));
  w.actors.push_back(actor_at(2, ActorKind::pedestrian, {35, kLaneY + 8.0, 0}));
  w.actors.push_back(actor_at(3, ActorKind::pedestrian, {55, kLaneY, 0}));
  EXPECT_EQ(decide_speed(w), 8.0);
}

TEST(Decision, CarInsideSafetyBoxStops) {
  WorldState w = road();
  place_ego(w, 20, 8);
  w.actors.push_back(actor_at(4, ActorKind::vehicle, {29, kLaneY, 0}));
  const ExpertDecision d = target_speed_decision(w, {});
  EXPECT_EQ(d.target_speed, 0.0);
  EXPECT_EQ(d.reason, ExpertReason::collision_predicted);
  EXPECT_EQ(d.collision_actor, 4);
  EXPECT_EQ(d.speed_class_index, 3u);
}

TEST(Decision, RedLightAheadStopsGreenDoesNot) {
  WorldState w = road();
  place_ego(w, 40, 8);
  TrafficLight l;
  l.id = 0;
  l.stop_line_a = {46, -3.5};
  l.stop_line_b = {46, 0};
  l.heading = 0.0;
  l.schedule = {{LightPhase::red, 100.0}};
  w.lights = {l};
  const ExpertDecision d = target_speed_decision(w, {});
  EXPECT_EQ(d.target_speed, 0.0);
  EXPECT_EQ(d.reason, ExpertReason::red_light);

  w.lights[0].schedule = {{LightPhase::green, 100.0}};
  EXPECT_EQ(decide_speed(w), 8.0);

  w.lights[0].schedule = {{LightPhase::red, 100.0}};
  w.lights[0].heading = kPi;
  EXPECT_EQ(decide_speed(w), 8.0);
}

TEST(Decision, RedLightBehindIsIgnored) {
  WorldState w = road();
  place_ego(w, 50, 8);
  TrafficLight l;
  l.stop_line_a = {46, -3.5};
  l.stop_line_b = {46, 0};
  l.schedule = {{LightPhase::red, 100.0}};
  w.lights = {l};
  EXPECT_EQ(decide_speed(w), 8.0);
}

TEST(Decision, StopSignApproachOnTriggerAndServed) {
  WorldState w = road();
  w.signs = {{7, rect(50, 54, -3.5, 0)}};
  place_ego(w, 44, 8);
  EXPECT_EQ(target_speed_decision(w, {}).reason, ExpertReason::stop_sign_approach);
  EXPECT_EQ(decide_speed(w), 2.0);
  place_ego(w, 50, 1);
  EXPECT_EQ(target_speed_decision(w, {}).reason, ExpertReason::stop_sign_on_trigger);
  EXPECT_EQ(decide_speed(w), 0.0);
  EXPECT_EQ(target_speed_decision(w, {7}).target_speed, 8.0);
}

TEST(Decision, StopSignFacingOtherWayIgnored) {
  WorldState w = road();
  w.signs = {{7, rect(54, 50, 0, -3.5)}};
  w.signs[0].trigger_area = {{54, 0}, {50, 0}, {50, -3.5}, {54, -3.5}};
  place_ego(w, 50, 1);
  EXPECT_EQ(decide_speed(w), 8.0);
}

TEST(Decision, IntersectionSlowsDown) {
  JunctionOptions o;
  const Junction j = make_junction(o);
  Route r = junction_route(j, 0, exit_arm(Turn::straight), 3);
  WorldState w = make_world(make_scenario("j", j.map, r), 0);
  w.actors.clear();
  w.ego.state = {{-o.half_size - 30.0, kLaneY, 0.0}, 5.0};
  w.progress = route_progress(*w.route, w.ego.state.pose);
  EXPECT_EQ(decide_speed(w), 8.0);
  w.ego.state.pose.x = 0.0;
  w.progress = route_progress(*w.route, w.ego.state.pose);
  const ExpertDecision d = target_speed_decision(w, {});
  EXPECT_EQ(d.target_speed, 5.0);
  EXPECT_EQ(d.reason, ExpertReason::intersection);
}

TEST(Decision, MinimumOverRules) {
  WorldState w = road();
  place_ego(w, 20, 8);
  w.actors.push_back(actor_at(1, ActorKind::pedestrian, {38, kLaneY + 3.0, -kPi / 2}));
  w.actors.push_back(actor_at(4, ActorKind::vehicle, {29, kLaneY, 0}));
  EXPECT_EQ(decide_speed(w), 0.0);
}

TEST(Decision, AddingActorsNeverRaisesSpeed) {
  Rng rng = make_rng(21);
  const ActorKind kinds[] = {ActorKind::vehicle, ActorKind::pedestrian, ActorKind::cyclist};
  for (int trial = 0; trial < 300; ++trial) {
    WorldState w = road();
    place_ego(w, 30, uniform(rng, 0, 9));
    double prev = decide_speed(w);
    for (int k = 0; k < 4; ++k) {
      const ActorKind kind = kinds[std::uniform_int_distribution<int>(0, 2)(rng)];
      Actor a = actor_at(k + 1, kind, {uniform(rng, 20, 80), uniform(rng, -8, 5), uniform(rng, -kPi, kPi)},
                         uniform(rng, 0, 6));
      a.last_command = {uniform(rng, -0.5, 0.5), uniform(rng, 0, 1), false};
      w.actors.push_back(a);
      const double now = decide_speed(w);
      ASSERT_LE(now, prev) << trial << " " << k;
      ASSERT_TRUE(now == 0.0 || now == 2.0 || now == 5.0 || now == 8.0);
      prev = now;
    }
  }
}

TEST(Expert, CruisesInLane) {
  WorldState w = road(400.0);
  Expert e;
  double max_lat = 0.0;
  for (int i = 0; i < 600; ++i) {
    tick(w, e.act(w));
    if (i > 100) max_lat = std::max(max_lat, std::abs(w.progress.lateral));
  }
  EXPECT_NEAR(w.ego.state.speed, 8.0, 0.1);
  EXPECT_LT(max_lat, 0.05);
}

TEST(Expert, StopsAtSignThenProceeds) {
  WorldState w = road(200.0);
  w.signs = {{7, rect(50, 54, -3.5, 0)}};
  Expert e;
  double min_speed_on_sign = 1e9;
  for (int i = 0; i < 1200; ++i) {
    tick(w, e.act(w));
    if (box_on_polygon(w.ego.box(), w.signs[0].trigger_area))
      min_speed_on_sign = std::min(min_speed_on_sign, w.ego.state.speed);
  }
  EXPECT_LT(min_speed_on_sign, 0.1);
  EXPECT_TRUE(e.served_signs().contains(7));
  EXPECT_GT(w.progress.s, 100.0);
}
