#include <gtest/gtest.h>

#include <cmath>

#include "drivebench/controllers.hpp"
#include "drivebench/random.hpp"

using namespace drivebench;

namespace {

SpeedDistribution dist(double a, double b, double c, double d) {
  SpeedDistribution s;
  s.probs = {a, b, c, d};
  return s;
}

SpeedDistribution random_dist(Rng& rng) {
  SpeedDistribution s;
  double sum = 0.0;
  for (double& p : s.probs) sum += (p = uniform(rng, 0.0, 1.0));
  for (double& p : s.probs) p /= sum;
  return s;
}

WaypointPlan straight_plan(double v) {
  WaypointPlan p;
  for (std::size_t k = 0; k < kNumWaypoints; ++k) p.points[k] = {(k + 1) * v * kWaypointInterval, 0.0};
  return p;
}

PathPlan straight_path() {
  PathPlan p;
  for (std::size_t k = 0; k < kNumPathPoints; ++k) p.points[k] = {(k + 1) * kPathSpacing, 0.0};
  return p;
}

PathPlan left_arc(double radius) {
  PathPlan p;
  for (std::size_t k = 0; k < kNumPathPoints; ++k) {
    const double th = (k + 1) * kPathSpacing / radius;
    p.points[k] = {radius * std::sin(th), radius * (1.0 - std::cos(th))};
  }
  return p;
}

// Reference discrete PID, written out longhand.
std::vector<double> pid_oracle(const std::vector<double>& errors, double dt, double kp, double ki, double kd,
                               double limit) {
  std::vector<double> out;
  double integral = 0.0;
  for (std::size_t k = 0; k < errors.size(); ++k) {
    integral += errors[k] * dt;
    if (integral > limit) integral = limit;
    if (integral < -limit) integral = -limit;
    const double d = k == 0 ? 0.0 : (errors[k] - errors[k - 1]) / dt;
    out.push_back(kp * errors[k] + ki * integral + kd * d);
  }
  return out;
}

}  // namespace

TEST(Pid, ZeroErrorZeroOutput) {
  PidState s;
  EXPECT_EQ(pid_step(s, 0.0, 0.05, {1.0, 0.5, 0.2, 10.0}), 0.0);
}

TEST(Pid, ProportionalOnFirstStep) {
  PidState s;
  EXPECT_DOUBLE_EQ(pid_step(s, 2.0, 0.05, {1.5, 0.0, 0.7, 10.0}), 3.0);
}

TEST(Pid, MatchesReferenceSequence) {
  // First-order plant x' = u, tracking a setpoint of 1.
  const PidGains g{0.8, 0.3, 0.05, 0.4};
  PidState s;
  double x = 0.0;
  std::vector<double> errors;
  std::vector<double> got;
  for (int k = 0; k < 200; ++k) {
    const double e = 1.0 - x;
    errors.push_back(e);
    got.push_back(pid_step(s, e, 0.05, g));
    x += got.back() * 0.05;
  }
  const auto want = pid_oracle(errors, 0.05, g.kp, g.ki, g.kd, g.integral_limit);
  for (std::size_t k = 0; k < got.size(); ++k) EXPECT_EQ(got[k], want[k]) << k;
  EXPECT_NEAR(x, 1.0, 2e-2);
}

TEST(ConfidenceWeighted, OneHotRegularMinusOffset) {
  const SpeedDecision d = confidence_weighted_speed(SpeedDistribution::one_hot(0), {});
  EXPECT_NEAR(d.target_speed, 29.0 / 3.6 - 2.0, 1e-12);
  EXPECT_NEAR(d.target_speed, 6.06, 0.005);
  EXPECT_FALSE(d.brake);
}

TEST(ConfidenceWeighted, StopMassAboveThresholdBrakes) {
  const SpeedDecision d = confidence_weighted_speed(dist(0.4, 0, 0, 0.6), {});
  EXPECT_TRUE(d.brake);
  EXPECT_EQ(d.target_speed, 0.0);
  EXPECT_TRUE(confidence_weighted_speed(dist(0.5, 0, 0, 0.5), {}).brake);
}

TEST(ConfidenceWeighted, EvenSplitWithoutOffset) {
  ControllerConfig c;
  c.inference_speed_offset = 0.0;
  const SpeedDecision d = confidence_weighted_speed(dist(0.5, 0.5, 0, 0), c);
  EXPECT_NEAR(d.target_speed, (29.0 + 18.0) / 2.0 / 3.6, 1e-12);
  EXPECT_NEAR(d.target_speed, 6.53, 0.005);
}

TEST(ConfidenceWeighted, StopMassRenormalizedAway) {
  ControllerConfig c;
  c.inference_speed_offset = 0.0;
  const SpeedDecision d = confidence_weighted_speed(dist(0.4, 0.2, 0.1, 0.3), c);
  const double want = (0.4 * 29 + 0.2 * 18 + 0.1 * 7) / 0.7 / 3.6;
  EXPECT_NEAR(d.target_speed, want, 1e-12);
  EXPECT_LT(d.target_speed, 29.0 / 3.6);
  c.argmax = true;
  EXPECT_NEAR(confidence_weighted_speed(dist(0.4, 0.2, 0.1, 0.3), c).target_speed, 29.0 / 3.6, 1e-12);
}

TEST(ConfidenceWeighted, OffsetFloorsAtZero) {
  const SpeedDecision d = confidence_weighted_speed(SpeedDistribution::one_hot(2), {});
  EXPECT_EQ(d.target_speed, 0.0);
  EXPECT_FALSE(d.brake);
}

TEST(ConfidenceWeighted, ArgmaxAgreesOnOneHot) {
  ControllerConfig weighted;
  ControllerConfig argmax;
  argmax.argmax = true;
  for (std::size_t i = 0; i < kNumSpeedClasses; ++i) {
    const auto a = confidence_weighted_speed(SpeedDistribution::one_hot(i), weighted);
    const auto b = confidence_weighted_speed(SpeedDistribution::one_hot(i), argmax);
    EXPECT_EQ(a.target_speed, b.target_speed);
    EXPECT_EQ(a.brake, b.brake);
  }
}

TEST(ConfidenceWeighted, ConvexCombinationBelowThreshold) {
  Rng rng = make_rng(4);
  ControllerConfig c;
  for (int i = 0; i < 10000; ++i) {
    const SpeedDistribution d = random_dist(rng);
    const SpeedDecision s = confidence_weighted_speed(d, c);
    if (d.probs[kStopClass] >= c.brake_threshold) {
      ASSERT_TRUE(s.brake);
      continue;
    }
    ASSERT_FALSE(s.brake);
    ASSERT_LE(s.target_speed, class_speed(0) - c.inference_speed_offset + 1e-12);
    ASSERT_GE(s.target_speed, 0.0);
  }
}

TEST(ConfidenceWeighted, ContinuousAwayFromThreshold) {
  Rng rng = make_rng(8);
  ControllerConfig c;
  c.inference_speed_offset = 0.0;
  for (int i = 0; i < 2000; ++i) {
    SpeedDistribution d = random_dist(rng);
    if (d.probs[kStopClass] > 0.45) continue;
    SpeedDistribution e = d;
    e.probs[0] += 1e-7;
    e.probs[1] -= std::min(1e-7, e.probs[1]);
    ASSERT_NEAR(confidence_weighted_speed(d, c).target_speed, confidence_weighted_speed(e, c).target_speed, 1e-5);
  }
}

TEST(Distribution, Validity) {
  EXPECT_TRUE(SpeedDistribution::one_hot(1).valid());
  EXPECT_FALSE(dist(0.5, 0.4, 0, 0).valid());
  EXPECT_FALSE(dist(1.2, -0.2, 0, 0).valid());
}

TEST(AimPoint, SelectionRule) {
  EXPECT_EQ(aim_distance(5.0, {}), 2.25);
  EXPECT_EQ(aim_distance(5.5, {}), 3.0);
  const std::vector<Vec2> pts{{1, 0}, {2, 0}, {3, 0}};
  EXPECT_EQ(select_aim_point(pts, 2.25), (Vec2{3, 0}));
  EXPECT_EQ(select_aim_point(pts, 5.0), (Vec2{3, 0}));
  EXPECT_EQ(select_aim_point(pts, 2.0), (Vec2{2, 0}));
}

TEST(WaypointController, StraightPlanHoldsGeneratingSpeed) {
  const WaypointPlan p = straight_plan(4.0);
  EXPECT_NEAR(waypoint_target_speed(p), 4.0, 1e-12);
  WaypointController c;
  const ControlCommand cmd = c.step(p, {{0, 0, 0}, 3.0}, 0.05);
  EXPECT_NEAR(cmd.steer, 0.0, 1e-12);
  EXPECT_GT(cmd.throttle, 0.0);
  EXPECT_FALSE(cmd.brake);
}

TEST(WaypointController, CollapsedPlanBrakesWithZeroSteer) {
  WaypointController c;
  const ControlCommand cmd = c.step(WaypointPlan{}, {{0, 0, 0}, 0.0}, 0.05);
  EXPECT_EQ(cmd.steer, 0.0);
  EXPECT_TRUE(cmd.brake);
}

TEST(WaypointController, LeftCurveSteersLeftWithFastAim) {
  WaypointPlan p;
  const PathPlan arc = left_arc(8.0);
  for (std::size_t k = 0; k < kNumWaypoints; ++k) p.points[k] = arc.points[k];
  WaypointController c;
  const ControlCommand cmd = c.step(p, {{0, 0, 0}, 6.0}, 0.05);
  std::size_t i = 0;
  while (arc.points[i].norm() < 3.0) ++i;
  const Vec2 aim = arc.points[i];
  EXPECT_NEAR(cmd.steer, -std::atan2(aim.y, aim.x), 1e-12);
  EXPECT_LT(cmd.steer, 0.0);
}

TEST(WaypointController, TargetSpeedInvariantUnderRotation) {
  Rng rng = make_rng(12);
  for (int i = 0; i < 200; ++i) {
    WaypointPlan p;
    for (auto& pt : p.points) pt = {uniform(rng, -10, 10), uniform(rng, -10, 10)};
    const double th = uniform(rng, -kPi, kPi);
    WaypointPlan q = p;
    for (auto& pt : q.points) pt = local_to_global({0, 0, th}, pt);
    ASSERT_NEAR(waypoint_target_speed(p), waypoint_target_speed(q), 1e-9);
  }
}

TEST(PathSpeedController, StraightOneHotRegular) {
  PathSpeedController c;
  const ControlCommand cmd = c.step(straight_path(), SpeedDistribution::one_hot(0), {{0, 0, 0}, 2.0}, 0.05);
  EXPECT_NEAR(cmd.steer, 0.0, 1e-12);
  EXPECT_GT(cmd.throttle, 0.0);
}

TEST(PathSpeedController, SteeringIndependentOfSpeedDistribution) {
  Rng rng = make_rng(13);
  const PathPlan arc = left_arc(12.0);
  for (int i = 0; i < 200; ++i) {
    PathSpeedController a;
    PathSpeedController b;
    const VehicleState st{{0, 0, 0}, uniform(rng, 0, 9)};
    ASSERT_EQ(a.step(arc, random_dist(rng), st, 0.05).steer, b.step(arc, random_dist(rng), st, 0.05).steer);
  }
}

TEST(PathSpeedController, BrakesOnStopMass) {
  PathSpeedController c;
  const ControlCommand cmd = c.step(straight_path(), dist(0.3, 0, 0, 0.7), {{0, 0, 0}, 5.0}, 0.05);
  EXPECT_TRUE(cmd.brake);
  EXPECT_EQ(cmd.throttle, 0.0);
}

TEST(Longitudinal, BrakesWhenWellAboveTarget) {
  PidState s;
  EXPECT_TRUE(longitudinal_command(s, 4.0, 8.0, 0.05, {}).brake);
  EXPECT_TRUE(longitudinal_command(s, 0.0, 0.0, 0.05, {}).brake);
  const Longitudinal l = longitudinal_command(s, 8.0, 4.0, 0.05, {});
  EXPECT_FALSE(l.brake);
  EXPECT_EQ(l.throttle, 1.0);
}

TEST(StopBuffer, NeverBrakesWithoutSign) {
  StopSignBuffer b;
  for (int i = 0; i < 100; ++i) EXPECT_FALSE(stop_sign_buffer_step(b, {}, {0.4, 0, 0}, 8.0));
}

TEST(StopBuffer, BrakesWhenReachingBufferedSignAfterOcclusion) {
  StopSignBuffer b;
  const OrientedBox sign{{10.0, 0.0}, 0.0, 1.5, 1.75};
  const double step = 0.2;
  int first_brake = -1;
  EXPECT_FALSE(stop_sign_buffer_step(b, {sign}, {0, 0, 0}, 4.0));
  for (int k = 1; k < 100 && first_brake < 0; ++k) {
    if (stop_sign_buffer_step(b, {}, {step, 0, 0}, 4.0)) first_brake = k;
  }
  // Boxes meet when the ego front (2.25) reaches the sign back edge (10 − 1.5).
  const int want = static_cast<int>(std::ceil((10.0 - 1.5 - 2.25) / step - 1e-9));
  EXPECT_EQ(first_brake, want);
}

TEST(StopBuffer, ServedStopReleases) {
  StopSignBuffer b;
  const OrientedBox sign{{1.0, 0.0}, 0.0, 1.5, 1.75};
  EXPECT_TRUE(stop_sign_buffer_step(b, {sign}, {0, 0, 0}, 3.0));
  EXPECT_FALSE(stop_sign_buffer_step(b, {}, {0.0, 0, 0}, 0.05));
  for (int k = 0; k < 40; ++k) EXPECT_FALSE(stop_sign_buffer_step(b, {}, {0.2, 0, 0}, 1.0));
  EXPECT_FALSE(b.sign.has_value());
}

TEST(StopBuffer, ComposedMotionKeepsSignPosition) {
  Rng rng = make_rng(31);
  StopSignBuffer b;
  const Vec2 sign_world{40.0, 5.0};
  Pose2D ego{0, 0, 0};
  stop_sign_buffer_step(b, {{sign_world, 0.3, 0.5, 0.5}}, {0, 0, 0}, 5.0);
  for (int k = 0; k < 500; ++k) {
    const Pose2D delta{uniform(rng, 0, 0.3), uniform(rng, -0.02, 0.02), uniform(rng, -0.03, 0.03)};
    ego = compose(ego, delta);
    stop_sign_buffer_step(b, {}, delta, 5.0);
    if (!b.sign) break;
    ASSERT_LT(distance(b.sign->center, global_to_local(ego, sign_world)), 1e-6) << k;
    ASSERT_NEAR(wrap_angle(b.sign->yaw - (0.3 - ego.yaw)), 0.0, 1e-9);
  }
}
