#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "drivebench/dynamics.hpp"
#include "drivebench/random.hpp"

using namespace drivebench;

namespace {

// Fine-step integration of the continuous model with the same β and yaw rate.
VehicleState dense_unroll(VehicleState s, double delta, double accel, double duration, double h = 1e-4) {
  const BicycleParams p;
  const double beta = std::atan(p.rear_axle_offset / (p.front_axle_offset + p.rear_axle_offset) * std::tan(delta));
  const int n = static_cast<int>(std::lround(duration / h));
  double x = s.pose.x, y = s.pose.y, yaw = s.pose.yaw, v = s.speed;
  for (int i = 0; i < n; ++i) {
    x += v * std::cos(yaw + beta) * h;
    y += v * std::sin(yaw + beta) * h;
    yaw += v / p.rear_axle_offset * std::sin(beta) * h;
    v = std::max(0.0, v + accel * h);
  }
  return {{x, y, wrap_angle(yaw)}, v};
}

ControlCommand steer_for(double delta) { return {-delta / BicycleParams{}.max_steer_angle, 0.0, false}; }

bool corners_or_edges_meet(const OrientedBox& a, const OrientedBox& b) {
  const auto ca = a.corners();
  const auto cb = b.corners();
  for (const auto& c : ca) {
    if (b.contains(c)) return true;
  }
  for (const auto& c : cb) {
    if (a.contains(c)) return true;
  }
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      if (segments_intersect(ca[i], ca[(i + 1) % 4], cb[j], cb[(j + 1) % 4])) return true;
    }
  }
  return false;
}

OrientedBox random_box(Rng& rng) {
  return {{uniform(rng, -4, 4), uniform(rng, -4, 4)}, uniform(rng, -kPi, kPi), uniform(rng, 0.2, 3.0),
          uniform(rng, 0.2, 2.0)};
}

}  // namespace

TEST(StepBicycle, ZeroSteerMovesAlongHeading) {
  const VehicleState s{{0, 0, 0}, 4.0};
  const VehicleState n = step_bicycle(s, {0.0, 0.0, false}, BicycleParams{}, 0.05);
  EXPECT_DOUBLE_EQ(n.pose.x, 0.2);
  EXPECT_DOUBLE_EQ(n.pose.y, 0.0);
  EXPECT_DOUBLE_EQ(n.pose.yaw, 0.0);
  EXPECT_DOUBLE_EQ(n.speed, 4.0);
}

TEST(StepBicycle, StandstillIsFixedPoint) {
  const VehicleState s{{1, 2, 0.3}, 0.0};
  for (double steer : {-1.0, -0.3, 0.0, 0.7, 1.0}) {
    const VehicleState n = step_bicycle(s, {steer, 0.0, false}, BicycleParams{}, 0.05);
    EXPECT_EQ(n.pose, s.pose);
  }
}

TEST(StepBicycle, LongitudinalModel) {
  const BicycleParams p;
  const VehicleState s{{0, 0, 0}, 5.0};
  EXPECT_DOUBLE_EQ(step_bicycle(s, {0, 1.0, false}, p, 0.1).speed, 5.3);
  EXPECT_DOUBLE_EQ(step_bicycle(s, {0, 0.5, false}, p, 0.1).speed, 5.15);
  EXPECT_DOUBLE_EQ(step_bicycle(s, {0, 1.0, true}, p, 0.1).speed, 4.4);
  EXPECT_DOUBLE_EQ(step_bicycle({{0, 0, 0}, 0.2}, {0, 0, true}, p, 0.1).speed, 0.0);
}

TEST(StepBicycle, PositiveSteerTurnsRight) {
  const VehicleState n = step_bicycle({{0, 0, 0}, 5.0}, {0.5, 0, false}, BicycleParams{}, 0.05);
  EXPECT_LT(n.pose.yaw, 0.0);
  EXPECT_LT(n.pose.y, 0.0);
}

TEST(StepBicycle, InputsAreClamped) {
  const VehicleState s{{0, 0, 0}, 5.0};
  const BicycleParams p;
  EXPECT_EQ(step_bicycle(s, {3.0, 2.0, false}, p, 0.05), step_bicycle(s, {1.0, 1.0, false}, p, 0.05));
}

TEST(StepBicycle, YawStaysWrapped) {
  VehicleState s{{0, 0, kPi - 0.01}, 8.0};
  for (int i = 0; i < 400; ++i) {
    s = step_bicycle(s, {-1.0, 0.0, false}, BicycleParams{}, 0.05);
    ASSERT_GT(s.pose.yaw, -kPi);
    ASSERT_LE(s.pose.yaw, kPi);
  }
}

TEST(StepBicycle, CoarseUnrollAgainstDenseOracle) {
  const double delta = 0.2;
  const VehicleState s{{0, 0, 0}, 5.0};
  const std::vector<ControlCommand> cmds(20, steer_for(delta));
  const VehicleState coarse = unroll(s, cmds, BicycleParams{}, 0.05).back();
  const VehicleState dense = dense_unroll(s, delta, 0.0, 1.0);
  // 5 m traveled; explicit Euler at dt = 0.05 lags the dense solution by ~5 cm.
  EXPECT_LT(distance(coarse.pose.position(), dense.pose.position()), 1e-2 * 5.0);
  EXPECT_NEAR(coarse.pose.yaw, dense.pose.yaw, 1e-3);
}

TEST(StepBicycle, FortyStepHeadingMatchesDenseOracle) {
  for (double delta : {-1.0, -0.4, 0.1, 0.6, 1.2}) {
    const VehicleState s{{0, 0, 0.4}, 6.0};
    const std::vector<ControlCommand> cmds(40, steer_for(delta));
    const VehicleState coarse = unroll(s, cmds, BicycleParams{}, 0.05).back();
    const VehicleState dense = dense_unroll(s, delta, 0.0, 2.0);
    EXPECT_NEAR(wrap_angle(coarse.pose.yaw - dense.pose.yaw), 0.0, 1e-3) << "delta " << delta;
  }
}

TEST(StepBicycle, DriftPerMeterWithinHalfStepHeadingLag) {
  // Euler steps along the heading at the start of each step, so the coarse
  // path trails the exact arc by half a step of yaw: error <= L·|ω|·dt/2.
  const BicycleParams p;
  Rng rng = make_rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const double delta = uniform(rng, -p.max_steer_angle, p.max_steer_angle);
    const double v = uniform(rng, 0.5, 8.0);
    const double beta = std::atan(0.5 * std::tan(delta));
    const double omega = v / p.rear_axle_offset * std::sin(beta);
    const VehicleState s{{0, 0, uniform(rng, -kPi, kPi)}, v};
    const std::vector<ControlCommand> cmds(20, steer_for(delta));
    const VehicleState coarse = unroll(s, cmds, p, 0.05).back();
    const VehicleState dense = dense_unroll(s, delta, 0.0, 1.0);
    const double err = distance(coarse.pose.position(), dense.pose.position());
    EXPECT_LE(err, 1.02 * v * std::abs(omega) * 0.05 / 2.0 + 1e-6) << delta << " " << v;
    if (std::abs(omega) * 0.05 <= 0.02) EXPECT_LT(err, 1e-2 * v) << delta << " " << v;
  }
}

TEST(StepBicycle, DriftShrinksLinearlyWithStep) {
  const double delta = 1.0;
  const VehicleState s{{0, 0, 0}, 7.0};
  const VehicleState dense = dense_unroll(s, delta, 0.0, 1.0);
  double previous = 0.0;
  for (int n : {20, 40, 80}) {
    const std::vector<ControlCommand> cmds(static_cast<std::size_t>(n), steer_for(delta));
    const double err = distance(unroll(s, cmds, BicycleParams{}, 1.0 / n).back().pose.position(), dense.pose.position());
    if (previous > 0.0) EXPECT_NEAR(previous / err, 2.0, 0.1);
    previous = err;
  }
}

TEST(Unroll, EmptyCommandsGiveInitialState) {
  const VehicleState s{{1, 2, 3}, 4};
  const auto traj = unroll(s, {}, BicycleParams{}, 0.05);
  ASSERT_EQ(traj.size(), 1u);
  EXPECT_EQ(traj[0], s);
}

TEST(Unroll, ConstantSpeedStraightIsEvenlySpaced) {
  const VehicleState s{{0, 0, 0.7}, 3.0};
  const std::vector<ControlCommand> cmds(10);
  const auto traj = unroll(s, cmds, BicycleParams{}, 0.05);
  ASSERT_EQ(traj.size(), 11u);
  for (std::size_t i = 1; i < traj.size(); ++i) {
    EXPECT_NEAR(distance(traj[i].pose.position(), traj[i - 1].pose.position()), 0.15, 1e-12);
    EXPECT_NEAR((traj[i].pose.position() - traj[0].pose.position()).cross(s.pose.heading()), 0.0, 1e-12);
  }
}

TEST(Unroll, EqualsFoldOfSteps) {
  Rng rng = make_rng(3);
  std::vector<ControlCommand> cmds;
  for (int i = 0; i < 50; ++i) cmds.push_back({uniform(rng, -1, 1), uniform(rng, 0, 1), uniform(rng, 0, 1) < 0.2});
  const VehicleState s{{0, 0, 0}, 5.0};
  const auto traj = unroll(s, cmds, BicycleParams{}, 0.05);
  VehicleState f = s;
  for (std::size_t i = 0; i < cmds.size(); ++i) {
    f = step_bicycle(f, cmds[i], BicycleParams{}, 0.05);
    ASSERT_EQ(traj[i + 1], f);
  }
}

TEST(Frames, IdentityFrame) {
  const Vec2 p = global_to_local({0, 0, 0}, {3, 4});
  EXPECT_DOUBLE_EQ(p.x, 3);
  EXPECT_DOUBLE_EQ(p.y, 4);
}

TEST(Frames, QuarterTurnFrame) {
  const Vec2 p = global_to_local({1, 0, kPi / 2}, {1, 1});
  EXPECT_NEAR(p.x, 1.0, 1e-15);
  EXPECT_NEAR(p.y, 0.0, 1e-15);
}

TEST(Frames, RoundTripProperty) {
  Rng rng = make_rng(5);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const Pose2D f{uniform(rng, -500, 500), uniform(rng, -500, 500), uniform(rng, -kPi, kPi)};
    const Vec2 p{uniform(rng, -500, 500), uniform(rng, -500, 500)};
    worst = std::max(worst, distance(local_to_global(f, global_to_local(f, p)), p));
  }
  EXPECT_LT(worst, 1e-9);
}

TEST(Frames, ComposeInvertsRelativePose) {
  Rng rng = make_rng(6);
  for (int i = 0; i < 1000; ++i) {
    const Pose2D a{uniform(rng, -50, 50), uniform(rng, -50, 50), uniform(rng, -kPi, kPi)};
    const Pose2D b{uniform(rng, -50, 50), uniform(rng, -50, 50), uniform(rng, -kPi, kPi)};
    const Pose2D c = compose(a, relative_pose(a, b));
    EXPECT_LT(distance(c.position(), b.position()), 1e-9);
    EXPECT_NEAR(wrap_angle(c.yaw - b.yaw), 0.0, 1e-12);
  }
}

TEST(WrapAngle, Range) {
  EXPECT_DOUBLE_EQ(wrap_angle(kPi), kPi);
  EXPECT_DOUBLE_EQ(wrap_angle(-kPi), kPi);
  EXPECT_NEAR(wrap_angle(3 * kPi + 0.1), -kPi + 0.1, 1e-12);
}

TEST(Obb, IdenticalBoxesOverlap) {
  const OrientedBox b{{1, 2}, 0.3, 2.0, 1.0};
  EXPECT_TRUE(obb_overlap(b, b));
}

TEST(Obb, FarApartBoxesDoNotOverlap) {
  EXPECT_FALSE(obb_overlap({{0, 0}, 0, 0.5, 0.5}, {{10, 0}, 0, 0.5, 0.5}));
}

TEST(Obb, TouchingCountsAsOverlap) {
  EXPECT_TRUE(obb_overlap({{0, 0}, 0, 0.5, 0.5}, {{1, 0}, 0, 0.5, 0.5}));
  EXPECT_FALSE(obb_overlap({{0, 0}, 0, 0.5, 0.5}, {{1.0 + 1e-9, 0}, 0, 0.5, 0.5}));
}

TEST(Obb, RotatedUnitBoxMatchesGridOracle) {
  const OrientedBox a{{0, 0}, 0, 0.5, 0.5};
  const OrientedBox b{{1.0, 0}, kPi / 4, 0.5, 0.5};
  bool grid = false;
  for (int i = 0; i <= 400 && !grid; ++i) {
    for (int j = 0; j <= 400 && !grid; ++j) {
      const Vec2 p{-1.0 + 3.0 * i / 400.0, -1.5 + 3.0 * j / 400.0};
      grid = a.contains(p) && b.contains(p);
    }
  }
  EXPECT_TRUE(grid);
  EXPECT_EQ(obb_overlap(a, b), grid);
}

TEST(Obb, SymmetricAndMatchesEdgeOracle) {
  Rng rng = make_rng(7);
  int hits = 0;
  for (int i = 0; i < 20000; ++i) {
    const OrientedBox a = random_box(rng);
    const OrientedBox b = random_box(rng);
    const bool sat = obb_overlap(a, b);
    ASSERT_EQ(sat, obb_overlap(b, a));
    ASSERT_EQ(sat, corners_or_edges_meet(a, b)) << i;
    hits += sat ? 1 : 0;
  }
  EXPECT_GT(hits, 1000);
  EXPECT_LT(hits, 19000);
}

TEST(VehicleBox, CenteredOnPose) {
  const OrientedBox b = vehicle_box({3, 4, 0.5}, BicycleParams{});
  EXPECT_EQ(b.center, (Vec2{3, 4}));
  EXPECT_DOUBLE_EQ(b.half_length, 2.25);
  EXPECT_DOUBLE_EQ(b.half_width, 1.0);
}
