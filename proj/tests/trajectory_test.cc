/******************************************************************************
 * Copyright 2026 The Autotune Authors. All Rights Reserved.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 *****************************************************************************/

#include <cmath>

#include <gtest/gtest.h>

#include "autotune/error.h"
#include "autotune/trajectory.h"
#include "test_util.h"

namespace autotune {
namespace {

using testing::Gen;

Trajectory Line(int n, double spacing, double speed) {
  std::vector<TrajectoryPoint> pts;
  for (int i = 0; i < n; ++i) {
    TrajectoryPoint p;
    p.x = i * spacing;
    p.t = i * spacing / speed;
    p.speed = speed;
    pts.push_back(p);
  }
  return Trajectory(pts);
}

TEST(WrapAngle, Examples) {
  EXPECT_DOUBLE_EQ(WrapAngle(0.0), 0.0);
  EXPECT_DOUBLE_EQ(WrapAngle(M_PI), M_PI);
  EXPECT_DOUBLE_EQ(WrapAngle(-M_PI), M_PI);
  EXPECT_NEAR(WrapAngle(3.0 * M_PI / 2.0), -M_PI / 2.0, 1e-12);
}

TEST(WrapAngle, RangeAndEquivalence) {
  Gen gen(41);
  for (int c = 0; c < testing::kPropertyCases; ++c) {
    const double a = gen.Uniform(-50, 50);
    const double w = WrapAngle(a);
    EXPECT_GT(w, -M_PI);
    EXPECT_LE(w, M_PI);
    EXPECT_NEAR(std::remainder(a - w, 2.0 * M_PI), 0.0, 1e-9);
  }
}

TEST(Trajectory, RejectsDegenerateInput) {
  TrajectoryPoint a, b;
  b.t = 1.0;
  EXPECT_THROW(Trajectory({a, b}), Error);  // coincident
  b.x = 1.0;
  b.t = 0.0;
  EXPECT_THROW(Trajectory({a, b}), Error);  // time not increasing
  EXPECT_THROW(Trajectory({a}), Error);
  b.t = 1.0;
  b.curvature = NAN;
  EXPECT_THROW(Trajectory({a, b}), Error);
}

TEST(Trajectory, ArcLengthRecomputed) {
  std::vector<TrajectoryPoint> pts(3);
  pts[1].x = 3.0;
  pts[1].y = 4.0;
  pts[1].t = 1.0;
  pts[2].x = 3.0;
  pts[2].y = 10.0;
  pts[2].t = 2.0;
  pts[2].s = 99.0;
  const Trajectory traj(pts);
  EXPECT_DOUBLE_EQ(traj.points()[1].s, 5.0);
  EXPECT_DOUBLE_EQ(traj.length(), 11.0);
  EXPECT_DOUBLE_EQ(traj.duration(), 2.0);
}

TEST(Trajectory, AtTimeInterpolatesAndClamps) {
  const auto traj = Line(11, 1.0, 2.0);
  EXPECT_DOUBLE_EQ(traj.AtTime(1.25).x, 2.5);
  EXPECT_DOUBLE_EQ(traj.AtTime(-3.0).x, 0.0);
  EXPECT_DOUBLE_EQ(traj.AtTime(100.0).x, 10.0);
}

TEST(Trajectory, HeadingInterpolatesAcrossWrap) {
  std::vector<TrajectoryPoint> pts(2);
  pts[0].heading = M_PI - 0.1;
  pts[1].heading = -M_PI + 0.1;
  pts[1].x = 1.0;
  pts[1].t = 1.0;
  const Trajectory traj(pts);
  EXPECT_NEAR(std::abs(traj.AtTime(0.5).heading), M_PI, 1e-12);
}

TEST(Trajectory, TimeAtStationInvertsArcLength) {
  const auto traj = Line(11, 1.0, 2.0);
  EXPECT_DOUBLE_EQ(traj.TimeAtStation(3.0), 1.5);
  EXPECT_DOUBLE_EQ(traj.TimeAtStation(-1.0), 0.0);
  EXPECT_DOUBLE_EQ(traj.TimeAtStation(50.0), 5.0);
  Gen gen(42);
  for (int c = 0; c < testing::kPropertyCases; ++c) {
    const double t = gen.Uniform(0, 5);
    EXPECT_NEAR(traj.TimeAtStation(traj.AtTime(t).s), t, 1e-12);
  }
}

TEST(Trajectory, MatchSignsLeftPositive) {
  const auto traj = Line(11, 1.0, 2.0);
  const auto left = traj.Match(4.3, 0.7);
  EXPECT_NEAR(left.lateral, 0.7, 1e-12);
  EXPECT_NEAR(left.point.x, 4.3, 1e-12);
  EXPECT_EQ(left.segment, 4u);
  EXPECT_NEAR(traj.Match(4.3, -0.7).lateral, -0.7, 1e-12);
}

TEST(Trajectory, MatchWithHintAgreesNearby) {
  const auto traj = Line(201, 0.5, 5.0);
  Gen gen(43);
  for (int c = 0; c < testing::kPropertyCases; ++c) {
    const double x = gen.Uniform(0, 100);
    const double y = gen.Uniform(-2, 2);
    const auto full = traj.Match(x, y);
    const auto hinted = traj.Match(x, y, full.segment + gen.Int(0, 10));
    EXPECT_EQ(hinted.segment, full.segment);
    EXPECT_NEAR(hinted.lateral, full.lateral, 1e-12);
  }
}

TEST(Trajectory, MatchOnCircleHasRadialOffset) {
  std::vector<TrajectoryPoint> pts;
  const double r = 20.0;
  for (int i = 0; i <= 400; ++i) {
    const double th = M_PI * i / 400.0;
    TrajectoryPoint p;
    p.x = r * std::sin(th);
    p.y = r - r * std::cos(th);
    p.heading = th;
    p.curvature = 1.0 / r;
    p.t = i * 0.1;
    pts.push_back(p);
  }
  const Trajectory traj(pts);
  const double th = 1.0;
  const auto m = traj.Match(19.0 * std::sin(th), r - 19.0 * std::cos(th));
  EXPECT_NEAR(m.lateral, 1.0, 1e-3);  // inside the left turn
  EXPECT_NEAR(m.point.heading, th, 1e-3);
}

}  // namespace
}  // namespace autotune
