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

#include <algorithm>
#include <cmath>
#include <numbers>

#include "autotune/error.h"
#include "autotune/harness.h"

namespace autotune::harness {

PathBuilder::PathBuilder(double step) : step_(step) {
  if (!(step > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "path step must be > 0");
  }
  points_.push_back({});
}

PathBuilder& PathBuilder::Straight(double length) {
  if (!(length > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "straight length must be > 0");
  }
  const PathPoint start = points_.back();
  const int n = static_cast<int>(std::ceil(length / step_));
  for (int i = 1; i <= n; ++i) {
    const double s = length * i / n;
    points_.push_back({start.x + s * std::cos(start.heading),
                       start.y + s * std::sin(start.heading), start.heading,
                       0.0});
  }
  return *this;
}

PathBuilder& PathBuilder::Arc(double radius, double angle) {
  if (!(radius > 0.0) || angle == 0.0 || !std::isfinite(angle)) {
    throw Error(ErrorCode::kInvalidArgument,
                "arc needs radius > 0 and a non-zero angle");
  }
  const PathPoint start = points_.back();
  const double sign = angle > 0.0 ? 1.0 : -1.0;
  const double cx = start.x - sign * radius * std::sin(start.heading);
  const double cy = start.y + sign * radius * std::cos(start.heading);
  const int n = static_cast<int>(std::ceil(radius * std::abs(angle) / step_));
  for (int i = 1; i <= n; ++i) {
    const double h = start.heading + angle * i / n;
    points_.push_back({cx + sign * radius * std::sin(h),
                       cy - sign * radius * std::cos(h), h, sign / radius});
  }
  return *this;
}

std::vector<PathPoint> SerpentinePath(double amplitude, double wavelength,
                                      int cycles, double lead, double step) {
  if (!(amplitude > 0.0) || !(wavelength > 0.0) || cycles < 1 ||
      !(lead >= 0.0) || !(step > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "invalid serpentine geometry");
  }
  std::vector<PathPoint> path;
  const int n_lead = lead > 0.0 ? static_cast<int>(std::ceil(lead / step)) : 0;
  for (int i = 0; i < n_lead; ++i) {
    path.push_back({-lead + lead * i / n_lead, 0.0, 0.0, 0.0});
  }
  // An even count per period puts samples on every crest and trough.
  const int per_cycle =
      2 * std::max(1, static_cast<int>(std::round(wavelength / (2.0 * step))));
  const double k = 2.0 * std::numbers::pi / wavelength;
  const double half = amplitude / 2.0;
  const int n = per_cycle * cycles;
  for (int i = 0; i <= n; ++i) {
    const double x = wavelength * i / per_cycle;
    const double dy = half * k * std::sin(k * x);
    const double ddy = half * k * k * std::cos(k * x);
    path.push_back({x, half * (1.0 - std::cos(k * x)), std::atan(dy),
                    ddy / std::pow(1.0 + dy * dy, 1.5)});
  }
  const double end_x = wavelength * cycles;
  for (int i = 1; i <= n_lead; ++i) {
    path.push_back({end_x + lead * i / n_lead, 0.0, 0.0, 0.0});
  }
  return path;
}

Trajectory TimeParameterize(const std::vector<PathPoint>& path,
                            const SpeedLimits& limits) {
  if (path.size() < 2) {
    throw Error(ErrorCode::kDegenerateTrajectory, "path needs two points");
  }
  if (!(limits.cruise > 0.0) || !(limits.lateral_accel > 0.0) ||
      !(limits.accel > 0.0) || !(limits.decel > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "speed limits must be > 0");
  }
  const std::size_t n = path.size();
  std::vector<double> ds(n, 0.0);
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0) {
      ds[i] = std::hypot(path[i].x - path[i - 1].x, path[i].y - path[i - 1].y);
    }
    const double kappa = std::abs(path[i].curvature);
    v[i] = kappa > 0.0
               ? std::min(limits.cruise, std::sqrt(limits.lateral_accel / kappa))
               : limits.cruise;
  }
  v.front() = 0.0;
  v.back() = 0.0;
  for (std::size_t i = 1; i < n; ++i) {
    v[i] = std::min(v[i], std::sqrt(v[i - 1] * v[i - 1] + 2.0 * limits.accel * ds[i]));
  }
  for (std::size_t i = n - 1; i-- > 0;) {
    v[i] = std::min(v[i], std::sqrt(v[i + 1] * v[i + 1] + 2.0 * limits.decel * ds[i + 1]));
  }

  std::vector<TrajectoryPoint> points(n);
  double t = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0) {
      t += 2.0 * ds[i] / (v[i - 1] + v[i]);
    }
    TrajectoryPoint& p = points[i];
    p.t = t;
    p.x = path[i].x;
    p.y = path[i].y;
    p.heading = path[i].heading;
    p.curvature = path[i].curvature;
    p.speed = v[i];
    p.accel = i + 1 < n ? (v[i + 1] * v[i + 1] - v[i] * v[i]) / (2.0 * ds[i + 1])
                        : 0.0;
  }
  return Trajectory(std::move(points));
}

Scenario MakeScenario(std::string name, Trajectory trajectory) {
  Scenario s;
  s.name = std::move(name);
  const TrajectoryPoint& p0 = trajectory.points().front();
  s.initial.x = p0.x;
  s.initial.y = p0.y;
  s.initial.heading = p0.heading;
  s.duration = trajectory.duration() + 1.0;
  s.trajectory = std::move(trajectory);
  return s;
}

std::vector<std::string> BuiltinScenarioNames() {
  return {"straight",       "left_turn",    "right_turn", "u_turn",
          "serpentine_1p5", "serpentine_3", "mixed"};
}

Scenario BuiltinScenario(const std::string& name) {
  constexpr double kPi = std::numbers::pi;
  constexpr double kStep = 0.5;
  std::vector<PathPoint> path;
  if (name == "straight") {
    path = PathBuilder(kStep).Straight(200.0).Build();
  } else if (name == "left_turn") {
    path = PathBuilder(kStep).Straight(30.0).Arc(20.0, kPi / 2).Straight(30.0).Build();
  } else if (name == "right_turn") {
    path = PathBuilder(kStep).Straight(30.0).Arc(20.0, -kPi / 2).Straight(30.0).Build();
  } else if (name == "u_turn") {
    path = PathBuilder(kStep).Straight(30.0).Arc(10.0, kPi).Straight(30.0).Build();
  } else if (name == "serpentine_1p5") {
    path = SerpentinePath(1.5, 40.0, 2, 30.0, kStep);
  } else if (name == "serpentine_3") {
    path = SerpentinePath(3.0, 40.0, 2, 30.0, kStep);
  } else if (name == "mixed") {
    path = PathBuilder(kStep)
               .Straight(20.0)
               .Arc(30.0, kPi / 3)
               .Straight(10.0)
               .Arc(15.0, -kPi / 2)
               .Straight(10.0)
               .Arc(40.0, kPi / 4)
               .Straight(20.0)
               .Build();
  } else {
    throw Error(ErrorCode::kInvalidArgument, "unknown scenario '" + name + "'");
  }
  return MakeScenario(name, TimeParameterize(path));
}

std::vector<Scenario> BuiltinScenarios() {
  std::vector<Scenario> out;
  for (const auto& name : BuiltinScenarioNames()) {
    out.push_back(BuiltinScenario(name));
  }
  return out;
}

}  // namespace autotune::harness
