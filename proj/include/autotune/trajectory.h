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

#pragma once

#include <cstddef>
#include <optional>
#include <vector>

namespace autotune {

struct TrajectoryPoint {
  double t = 0.0;
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;
  double curvature = 0.0;
  double speed = 0.0;
  double accel = 0.0;
  double s = 0.0;  // arc length from the first point
};

/// Wraps an angle to (-pi, pi].
double WrapAngle(double angle);

struct PathMatch {
  std::size_t segment = 0;  // index of the segment's first point
  TrajectoryPoint point;    // reference interpolated at the projection
  double lateral = 0.0;     // signed offset, left of the path positive
};

/// Timestamped reference path. Construction recomputes arc length from the
/// positions and rejects coincident consecutive points or non-increasing
/// time (Error kDegenerateTrajectory).
class Trajectory {
 public:
  Trajectory() = default;
  explicit Trajectory(std::vector<TrajectoryPoint> points);

  const std::vector<TrajectoryPoint>& points() const { return points_; }
  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }
  double duration() const { return points_.back().t - points_.front().t; }
  double length() const { return points_.back().s; }

  /// Reference interpolated at time t, clamped to the ends.
  TrajectoryPoint AtTime(double t) const;

  /// Earliest time whose interpolated arc length reaches s.
  double TimeAtStation(double s) const;

  /// Orthogonal projection onto the nearest segment. With a hint the search
  /// is limited to a window of segments around it.
  PathMatch Match(double x, double y,
                  std::optional<std::size_t> hint = std::nullopt) const;

 private:
  TrajectoryPoint Interpolate(std::size_t i, double frac) const;

  std::vector<TrajectoryPoint> points_;
};

}  // namespace autotune
