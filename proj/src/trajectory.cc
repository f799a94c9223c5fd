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

#include "autotune/trajectory.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "autotune/error.h"

namespace autotune {
namespace {

constexpr std::size_t kMatchWindow = 40;

}  // namespace

double WrapAngle(double angle) {
  double a = std::fmod(angle + M_PI, 2.0 * M_PI);
  if (a <= 0.0) {
    a += 2.0 * M_PI;
  }
  return a - M_PI;
}

Trajectory::Trajectory(std::vector<TrajectoryPoint> points)
    : points_(std::move(points)) {
  if (points_.size() < 2) {
    throw Error(ErrorCode::kDegenerateTrajectory,
                "trajectory needs at least two points");
  }
  points_[0].s = 0.0;
  for (std::size_t i = 1; i < points_.size(); ++i) {
    const double ds = std::hypot(points_[i].x - points_[i - 1].x,
                                 points_[i].y - points_[i - 1].y);
    if (!(ds > 0.0)) {
      throw Error(ErrorCode::kDegenerateTrajectory,
                  "consecutive trajectory points coincide");
    }
    if (!(points_[i].t > points_[i - 1].t)) {
      throw Error(ErrorCode::kDegenerateTrajectory,
                  "trajectory time must be strictly increasing");
    }
    points_[i].s = points_[i - 1].s + ds;
  }
  for (const auto& p : points_) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y) ||
        !std::isfinite(p.heading) || !std::isfinite(p.curvature) ||
        !std::isfinite(p.speed) || !std::isfinite(p.accel)) {
      throw Error(ErrorCode::kDegenerateTrajectory,
                  "trajectory contains non-finite values");
    }
  }
}

TrajectoryPoint Trajectory::Interpolate(std::size_t i, double frac) const {
  const TrajectoryPoint& a = points_[i];
  const TrajectoryPoint& b = points_[i + 1];
  auto lerp = [frac](double u, double v) { return u + frac * (v - u); };
  TrajectoryPoint p;
  p.t = lerp(a.t, b.t);
  p.x = lerp(a.x, b.x);
  p.y = lerp(a.y, b.y);
  p.heading = WrapAngle(a.heading + frac * WrapAngle(b.heading - a.heading));
  p.curvature = lerp(a.curvature, b.curvature);
  p.speed = lerp(a.speed, b.speed);
  p.accel = lerp(a.accel, b.accel);
  p.s = lerp(a.s, b.s);
  return p;
}

TrajectoryPoint Trajectory::AtTime(double t) const {
  if (t <= points_.front().t) {
    return points_.front();
  }
  if (t >= points_.back().t) {
    return points_.back();
  }
  const auto it = std::upper_bound(
      points_.begin(), points_.end(), t,
      [](double value, const TrajectoryPoint& p) { return value < p.t; });
  const std::size_t hi = static_cast<std::size_t>(it - points_.begin());
  const std::size_t lo = hi - 1;
  return Interpolate(lo, (t - points_[lo].t) / (points_[hi].t - points_[lo].t));
}

double Trajectory::TimeAtStation(double s) const {
  if (s <= 0.0) {
    return points_.front().t;
  }
  if (s >= points_.back().s) {
    return points_.back().t;
  }
  const auto it = std::upper_bound(
      points_.begin(), points_.end(), s,
      [](double value, const TrajectoryPoint& p) { return value < p.s; });
  const std::size_t hi = static_cast<std::size_t>(it - points_.begin());
  const std::size_t lo = hi - 1;
  const double frac = (s - points_[lo].s) / (points_[hi].s - points_[lo].s);
  return points_[lo].t + frac * (points_[hi].t - points_[lo].t);
}

PathMatch Trajectory::Match(double x, double y,
                            std::optional<std::size_t> hint) const {
  const std::size_t n_seg = points_.size() - 1;
  std::size_t first = 0;
  std::size_t last = n_seg;
  if (hint) {
    const std::size_t h = std::min(*hint, n_seg - 1);
    first = h > kMatchWindow ? h - kMatchWindow : 0;
    last = std::min(n_seg, h + kMatchWindow + 1);
  }
  double best_d2 = std::numeric_limits<double>::infinity();
  std::size_t best_seg = first;
  double best_frac = 0.0;
  for (std::size_t i = first; i < last; ++i) {
    const TrajectoryPoint& a = points_[i];
    const TrajectoryPoint& b = points_[i + 1];
    const double dx = b.x - a.x;
    const double dy = b.y - a.y;
    const double len2 = dx * dx + dy * dy;
    double frac = ((x - a.x) * dx + (y - a.y) * dy) / len2;
    frac = std::clamp(frac, 0.0, 1.0);
    const double px = a.x + frac * dx - x;
    const double py = a.y + frac * dy - y;
    const double d2 = px * px + py * py;
    if (d2 < best_d2) {
      best_d2 = d2;
      best_seg = i;
      best_frac = frac;
    }
  }
  PathMatch match;
  match.segment = best_seg;
  match.point = Interpolate(best_seg, best_frac);
  const TrajectoryPoint& a = points_[best_seg];
  const TrajectoryPoint& b = points_[best_seg + 1];
  const double len = std::hypot(b.x - a.x, b.y - a.y);
  const double tx = (b.x - a.x) / len;
  const double ty = (b.y - a.y) / len;
  match.lateral = tx * (y - match.point.y) - ty * (x - match.point.x);
  return match;
}

}  // namespace autotune
