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

#include "autotune/plant.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "autotune/error.h"

namespace autotune::plant {
namespace {

void Require(bool ok, const char* what) {
  if (!ok) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string("vehicle params: ") + what);
  }
}

double Resistance(double v, const VehicleParams& p) {
  return v > 0.0 ? p.rolling_resistance + p.drag * v * v : 0.0;
}

bool AllFinite(const VehicleState& s) {
  return std::isfinite(s.x) && std::isfinite(s.y) &&
         std::isfinite(s.heading) && std::isfinite(s.v) &&
         std::isfinite(s.vy) && std::isfinite(s.yaw_rate) &&
         std::isfinite(s.accel) && std::isfinite(s.steer) &&
         std::isfinite(s.t);
}

}  // namespace

double UndersteerGradient(const VehicleParams& p) {
  const double lw = p.wheelbase();
  return p.mass / lw *
         (p.lr / (2.0 * p.cornering_front) - p.lf / (2.0 * p.cornering_rear));
}

VehicleParams DefaultVehicleParams() {
  VehicleParams params;
  params.understeer_gradient = UndersteerGradient(params);
  return params;
}

void Validate(const VehicleParams& p) {
  Require(p.mass > 0.0, "mass must be > 0");
  Require(p.yaw_inertia > 0.0, "yaw_inertia must be > 0");
  Require(p.cornering_front > 0.0, "cornering_front must be > 0");
  Require(p.cornering_rear > 0.0, "cornering_rear must be > 0");
  Require(p.lf > 0.0 && p.lr > 0.0, "axle distances must be > 0");
  Require(p.steer_time_constant > 0.0, "steer_time_constant must be > 0");
  Require(p.lon_time_constant > 0.0, "lon_time_constant must be > 0");
  Require(p.max_steer > 0.0, "max_steer must be > 0");
  Require(p.steer_ratio > 0.0, "steer_ratio must be > 0");
}

ActuationCommand ActuationCommand::FromSigned(double actuation, double steer) {
  ActuationCommand cmd;
  const double u = std::clamp(actuation, -1.0, 1.0);
  if (u >= 0.0) {
    cmd.throttle = u;
  } else {
    cmd.brake = -u;
  }
  cmd.steer = std::clamp(steer, -1.0, 1.0);
  return cmd;
}

double TrueAcceleration(double u, double v, const VehicleParams& p) {
  const double drive = u >= 0.0 ? u * (p.max_accel - p.power_falloff * v)
                                 : u * p.max_decel;
  return drive - Resistance(v, p);
}

VehicleState Step(const VehicleState& s, const ActuationCommand& cmd,
                  const VehicleParams& p, double dt) {
  if (!(dt > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "dt must be > 0");
  }
  VehicleState next = s;
  next.t = s.t + dt;

  // Steering actuator: first-order lag toward the commanded wheel angle.
  const double steer_target = std::clamp(cmd.steer, -1.0, 1.0) * p.max_steer;
  next.steer = s.steer + dt * (steer_target - s.steer) / p.steer_time_constant;
  next.steer = std::clamp(next.steer, -p.max_steer, p.max_steer);

  // Longitudinal: acceleration lags the drivetrain map.
  const double accel_target = TrueAcceleration(
      std::clamp(cmd.signed_actuation(), -1.0, 1.0), s.v, p);
  next.accel = s.accel + dt * (accel_target - s.accel) / p.lon_time_constant;
  next.v = s.v + dt * s.accel;
  if (next.v <= 0.0) {
    next.v = 0.0;
    next.accel = std::max(next.accel, 0.0);
  }

  // Lateral/yaw: linear-tire dynamic bicycle. Backward Euler on the slip
  // block, forward Euler elsewhere.
  const double v_eff = std::max(s.v, kMinDynamicSpeed);
  const double cf2 = 2.0 * p.cornering_front;
  const double cr2 = 2.0 * p.cornering_rear;
  const double a11 = -(cf2 + cr2) / (p.mass * v_eff);
  const double a12 = -s.v - (cf2 * p.lf - cr2 * p.lr) / (p.mass * v_eff);
  const double a21 = -(cf2 * p.lf - cr2 * p.lr) / (p.yaw_inertia * v_eff);
  const double a22 =
      -(cf2 * p.lf * p.lf + cr2 * p.lr * p.lr) / (p.yaw_inertia * v_eff);
  const double b1 = cf2 / p.mass;
  const double b2 = cf2 * p.lf / p.yaw_inertia;
  // (I - dt A) x' = x + dt B delta
  const double m11 = 1.0 - dt * a11;
  const double m12 = -dt * a12;
  const double m21 = -dt * a21;
  const double m22 = 1.0 - dt * a22;
  const double rhs1 = s.vy + dt * b1 * s.steer;
  const double rhs2 = s.yaw_rate + dt * b2 * s.steer;
  const double det = m11 * m22 - m12 * m21;
  next.vy = (m22 * rhs1 - m12 * rhs2) / det;
  next.yaw_rate = (m11 * rhs2 - m21 * rhs1) / det;
  if (s.v < kMinDynamicSpeed) {
    // Tire forces vanish near standstill; follow the kinematic bicycle.
    next.yaw_rate = s.v * std::tan(s.steer) / p.wheelbase();
    next.vy = p.lr * next.yaw_rate;
  }

  const double cos_h = std::cos(s.heading);
  const double sin_h = std::sin(s.heading);
  next.x = s.x + dt * (s.v * cos_h - s.vy * sin_h);
  next.y = s.y + dt * (s.v * sin_h + s.vy * cos_h);
  next.heading = s.heading + dt * s.yaw_rate;

  if (!AllFinite(next)) {
    throw Error(ErrorCode::kNonFiniteState, "plant state became non-finite");
  }
  return next;
}

}  // namespace autotune::plant
