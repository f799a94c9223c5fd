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

namespace autotune::plant {

/// Physical constants of the simulated vehicle. Defaults describe a
/// mid-size sedan; the values are representative stand-ins, not measured.
struct VehicleParams {
  double mass = 1800.0;               // kg
  double yaw_inertia = 3200.0;        // kg m^2
  double cornering_front = 80000.0;   // N/rad, per tire
  double cornering_rear = 80000.0;    // N/rad, per tire
  double lf = 1.2;                    // m, CG to front axle
  double lr = 1.65;                   // m, CG to rear axle
  double understeer_gradient = 0.0;   // s^2/m, see DefaultVehicleParams()
  double steer_ratio = 2.0;           // k_st, command per rad of wheel angle
  double steer_time_constant = 0.3;   // s, T_act
  double lon_time_constant = 0.2;     // s, T_lon
  double max_steer = 0.5;             // rad
  // Powertrain map constants used by TrueAcceleration().
  double max_accel = 5.0;
  double power_falloff = 0.1;
  double max_decel = 6.0;
  double rolling_resistance = 0.1;
  double drag = 0.0005;

  double wheelbase() const { return lf + lr; }
};

/// Steady-state understeer gradient of the linear-tire bicycle model.
double UndersteerGradient(const VehicleParams& params);

/// Defaults with the understeer gradient derived from the other constants.
VehicleParams DefaultVehicleParams();

/// Throws Error(kInvalidArgument) naming the first violated invariant.
void Validate(const VehicleParams& params);

struct VehicleState {
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;
  double v = 0.0;        // longitudinal speed, never negative
  double vy = 0.0;       // lateral speed in the body frame
  double yaw_rate = 0.0;
  double accel = 0.0;
  double steer = 0.0;    // actual front wheel angle
  double t = 0.0;
};

struct ActuationCommand {
  double throttle = 0.0;  // [0, 1]
  double brake = 0.0;     // [0, 1]
  double steer = 0.0;     // [-1, 1]

  /// Throttle minus brake, in [-1, 1].
  double signed_actuation() const { return throttle - brake; }

  /// Splits a signed command into exclusive throttle/brake, clamped.
  static ActuationCommand FromSigned(double actuation, double steer);
};

/// Ground-truth drivetrain map: acceleration produced by a steady signed
/// command u at speed v.
double TrueAcceleration(double u, double v, const VehicleParams& params);

/// Tire slip terms use max(v, this) as speed; below it the lateral states
/// follow the kinematic bicycle.
inline constexpr double kMinDynamicSpeed = 0.5;

/// Advances the plant by dt. Throws Error(kNonFiniteState) when any output
/// field is not finite.
VehicleState Step(const VehicleState& state, const ActuationCommand& cmd,
                  const VehicleParams& params, double dt);

}  // namespace autotune::plant
