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

#include <optional>

#include <Eigen/Dense>

#include "autotune/calibration.h"
#include "autotune/plant.h"
#include "autotune/trajectory.h"

namespace autotune::control {

/// Tracking errors. Station and speed errors are reference minus actual, so
/// a positive value means the vehicle is behind or too slow. Lateral error
/// is positive when the vehicle is left of the path; heading error is
/// actual minus reference, wrapped to (-pi, pi].
struct ControlErrors {
  double station = 0.0;
  double speed = 0.0;
  double lateral = 0.0;
  double lateral_rate = 0.0;
  double heading = 0.0;
  double heading_rate = 0.0;
};

struct TrackingResult {
  ControlErrors errors;
  PathMatch match;           // reference at the vehicle's projection
  TrajectoryPoint timed;     // reference at the clock
};

/// Projects the vehicle onto the path and compares against the
/// time-indexed reference at `clock`.
TrackingResult ComputeTracking(const plant::VehicleState& state,
                               const Trajectory& trajectory, double clock,
                               std::optional<std::size_t> hint = std::nullopt);

inline ControlErrors ComputeErrors(const plant::VehicleState& state,
                                   const Trajectory& trajectory, double clock) {
  return ComputeTracking(state, trajectory, clock).errors;
}

// ---------------------------------------------------------------------------
// Longitudinal: cascaded station/speed PI with calibration feedforward.

struct LonGains {
  double kp_speed_high = 1.0;
  double ki_speed_high = 0.3;
  double kp_speed_low = 1.5;
  double ki_speed_low = 0.5;
  double kp_station = 0.2;
  double switch_speed = 3.0;   // m/s, centre of the +-0.5 m/s blend
  double integral_bound = 5.0;
};

void Validate(const LonGains& gains);

struct SpeedGains {
  double kp = 0.0;
  double ki = 0.0;
};

/// Low-speed gains below switch_speed - 0.5, high-speed gains above
/// switch_speed + 0.5, linear in between.
SpeedGains ScheduleGains(const LonGains& gains, double speed);

struct LonOutput {
  double accel_cmd = 0.0;
  double actuation = 0.0;  // signed throttle/brake from the table
  bool saturated = false;
  double integral = 0.0;   // updated integrator state
};

LonOutput LongitudinalControl(const ControlErrors& errors,
                              const LonGains& gains, double accel_ref,
                              double speed,
                              const calibration::CalibrationTable& table,
                              double integral, double dt);

// ---------------------------------------------------------------------------
// Lateral: LQR on the error dynamics plus steady-state feedforward.

using Matrix4 = Eigen::Matrix4d;
using Vector4 = Eigen::Vector4d;
using RowVector4 = Eigen::RowVector4d;

/// Error dynamics x' = A x + B1 delta + B2 yaw_rate_des with
/// x = [e_y, e_y', e_theta, e_theta'] at a fixed speed, and the bilinear
/// discretization of (A, B1).
struct LatModel {
  double speed = 0.0;
  double dt = 0.0;
  Matrix4 a = Matrix4::Zero();
  Vector4 b1 = Vector4::Zero();
  Vector4 b2 = Vector4::Zero();
  Matrix4 ad = Matrix4::Identity();
  Vector4 bd = Vector4::Zero();
};

/// Minimum speed for which the lateral model is built.
inline constexpr double kMinModelSpeed = 0.5;

/// Floor on the speed the gain scheduler solves at.
inline constexpr double kMinScheduleSpeed = 2.0;

/// Throws Error(kSpeedTooLow) below kMinModelSpeed.
LatModel BuildLateralModel(const plant::VehicleParams& params, double speed,
                           double dt);

struct Discretized {
  Eigen::MatrixXd ad;
  Eigen::MatrixXd bd;
};

/// Tustin transform: Ad = (I - A dt/2)^-1 (I + A dt/2),
/// Bd = (I - A dt/2)^-1 B dt.
Discretized BilinearDiscretize(const Eigen::MatrixXd& a,
                               const Eigen::MatrixXd& b, double dt);

struct LqrSolution {
  Eigen::RowVectorXd gain;
  Eigen::MatrixXd p;
  int iterations = 0;
  double residual = 0.0;  // infinity norm of the DARE residual at p
};

/// Fixed-point iteration of the discrete algebraic Riccati equation from
/// P0 = Q until the max-norm update falls below tol. Throws
/// Error(kNoConvergence) after max_iter.
LqrSolution SolveLqr(const Eigen::MatrixXd& ad, const Eigen::MatrixXd& bd,
                     const Eigen::MatrixXd& q, const Eigen::MatrixXd& r,
                     double tol = 1e-9, int max_iter = 10000);

/// Infinity norm of P - (Q + A'PA - A'PB (R + B'PB)^-1 B'PA).
double RiccatiResidual(const Eigen::MatrixXd& ad, const Eigen::MatrixXd& bd,
                       const Eigen::MatrixXd& q, const Eigen::MatrixXd& r,
                       const Eigen::MatrixXd& p);

struct LqrWeights {
  Vector4 q = Vector4(0.05, 0.0, 1.0, 0.0);
  double r = 1.0;
};

/// Steady-state heading error of the linear-tire model on a constant
/// curvature: -l_r kappa + l_f m v^2 kappa / (2 C_r L_w).
double SteadyStateHeadingError(const plant::VehicleParams& params, double speed,
                               double curvature);

struct LateralOutput {
  double steer = 0.0;            // clamped to +-max_steer
  double steer_unclamped = 0.0;
  double feedforward = 0.0;
};

/// delta = -K x + L_w kappa + k_v v^2 kappa + K3 theta_ss.
LateralOutput LateralControl(const Vector4& state_error, const RowVector4& gain,
                             const plant::VehicleParams& params, double speed,
                             double curvature);

/// Solves the LQR gain for the current speed and re-solves only when the
/// speed has moved more than 1 m/s from the last solve. Speeds below
/// kMinScheduleSpeed use the gain at kMinScheduleSpeed: the Riccati
/// iteration slows down sharply as the model approaches standstill.
class LateralGainScheduler {
 public:
  LateralGainScheduler(plant::VehicleParams params, LqrWeights weights,
                       double dt);

  const RowVector4& GainFor(double speed);
  int solves() const { return solves_; }

 private:
  plant::VehicleParams params_;
  LqrWeights weights_;
  double dt_;
  std::optional<double> solved_speed_;
  RowVector4 gain_ = RowVector4::Zero();
  int solves_ = 0;
};

// ---------------------------------------------------------------------------
// Inner loop: first-order MRAC on the steering actuator.

struct MracConfig {
  double t_ref = 0.3;         // reference model time constant
  double adaption_gain = 1.0; // p
  double gamma_state = 10.0;
  double gamma_input = 10.0;
  // Adaptive state.
  double k_state = 0.0;
  double k_input = 1.0;
  double ref_steer = 0.0;
  // Projection bounds.
  double k_state_min = -5.0;
  double k_state_max = 5.0;
  double k_input_min = 0.0;
  double k_input_max = 5.0;
};

void Validate(const MracConfig& cfg);

struct MracOutput {
  double steer = 0.0;  // delta_mrac, clamped to +-max_steer
  MracConfig next;
};

/// One Euler step of the reference model and the adaptive laws, evaluated
/// with the tracking error before the update.
MracOutput MracStep(const MracConfig& cfg, double steer_cmd,
                    double steer_measured, double dt, double max_steer);

}  // namespace autotune::control
