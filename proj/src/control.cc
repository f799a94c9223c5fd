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

#include "autotune/control.h"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "autotune/error.h"

namespace autotune::control {

TrackingResult ComputeTracking(const plant::VehicleState& state,
                               const Trajectory& trajectory, double clock,
                               std::optional<std::size_t> hint) {
  TrackingResult result;
  result.match = trajectory.Match(state.x, state.y, hint);
  result.timed = trajectory.AtTime(clock);
  const TrajectoryPoint& ref = result.match.point;

  ControlErrors& e = result.errors;
  e.lateral = result.match.lateral;
  e.heading = WrapAngle(state.heading - ref.heading);
  e.station = result.timed.s - ref.s;
  e.speed = result.timed.speed - state.v;
  const double cos_e = std::cos(e.heading);
  const double sin_e = std::sin(e.heading);
  e.lateral_rate = state.v * sin_e + state.vy * cos_e;
  const double along_path = state.v * cos_e - state.vy * sin_e;
  e.heading_rate = state.yaw_rate - ref.curvature * along_path;
  return result;
}

void Validate(const LonGains& g) {
  if (g.kp_speed_high < 0.0 || g.ki_speed_high < 0.0 || g.kp_speed_low < 0.0 ||
      g.ki_speed_low < 0.0 || g.kp_station < 0.0) {
    throw Error(ErrorCode::kInvalidArgument,
                "longitudinal gains must be non-negative");
  }
  if (!(g.switch_speed > 0.0) || !(g.integral_bound >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "switch speed must be > 0 and integral bound >= 0");
  }
}

SpeedGains ScheduleGains(const LonGains& g, double speed) {
  constexpr double kHalfBlend = 0.5;
  const double w = std::clamp(
      (speed - (g.switch_speed - kHalfBlend)) / (2.0 * kHalfBlend), 0.0, 1.0);
  return {(1.0 - w) * g.kp_speed_low + w * g.kp_speed_high,
          (1.0 - w) * g.ki_speed_low + w * g.ki_speed_high};
}

LonOutput LongitudinalControl(const ControlErrors& errors,
                              const LonGains& gains, double accel_ref,
                              double speed,
                              const calibration::CalibrationTable& table,
                              double integral, double dt) {
  if (!(dt > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "dt must be > 0");
  }
  const SpeedGains sg = ScheduleGains(gains, speed);
  const double composite = errors.speed + gains.kp_station * errors.station;
  LonOutput out;
  out.integral = std::clamp(integral + dt * composite, -gains.integral_bound,
                            gains.integral_bound);
  out.accel_cmd = accel_ref + sg.kp * composite + sg.ki * out.integral;
  const auto ff = calibration::InverseLookup(table, out.accel_cmd, speed);
  out.actuation = ff.command;
  out.saturated = ff.saturated;
  return out;
}

Discretized BilinearDiscretize(const Eigen::MatrixXd& a,
                               const Eigen::MatrixXd& b, double dt) {
  const auto n = a.rows();
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd lhs = eye - 0.5 * dt * a;
  const auto lu = lhs.partialPivLu();
  return {lu.solve(eye + 0.5 * dt * a), lu.solve(b * dt)};
}

LatModel BuildLateralModel(const plant::VehicleParams& p, double speed,
                           double dt) {
  if (!(speed >= kMinModelSpeed)) {
    throw Error(ErrorCode::kSpeedTooLow,
                fmt::format("lateral model needs v >= {} m/s, got {}",
                            kMinModelSpeed, speed));
  }
  const double cf2 = 2.0 * p.cornering_front;
  const double cr2 = 2.0 * p.cornering_rear;
  const double m = p.mass;
  const double iz = p.yaw_inertia;
  const double v = speed;

  LatModel model;
  model.speed = speed;
  model.dt = dt;
  Matrix4& a = model.a;
  a(0, 1) = 1.0;
  a(1, 1) = -(cf2 + cr2) / (m * v);
  a(1, 2) = (cf2 + cr2) / m;
  a(1, 3) = (-cf2 * p.lf + cr2 * p.lr) / (m * v);
  a(2, 3) = 1.0;
  a(3, 1) = -(cf2 * p.lf - cr2 * p.lr) / (iz * v);
  a(3, 2) = (cf2 * p.lf - cr2 * p.lr) / iz;
  a(3, 3) = -(cf2 * p.lf * p.lf + cr2 * p.lr * p.lr) / (iz * v);
  model.b1 << 0.0, cf2 / m, 0.0, cf2 * p.lf / iz;
  model.b2 << 0.0, -(cf2 * p.lf - cr2 * p.lr) / (m * v) - v, 0.0,
      -(cf2 * p.lf * p.lf + cr2 * p.lr * p.lr) / (iz * v);

  const Discretized d = BilinearDiscretize(model.a, model.b1, dt);
  model.ad = d.ad;
  model.bd = d.bd;
  return model;
}

double RiccatiResidual(const Eigen::MatrixXd& ad, const Eigen::MatrixXd& bd,
                       const Eigen::MatrixXd& q, const Eigen::MatrixXd& r,
                       const Eigen::MatrixXd& p) {
  const Eigen::MatrixXd s = r + bd.transpose() * p * bd;
  const Eigen::MatrixXd bpa = bd.transpose() * p * ad;
  const Eigen::MatrixXd rhs = q + ad.transpose() * p * ad -
                              bpa.transpose() * s.ldlt().solve(bpa);
  return (p - rhs).cwiseAbs().maxCoeff();
}

LqrSolution SolveLqr(const Eigen::MatrixXd& ad, const Eigen::MatrixXd& bd,
                     const Eigen::MatrixXd& q, const Eigen::MatrixXd& r,
                     double tol, int max_iter) {
  const auto n = ad.rows();
  if (ad.cols() != n || bd.rows() != n || q.rows() != n || q.cols() != n ||
      r.rows() != bd.cols() || r.cols() != bd.cols()) {
    throw Error(ErrorCode::kInvalidArgument, "LQR matrix dimensions mismatch");
  }
  Eigen::MatrixXd p = q;
  LqrSolution sol;
  for (int it = 1; it <= max_iter; ++it) {
    const Eigen::MatrixXd s = r + bd.transpose() * p * bd;
    const Eigen::MatrixXd bpa = bd.transpose() * p * ad;
    Eigen::MatrixXd next = q + ad.transpose() * p * ad -
                           bpa.transpose() * s.ldlt().solve(bpa);
    next = 0.5 * (next + next.transpose());
    const double change = (next - p).cwiseAbs().maxCoeff();
    p = std::move(next);
    if (!std::isfinite(change)) {
      break;
    }
    if (change < tol) {
      sol.iterations = it;
      sol.p = p;
      const Eigen::MatrixXd s_final = r + bd.transpose() * p * bd;
      sol.gain = s_final.ldlt().solve(bd.transpose() * p * ad);
      sol.residual = RiccatiResidual(ad, bd, q, r, p);
      return sol;
    }
  }
  throw Error(ErrorCode::kNoConvergence,
              fmt::format("Riccati iteration did not converge in {} steps",
                          max_iter));
}

double SteadyStateHeadingError(const plant::VehicleParams& p, double speed,
                               double curvature) {
  return -p.lr * curvature + p.lf * p.mass * speed * speed * curvature /
                                 (2.0 * p.cornering_rear * p.wheelbase());
}

LateralOutput LateralControl(const Vector4& state_error, const RowVector4& gain,
                             const plant::VehicleParams& params, double speed,
                             double curvature) {
  LateralOutput out;
  out.feedforward =
      params.wheelbase() * curvature +
      params.understeer_gradient * speed * speed * curvature +
      gain(2) * SteadyStateHeadingError(params, speed, curvature);
  out.steer_unclamped = -gain.dot(state_error) + out.feedforward;
  out.steer =
      std::clamp(out.steer_unclamped, -params.max_steer, params.max_steer);
  return out;
}

LateralGainScheduler::LateralGainScheduler(plant::VehicleParams params,
                                           LqrWeights weights, double dt)
    : params_(params), weights_(weights), dt_(dt) {
  if (!(weights_.r > 0.0) || (weights_.q.array() < 0.0).any()) {
    throw Error(ErrorCode::kInvalidArgument,
                "LQR weights need Q >= 0 and R > 0");
  }
}

const RowVector4& LateralGainScheduler::GainFor(double speed) {
  constexpr double kResolveBand = 1.0;
  const double v = std::max(speed, kMinScheduleSpeed);
  if (solved_speed_ && std::abs(v - *solved_speed_) <= kResolveBand) {
    return gain_;
  }
  const LatModel model = BuildLateralModel(params_, v, dt_);
  const Eigen::MatrixXd q = weights_.q.asDiagonal();
  const Eigen::MatrixXd r = Eigen::MatrixXd::Constant(1, 1, weights_.r);
  const LqrSolution sol = SolveLqr(model.ad, model.bd, q, r);
  gain_ = sol.gain;
  solved_speed_ = v;
  ++solves_;
  return gain_;
}

void Validate(const MracConfig& c) {
  if (!(c.t_ref > 0.0) || !(c.adaption_gain > 0.0) || !(c.gamma_state > 0.0) ||
      !(c.gamma_input > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "MRAC T_ref, p and rate gains must be > 0");
  }
  if (!(c.k_state_min <= c.k_state_max) || !(c.k_input_min <= c.k_input_max)) {
    throw Error(ErrorCode::kInvalidArgument, "MRAC gain bounds inverted");
  }
}

MracOutput MracStep(const MracConfig& cfg, double steer_cmd,
                    double steer_measured, double dt, double max_steer) {
  if (!(dt > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "dt must be > 0");
  }
  MracOutput out;
  MracConfig& next = out.next;
  next = cfg;
  const double tracking = steer_measured - cfg.ref_steer;
  const double p = cfg.adaption_gain;
  next.k_state = std::clamp(
      cfg.k_state - dt * p * cfg.gamma_state * steer_measured * tracking,
      cfg.k_state_min, cfg.k_state_max);
  next.k_input = std::clamp(
      cfg.k_input - dt * p * cfg.gamma_input * steer_cmd * tracking,
      cfg.k_input_min, cfg.k_input_max);
  next.ref_steer = cfg.ref_steer + dt * (steer_cmd - cfg.ref_steer) / cfg.t_ref;
  out.steer = std::clamp(next.k_state * steer_measured + next.k_input * steer_cmd,
                         -max_steer, max_steer);
  return out;
}

}  // namespace autotune::control
