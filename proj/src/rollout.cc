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
#include <sstream>

#include <fmt/format.h>

#include "autotune/error.h"
#include "autotune/harness.h"

namespace autotune::harness {
namespace {

using optimizer::ParamKind;
using optimizer::ParamSpec;

const std::vector<ParamSpec>& AllSpecs() {
  static const std::vector<ParamSpec> specs = {
      {"lon_kp_speed_high", 0.1, 3.0, ParamKind::kContinuous},
      {"lon_ki_speed_high", 0.0, 1.0, ParamKind::kContinuous},
      {"lon_kp_speed_low", 0.1, 3.0, ParamKind::kContinuous},
      {"lon_ki_speed_low", 0.0, 1.0, ParamKind::kContinuous},
      {"lon_kp_station", 0.0, 1.0, ParamKind::kContinuous},
      {"lqr_q1", 0.02, 2.0, ParamKind::kContinuous},
      {"lqr_q2", 0.0, 0.5, ParamKind::kContinuous},
      {"lqr_q3", 0.05, 5.0, ParamKind::kContinuous},
      {"lqr_q4", 0.0, 0.5, ParamKind::kContinuous},
      {"mrac_t_ref", 0.01, 1.0, ParamKind::kContinuous},
      {"mrac_p", 0.1, 1e5, ParamKind::kContinuous, true},
  };
  return specs;
}

double* Field(ControllerParams& p, const std::string& name) {
  if (name == "lon_kp_speed_high") return &p.lon.kp_speed_high;
  if (name == "lon_ki_speed_high") return &p.lon.ki_speed_high;
  if (name == "lon_kp_speed_low") return &p.lon.kp_speed_low;
  if (name == "lon_ki_speed_low") return &p.lon.ki_speed_low;
  if (name == "lon_kp_station") return &p.lon.kp_station;
  if (name == "lqr_q1") return &p.lqr.q(0);
  if (name == "lqr_q2") return &p.lqr.q(1);
  if (name == "lqr_q3") return &p.lqr.q(2);
  if (name == "lqr_q4") return &p.lqr.q(3);
  if (name == "mrac_t_ref") return &p.mrac.t_ref;
  if (name == "mrac_p") return &p.mrac.adaption_gain;
  throw Error(ErrorCode::kInvalidArgument, "unknown parameter '" + name + "'");
}

optimizer::ParamSpace Subset(const std::vector<std::string>& names) {
  std::vector<ParamSpec> out;
  for (const auto& name : names) {
    for (const auto& s : AllSpecs()) {
      if (s.name == name) {
        out.push_back(s);
      }
    }
  }
  return optimizer::ParamSpace(std::move(out));
}

constexpr const char* kRecordHeader =
    "t,x,y,heading,v,e_x,e_v,e_y,e_y_rate,e_theta,e_theta_rate,u_tb,"
    "steer_cmd,steer_mrac,steer,curvature,replan";
constexpr int kRecordColumns = 17;

}  // namespace

std::vector<std::string> NamedSpaceNames() {
  return {"mrac-2", "lateral-6", "complete-11"};
}

optimizer::ParamSpace NamedSpace(const std::string& name) {
  if (name == "mrac-2") {
    return Subset({"mrac_t_ref", "mrac_p"});
  }
  if (name == "lateral-6") {
    return Subset({"lqr_q1", "lqr_q2", "lqr_q3", "lqr_q4", "mrac_t_ref",
                   "mrac_p"});
  }
  if (name == "complete-11") {
    std::vector<std::string> all;
    for (const auto& s : AllSpecs()) {
      all.push_back(s.name);
    }
    return Subset(all);
  }
  throw Error(ErrorCode::kInvalidArgument,
              "unknown parameter space '" + name + "'");
}

ControllerParams ApplyParams(ControllerParams base,
                             const optimizer::ParamSpace& space,
                             const optimizer::ParamSet& params) {
  if (!space.Contains(params)) {
    throw Error(ErrorCode::kInvalidArgument, "parameter set outside its box");
  }
  for (std::size_t i = 0; i < space.size(); ++i) {
    *Field(base, space[i].name) = params[i];
  }
  return base;
}

optimizer::ParamSet ExtractParams(const ControllerParams& params,
                                  const optimizer::ParamSpace& space) {
  ControllerParams copy = params;
  optimizer::ParamSet out;
  for (const auto& s : space.specs()) {
    out.push_back(*Field(copy, s.name));
  }
  return out;
}

grading::RunRecord RunScenario(const Scenario& scenario,
                               const ControllerParams& params,
                               const calibration::CalibrationTable& table,
                               const RunConfig& config) {
  if (!(config.dt > 0.0) || !(scenario.duration > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "dt and duration must be > 0");
  }
  plant::Validate(config.vehicle);
  control::Validate(params.lon);
  control::Validate(params.mrac);
  grading::Validate(config.metrics);

  const Trajectory& traj = scenario.trajectory;
  const plant::VehicleParams& vehicle = config.vehicle;
  const double dt = config.dt;
  const int steps = static_cast<int>(std::lround(scenario.duration / dt));
  const bool mrac_on = scenario.mrac && params.mrac_enabled;

  grading::RunRecord record;
  record.dt = dt;
  record.samples.reserve(steps);

  plant::VehicleState state = scenario.initial;
  control::LateralGainScheduler scheduler(vehicle, params.lqr, dt);
  control::MracConfig mrac = params.mrac;
  grading::ReplanDetector detector(config.metrics);
  double integral = 0.0;
  double offset = 0.0;
  bool reanchor = false;
  std::optional<std::size_t> hint;

  for (int n = 0; n < steps; ++n) {
    const double t = n * dt;
    auto tracking = control::ComputeTracking(state, traj, t - offset, hint);
    if (reanchor) {
      offset = t - traj.TimeAtStation(tracking.match.point.s);
      tracking = control::ComputeTracking(state, traj, t - offset,
                                          tracking.match.segment);
      reanchor = false;
    }
    hint = tracking.match.segment;
    const control::ControlErrors& e = tracking.errors;

    grading::RunSample sample;
    sample.t = t;
    sample.x = state.x;
    sample.y = state.y;
    sample.heading = state.heading;
    sample.speed = state.v;
    sample.errors = e;
    sample.curvature = tracking.match.point.curvature;
    sample.steer = state.steer;
    sample.replan = detector.Update(e);
    reanchor = sample.replan;

    const auto lon =
        control::LongitudinalControl(e, params.lon, tracking.timed.accel,
                                     state.v, table, integral, dt);
    integral = lon.integral;

    const control::Vector4 x(e.lateral, e.lateral_rate, e.heading,
                             e.heading_rate);
    const auto lat = control::LateralControl(x, scheduler.GainFor(state.v),
                                             vehicle, state.v,
                                             tracking.match.point.curvature);
    double steer_out = lat.steer;
    if (mrac_on) {
      const auto m = control::MracStep(mrac, lat.steer, state.steer, dt,
                                       vehicle.max_steer);
      mrac = m.next;
      steer_out = m.steer;
    }
    sample.actuation = lon.actuation;
    sample.steer_cmd = lat.steer;
    sample.steer_mrac = steer_out;
    sample.saturated = lon.saturated;
    record.samples.push_back(sample);

    const auto cmd = plant::ActuationCommand::FromSigned(
        lon.actuation, vehicle.steer_ratio * steer_out);
    try {
      state = plant::Step(state, cmd, vehicle, dt);
    } catch (const Error& err) {
      if (err.code() != ErrorCode::kNonFiniteState) {
        throw;
      }
      record.unstable = true;
      break;
    }
  }
  return record;
}

std::string RecordToCsv(const grading::RunRecord& record) {
  std::string out = std::string(kRecordHeader) + "\n";
  for (const auto& s : record.samples) {
    const auto& e = s.errors;
    out += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
                       s.t, s.x, s.y, s.heading, s.speed, e.station, e.speed,
                       e.lateral, e.lateral_rate, e.heading, e.heading_rate,
                       s.actuation, s.steer_cmd, s.steer_mrac, s.steer,
                       s.curvature, s.replan ? 1 : 0);
  }
  return out;
}

grading::RunRecord RecordFromCsv(const std::string& text, double dt) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line.rfind("t,", 0) != 0) {
    throw Error(ErrorCode::kParse, "record CSV must start with its header");
  }
  grading::RunRecord record;
  record.dt = dt;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) {
      continue;
    }
    std::vector<double> v;
    std::istringstream fields(line);
    std::string field;
    while (std::getline(fields, field, ',')) {
      try {
        std::size_t used = 0;
        v.push_back(std::stod(field, &used));
      } catch (const std::exception&) {
        throw Error(ErrorCode::kParse,
                    fmt::format("record line {}: bad number '{}'", line_no, field));
      }
    }
    if (static_cast<int>(v.size()) != kRecordColumns) {
      throw Error(ErrorCode::kParse,
                  fmt::format("record line {}: expected {} columns, got {}",
                              line_no, kRecordColumns, v.size()));
    }
    grading::RunSample s;
    s.t = v[0];
    s.x = v[1];
    s.y = v[2];
    s.heading = v[3];
    s.speed = v[4];
    s.errors = {v[5], v[6], v[7], v[8], v[9], v[10]};
    s.actuation = v[11];
    s.steer_cmd = v[12];
    s.steer_mrac = v[13];
    s.steer = v[14];
    s.curvature = v[15];
    s.replan = v[16] != 0.0;
    record.samples.push_back(s);
  }
  return record;
}

}  // namespace autotune::harness
