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
#include <string>
#include <vector>

#include "autotune/calibration.h"
#include "autotune/control.h"
#include "autotune/grading.h"
#include "autotune/optimizer.h"
#include "autotune/plant.h"
#include "autotune/trajectory.h"

namespace autotune::harness {

// ---------------------------------------------------------------------------
// Scenarios.

struct Scenario {
  std::string name;
  Trajectory trajectory;
  plant::VehicleState initial;
  double duration = 0.0;
  bool mrac = true;
};

struct SpeedLimits {
  double cruise = 10.0;        // m/s
  double lateral_accel = 3.0;  // m/s^2
  double accel = 1.5;          // m/s^2
  double decel = 1.5;          // m/s^2
};

/// Geometric path sample before a speed profile is attached.
struct PathPoint {
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;
  double curvature = 0.0;
};

/// Polyline builder from straights and circular arcs.
class PathBuilder {
 public:
  explicit PathBuilder(double step = 0.5);

  PathBuilder& Straight(double length);
  /// Positive angle turns left.
  PathBuilder& Arc(double radius, double angle);

  std::vector<PathPoint> Build() const { return points_; }

 private:
  double step_;
  std::vector<PathPoint> points_;
};

/// y = amplitude/2 (1 - cos(2 pi x / wavelength)) over `cycles` periods,
/// with straight lead-in and lead-out.
std::vector<PathPoint> SerpentinePath(double amplitude, double wavelength,
                                      int cycles, double lead, double step);

/// Attaches a rest-to-rest speed profile bounded by the cruise speed and
/// the lateral acceleration limit, with timestamps from the trapezoid rule.
Trajectory TimeParameterize(const std::vector<PathPoint>& path,
                            const SpeedLimits& limits = {});

/// Scenario starting at rest on the first reference point. Duration is
/// the reference duration plus one second.
Scenario MakeScenario(std::string name, Trajectory trajectory);

/// straight, left_turn, right_turn, u_turn, serpentine_1p5, serpentine_3,
/// mixed.
std::vector<Scenario> BuiltinScenarios();
std::vector<std::string> BuiltinScenarioNames();
/// Throws Error(kInvalidArgument) for an unknown name.
Scenario BuiltinScenario(const std::string& name);

// ---------------------------------------------------------------------------
// Controller parameters and named tuning spaces.

struct ControllerParams {
  control::LonGains lon;
  control::LqrWeights lqr;
  control::MracConfig mrac;
  bool mrac_enabled = true;
};

/// mrac-2, lateral-6 or complete-11.
optimizer::ParamSpace NamedSpace(const std::string& name);
std::vector<std::string> NamedSpaceNames();

/// Writes the values of a parameter set into a copy of `base`.
ControllerParams ApplyParams(ControllerParams base,
                             const optimizer::ParamSpace& space,
                             const optimizer::ParamSet& params);
/// Reads the current values of the space's parameters from `params`.
optimizer::ParamSet ExtractParams(const ControllerParams& params,
                                  const optimizer::ParamSpace& space);

// ---------------------------------------------------------------------------
// Rollout.

struct RunConfig {
  plant::VehicleParams vehicle = plant::DefaultVehicleParams();
  grading::MetricConfig metrics;
  double dt = 0.01;
};

/// Closed-loop rollout. A non-finite plant state ends the run early with
/// the record flagged unstable.
grading::RunRecord RunScenario(const Scenario& scenario,
                               const ControllerParams& params,
                               const calibration::CalibrationTable& table,
                               const RunConfig& config = {});

std::string RecordToCsv(const grading::RunRecord& record);
grading::RunRecord RecordFromCsv(const std::string& text, double dt = 0.01);

// ---------------------------------------------------------------------------
// Tune jobs.

struct TuneJobConfig {
  std::string space = "mrac-2";
  std::vector<std::string> scenarios = BuiltinScenarioNames();
  optimizer::Surrogate surrogate = optimizer::Surrogate::kGpr;
  optimizer::Acquisition acquisition;
  int batch = 1;
  int budget = 200;
  int init_count = 0;
  std::uint64_t seed = 0;
  grading::Weights weights = grading::UniformWeights();
  ControllerParams base;
  RunConfig run;
  std::string table_path;  // empty uses the plant's true drivetrain table
  std::string out_dir = "out";
  bool resume = false;
};

/// Reads a job from JSON; absent keys keep their defaults.
TuneJobConfig TuneJobFromJson(const std::string& text);
std::string TuneJobToJson(const TuneJobConfig& cfg);

/// Penalty substituted for an unstable rollout: ten times the worst finite
/// penalty recorded so far, at least 10.
double UnstableScore(const optimizer::History& history);

struct Evaluation {
  grading::GradeReport report;
  double score = 0.0;  // report score, or the unstable substitute
  bool unstable = false;
};

class Evaluator {
 public:
  Evaluator(const TuneJobConfig& cfg, calibration::CalibrationTable table);

  Evaluation Evaluate(const ControllerParams& params,
                      const optimizer::History& history, int iteration) const;
  const std::vector<Scenario>& scenarios() const { return scenarios_; }

 private:
  const TuneJobConfig& cfg_;
  calibration::CalibrationTable table_;
  std::vector<Scenario> scenarios_;
  std::vector<std::string> names_;
};

calibration::CalibrationTable LoadTable(const TuneJobConfig& cfg);

struct TuneJobResult {
  optimizer::TuneResult tune;
  ControllerParams best;
  double default_score = 0.0;
};

/// Writes history.jsonl, best_params.json, grades.csv, convergence.svg and
/// summary.json into cfg.out_dir.
TuneJobResult RunTuneJob(const TuneJobConfig& cfg);

std::string ConvergenceSvg(const optimizer::History& history,
                           const std::string& title);
std::string BestParamsJson(const optimizer::ParamSpace& space,
                           const optimizer::History& history,
                           const std::string& space_name);

std::string ReadFile(const std::string& path);
void WriteFile(const std::string& path, const std::string& contents);

}  // namespace autotune::harness
