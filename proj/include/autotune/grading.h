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
#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "autotune/control.h"

namespace autotune::grading {

/// One control step of a closed-loop rollout.
struct RunSample {
  double t = 0.0;
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;
  double speed = 0.0;
  control::ControlErrors errors;
  double actuation = 0.0;  // u_tb
  double steer_cmd = 0.0;  // outer-loop command
  double steer_mrac = 0.0; // command sent to the actuator
  double steer = 0.0;      // measured wheel angle
  double curvature = 0.0;  // reference curvature at the match
  bool saturated = false;
  bool replan = false;
};

struct RunRecord {
  double dt = 0.01;
  std::vector<RunSample> samples;
  bool unstable = false;  // rollout aborted on a non-finite plant state

  std::size_t size() const { return samples.size(); }
  std::size_t replan_count() const;
};

struct MetricConfig {
  double lateral_threshold = 0.3;   // m
  double station_threshold = 1.0;   // m
  double speed_threshold = 1.0;     // m/s
  double heading_threshold = 0.1;   // rad
  double harsh_curvature = 0.02;    // 1/m, |kappa| above this is harsh
  double horizon = 1.0;             // N_f
  double max_steer = 0.5;           // rad, steering effort normalizer
  double replan_lateral = 0.5;      // m
  double replan_station = 2.0;      // m
};

void Validate(const MetricConfig& cfg);

/// Registry order. Every score is a penalty: lower is better.
const std::vector<std::string>& MetricNames();

struct MetricScores {
  std::map<std::string, double> scores;
  std::set<std::string> empty_zones;  // harsh metrics with no samples
};

/// Scores every metric in MetricNames(). RMS uses the N - 1 divisor.
MetricScores ComputeMetricScores(const RunRecord& record,
                                 const MetricConfig& cfg);

/// Edge-triggered re-plan detector: fires when |e_y| or |e_x| first
/// exceeds its threshold and re-arms once both are back below.
class ReplanDetector {
 public:
  explicit ReplanDetector(const MetricConfig& cfg) : cfg_(cfg) {}

  bool Update(const control::ControlErrors& errors);

 private:
  MetricConfig cfg_;
  bool above_ = false;
};

std::vector<std::uint8_t> DetectReplan(
    std::span<const control::ControlErrors> errors, const MetricConfig& cfg);

using Weights = std::map<std::string, double>;

Weights UniformWeights();

struct Combined {
  double penalty = 0.0;  // sum_j [sum_k s_jk w_k] m_j / sum m
  double score = 0.0;    // -penalty
  std::vector<double> scenario_penalties;  // sum_k s_jk w_k per scenario
  Weights normalized_weights;
};

/// Throws Error(kWeightMismatch) unless every scenario's metric keys match
/// the weight keys exactly.
Combined Combine(std::span<const std::map<std::string, double>> scores,
                 const Weights& weights,
                 std::span<const std::size_t> sample_counts);

struct ScenarioGrade {
  std::string name;
  MetricScores metrics;
  std::size_t samples = 0;
  double penalty = 0.0;
  bool unstable = false;
};

struct GradeReport {
  int iteration = 0;
  std::vector<ScenarioGrade> scenarios;
  Weights weights;  // normalized
  double score = 0.0;
  bool unstable = false;
};

GradeReport Grade(std::span<const std::string> names,
                  std::span<const RunRecord> records, const Weights& weights,
                  const MetricConfig& cfg, int iteration = 0);

std::string ReportToJson(const GradeReport& report);

/// scenario,metric,score,weight rows.
std::string ReportToCsv(const GradeReport& report);

std::string WeightsToJson(const Weights& weights);
Weights WeightsFromJson(const std::string& text);

}  // namespace autotune::grading
