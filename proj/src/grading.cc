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

#include "autotune/grading.h"

#include <algorithm>
#include <cmath>
#include <functional>

#include <fmt/format.h>

#include "autotune/error.h"
#include "json.hpp"

namespace autotune::grading {
namespace {

struct ErrorChannel {
  const char* prefix;
  double MetricConfig::*threshold;
  double control::ControlErrors::*field;
};

constexpr ErrorChannel kChannels[] = {
    {"lateral_error", &MetricConfig::lateral_threshold,
     &control::ControlErrors::lateral},
    {"station_error", &MetricConfig::station_threshold,
     &control::ControlErrors::station},
    {"speed_error", &MetricConfig::speed_threshold,
     &control::ControlErrors::speed},
    {"heading_error", &MetricConfig::heading_threshold,
     &control::ControlErrors::heading},
};

double RmsOf(double sum_sq, std::size_t n) {
  if (n == 0) {
    return 0.0;
  }
  const double divisor = n > 1 ? static_cast<double>(n - 1) : 1.0;
  return std::sqrt(sum_sq / divisor);
}

}  // namespace

std::size_t RunRecord::replan_count() const {
  return static_cast<std::size_t>(
      std::count_if(samples.begin(), samples.end(),
                    [](const RunSample& s) { return s.replan; }));
}

void Validate(const MetricConfig& c) {
  const bool ok = c.lateral_threshold > 0.0 && c.station_threshold > 0.0 &&
                  c.speed_threshold > 0.0 && c.heading_threshold > 0.0 &&
                  c.harsh_curvature > 0.0 && c.horizon > 0.0 &&
                  c.max_steer > 0.0 && c.replan_lateral > 0.0 &&
                  c.replan_station > 0.0;
  if (!ok) {
    throw Error(ErrorCode::kInvalidArgument,
                "metric thresholds must all be > 0");
  }
}

const std::vector<std::string>& MetricNames() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& ch : kChannels) {
      out.push_back(std::string(ch.prefix) + "_peak");
      out.push_back(std::string(ch.prefix) + "_rms");
      out.push_back(std::string(ch.prefix) + "_rms_harsh");
    }
    out.push_back("steer_effort_rms");
    out.push_back("replan_rate");
    return out;
  }();
  return names;
}

MetricScores ComputeMetricScores(const RunRecord& record,
                                 const MetricConfig& cfg) {
  if (record.samples.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "cannot grade an empty record");
  }
  Validate(cfg);
  MetricScores out;
  const auto& samples = record.samples;
  const std::size_t n = samples.size();

  for (const auto& ch : kChannels) {
    const double threshold = cfg.*(ch.threshold);
    double peak = 0.0;
    double sum_sq = 0.0;
    double harsh_sq = 0.0;
    std::size_t harsh_n = 0;
    for (const RunSample& s : samples) {
      const double e = s.errors.*(ch.field);
      peak = std::max(peak, std::abs(e));
      sum_sq += e * e;
      if (std::abs(s.curvature) > cfg.harsh_curvature) {
        harsh_sq += e * e;
        ++harsh_n;
      }
    }
    const std::string prefix(ch.prefix);
    out.scores[prefix + "_peak"] = peak / threshold;
    out.scores[prefix + "_rms"] = RmsOf(sum_sq, n) / threshold;
    out.scores[prefix + "_rms_harsh"] = RmsOf(harsh_sq, harsh_n) / threshold;
    if (harsh_n == 0) {
      out.empty_zones.insert(prefix + "_rms_harsh");
    }
  }

  double steer_sq = 0.0;
  for (const RunSample& s : samples) {
    steer_sq += s.steer_mrac * s.steer_mrac;
  }
  out.scores["steer_effort_rms"] = RmsOf(steer_sq, n) / cfg.max_steer;
  out.scores["replan_rate"] = static_cast<double>(record.replan_count()) /
                              (static_cast<double>(n) * cfg.horizon);
  return out;
}

bool ReplanDetector::Update(const control::ControlErrors& e) {
  const bool above = std::abs(e.lateral) > cfg_.replan_lateral ||
                     std::abs(e.station) > cfg_.replan_station;
  const bool rising = above && !above_;
  above_ = above;
  return rising;
}

std::vector<std::uint8_t> DetectReplan(
    std::span<const control::ControlErrors> errors, const MetricConfig& cfg) {
  if (errors.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "empty error series");
  }
  ReplanDetector detector(cfg);
  std::vector<std::uint8_t> marks;
  marks.reserve(errors.size());
  for (const auto& e : errors) {
    marks.push_back(detector.Update(e) ? 1 : 0);
  }
  return marks;
}

Weights UniformWeights() {
  Weights w;
  const auto& names = MetricNames();
  for (const auto& name : names) {
    w[name] = 1.0 / static_cast<double>(names.size());
  }
  return w;
}

Combined Combine(std::span<const std::map<std::string, double>> scores,
                 const Weights& weights,
                 std::span<const std::size_t> sample_counts) {
  if (scores.empty() || scores.size() != sample_counts.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "need one sample count per scenario");
  }
  double weight_sum = 0.0;
  for (const auto& [name, w] : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "weight for '" + name + "' must be finite and >= 0");
    }
    weight_sum += w;
  }
  if (!(weight_sum > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "weights sum to zero");
  }
  Combined out;
  for (const auto& [name, w] : weights) {
    out.normalized_weights[name] = w / weight_sum;
  }
  double total_samples = 0.0;
  for (const std::size_t m : sample_counts) {
    total_samples += static_cast<double>(m);
  }
  if (!(total_samples > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "sample counts sum to zero");
  }
  for (std::size_t j = 0; j < scores.size(); ++j) {
    if (scores[j].size() != weights.size()) {
      throw Error(ErrorCode::kWeightMismatch,
                  fmt::format("scenario {} has {} metrics, weights cover {}", j,
                              scores[j].size(), weights.size()));
    }
    double weighted = 0.0;
    for (const auto& [name, s] : scores[j]) {
      const auto it = out.normalized_weights.find(name);
      if (it == out.normalized_weights.end()) {
        throw Error(ErrorCode::kWeightMismatch,
                    "no weight for metric '" + name + "'");
      }
      weighted += s * it->second;
    }
    out.scenario_penalties.push_back(weighted);
    out.penalty += weighted * static_cast<double>(sample_counts[j]) /
                   total_samples;
  }
  out.score = -out.penalty;
  return out;
}

GradeReport Grade(std::span<const std::string> names,
                  std::span<const RunRecord> records, const Weights& weights,
                  const MetricConfig& cfg, int iteration) {
  if (names.size() != records.size()) {
    throw Error(ErrorCode::kInvalidArgument, "one name per record required");
  }
  GradeReport report;
  report.iteration = iteration;
  std::vector<std::map<std::string, double>> scores;
  std::vector<std::size_t> counts;
  for (std::size_t j = 0; j < records.size(); ++j) {
    ScenarioGrade sg;
    sg.name = names[j];
    sg.metrics = ComputeMetricScores(records[j], cfg);
    sg.samples = records[j].size();
    sg.unstable = records[j].unstable;
    report.unstable = report.unstable || sg.unstable;
    scores.push_back(sg.metrics.scores);
    counts.push_back(sg.samples);
    report.scenarios.push_back(std::move(sg));
  }
  const Combined combined = Combine(scores, weights, counts);
  for (std::size_t j = 0; j < report.scenarios.size(); ++j) {
    report.scenarios[j].penalty = combined.scenario_penalties[j];
  }
  report.weights = combined.normalized_weights;
  report.score = combined.score;
  return report;
}

std::string ReportToJson(const GradeReport& report) {
  nlohmann::ordered_json j;
  j["iteration"] = report.iteration;
  j["score"] = report.score;
  j["unstable"] = report.unstable;
  j["weights"] = nlohmann::ordered_json(report.weights);
  auto& scenarios = j["scenarios"] = nlohmann::ordered_json::array();
  for (const auto& sg : report.scenarios) {
    nlohmann::ordered_json s;
    s["name"] = sg.name;
    s["samples"] = sg.samples;
    s["penalty"] = sg.penalty;
    s["unstable"] = sg.unstable;
    s["scores"] = nlohmann::ordered_json(sg.metrics.scores);
    s["empty_zones"] = std::vector<std::string>(sg.metrics.empty_zones.begin(),
                                                sg.metrics.empty_zones.end());
    scenarios.push_back(std::move(s));
  }
  return j.dump(2) + "\n";
}

std::string ReportToCsv(const GradeReport& report) {
  std::string out = "scenario,metric,score,weight\n";
  for (const auto& sg : report.scenarios) {
    for (const auto& [name, s] : sg.metrics.scores) {
      const auto it = report.weights.find(name);
      const double w = it == report.weights.end() ? 0.0 : it->second;
      out += fmt::format("{},{},{},{}\n", sg.name, name, s, w);
    }
  }
  return out;
}

std::string WeightsToJson(const Weights& weights) {
  nlohmann::ordered_json j;
  j["weights"] = nlohmann::ordered_json(weights);
  return j.dump(2) + "\n";
}

Weights WeightsFromJson(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    const auto& node = j.contains("weights") ? j.at("weights") : j;
    return node.get<Weights>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("weights JSON: ") + e.what());
  }
}

}  // namespace autotune::grading
