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

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "autotune/error.h"
#include "autotune/harness.h"
#include "json.hpp"

namespace autotune::harness {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

template <typename T>
void Read(const json& j, const char* key, T& out) {
  if (j.contains(key)) {
    out = j.at(key).get<T>();
  }
}

const char* SurrogateName(optimizer::Surrogate s) {
  return s == optimizer::Surrogate::kGpr ? "gpr" : "tpe";
}

const char* AcquisitionName(optimizer::AcquisitionKind k) {
  switch (k) {
    case optimizer::AcquisitionKind::kUcb:
      return "ucb";
    case optimizer::AcquisitionKind::kEi:
      return "ei";
    case optimizer::AcquisitionKind::kMaxVariance:
      return "max_variance";
  }
  return "ucb";
}

// Sample-weighted mean of each metric over the scenarios of a report.
std::map<std::string, double> MetricAggregates(const grading::GradeReport& r) {
  std::map<std::string, double> agg;
  double total = 0.0;
  for (const auto& sg : r.scenarios) {
    total += static_cast<double>(sg.samples);
  }
  for (const auto& sg : r.scenarios) {
    for (const auto& [name, s] : sg.metrics.scores) {
      agg[name] += total > 0.0 ? s * static_cast<double>(sg.samples) / total : 0.0;
    }
  }
  return agg;
}

}  // namespace

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::kIo, "cannot read " + path);
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void WriteFile(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error(ErrorCode::kIo, "cannot write " + path);
  }
  out << contents;
  if (!out) {
    throw Error(ErrorCode::kIo, "write failed for " + path);
  }
}

TuneJobConfig TuneJobFromJson(const std::string& text) {
  TuneJobConfig cfg;
  try {
    const json j = json::parse(text);
    Read(j, "space", cfg.space);
    Read(j, "scenarios", cfg.scenarios);
    if (j.contains("surrogate")) {
      const auto s = j.at("surrogate").get<std::string>();
      if (s == "gpr") {
        cfg.surrogate = optimizer::Surrogate::kGpr;
      } else if (s == "tpe") {
        cfg.surrogate = optimizer::Surrogate::kTpe;
      } else {
        throw Error(ErrorCode::kInvalidArgument, "unknown surrogate '" + s + "'");
      }
    }
    if (j.contains("acquisition")) {
      const auto a = j.at("acquisition").get<std::string>();
      if (a == "ucb") {
        cfg.acquisition.kind = optimizer::AcquisitionKind::kUcb;
      } else if (a == "ei") {
        cfg.acquisition.kind = optimizer::AcquisitionKind::kEi;
      } else if (a == "max_variance") {
        cfg.acquisition.kind = optimizer::AcquisitionKind::kMaxVariance;
      } else {
        throw Error(ErrorCode::kInvalidArgument,
                    "unknown acquisition '" + a + "'");
      }
    }
    Read(j, "kappa", cfg.acquisition.kappa);
    Read(j, "batch", cfg.batch);
    Read(j, "budget", cfg.budget);
    Read(j, "init_count", cfg.init_count);
    Read(j, "seed", cfg.seed);
    Read(j, "weights", cfg.weights);
    Read(j, "table", cfg.table_path);
    Read(j, "out", cfg.out_dir);
    Read(j, "resume", cfg.resume);
    Read(j, "dt", cfg.run.dt);
    if (j.contains("vehicle")) {
      const json& v = j.at("vehicle");
      auto& p = cfg.run.vehicle;
      Read(v, "mass", p.mass);
      Read(v, "yaw_inertia", p.yaw_inertia);
      Read(v, "cornering_front", p.cornering_front);
      Read(v, "cornering_rear", p.cornering_rear);
      Read(v, "lf", p.lf);
      Read(v, "lr", p.lr);
      Read(v, "steer_ratio", p.steer_ratio);
      Read(v, "steer_time_constant", p.steer_time_constant);
      Read(v, "lon_time_constant", p.lon_time_constant);
      Read(v, "max_steer", p.max_steer);
      Read(v, "max_accel", p.max_accel);
      Read(v, "power_falloff", p.power_falloff);
      Read(v, "max_decel", p.max_decel);
      Read(v, "rolling_resistance", p.rolling_resistance);
      Read(v, "drag", p.drag);
      p.understeer_gradient = plant::UndersteerGradient(p);
      Read(v, "understeer_gradient", p.understeer_gradient);
    }
    if (j.contains("controller")) {
      const json& c = j.at("controller");
      auto& b = cfg.base;
      if (c.contains("lon")) {
        const json& l = c.at("lon");
        Read(l, "kp_speed_high", b.lon.kp_speed_high);
        Read(l, "ki_speed_high", b.lon.ki_speed_high);
        Read(l, "kp_speed_low", b.lon.kp_speed_low);
        Read(l, "ki_speed_low", b.lon.ki_speed_low);
        Read(l, "kp_station", b.lon.kp_station);
        Read(l, "switch_speed", b.lon.switch_speed);
        Read(l, "integral_bound", b.lon.integral_bound);
      }
      if (c.contains("lqr")) {
        const json& l = c.at("lqr");
        if (l.contains("q")) {
          const auto q = l.at("q").get<std::vector<double>>();
          if (q.size() != 4) {
            throw Error(ErrorCode::kInvalidArgument, "lqr.q needs 4 entries");
          }
          b.lqr.q = control::Vector4(q[0], q[1], q[2], q[3]);
        }
        Read(l, "r", b.lqr.r);
      }
      if (c.contains("mrac")) {
        const json& m = c.at("mrac");
        Read(m, "t_ref", b.mrac.t_ref);
        Read(m, "p", b.mrac.adaption_gain);
        Read(m, "gamma_state", b.mrac.gamma_state);
        Read(m, "gamma_input", b.mrac.gamma_input);
      }
      Read(c, "mrac_enabled", b.mrac_enabled);
    }
    if (j.contains("metrics")) {
      const json& m = j.at("metrics");
      auto& mc = cfg.run.metrics;
      Read(m, "lateral_threshold", mc.lateral_threshold);
      Read(m, "station_threshold", mc.station_threshold);
      Read(m, "speed_threshold", mc.speed_threshold);
      Read(m, "heading_threshold", mc.heading_threshold);
      Read(m, "harsh_curvature", mc.harsh_curvature);
      Read(m, "horizon", mc.horizon);
      Read(m, "max_steer", mc.max_steer);
      Read(m, "replan_lateral", mc.replan_lateral);
      Read(m, "replan_station", mc.replan_station);
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("job config: ") + e.what());
  }
  NamedSpace(cfg.space);
  for (const auto& name : cfg.scenarios) {
    const auto names = BuiltinScenarioNames();
    if (std::find(names.begin(), names.end(), name) == names.end()) {
      throw Error(ErrorCode::kInvalidArgument, "unknown scenario '" + name + "'");
    }
  }
  if (cfg.scenarios.empty() || cfg.budget < 1 || cfg.batch < 1) {
    throw Error(ErrorCode::kInvalidArgument,
                "job needs scenarios, budget >= 1 and batch >= 1");
  }
  return cfg;
}

std::string TuneJobToJson(const TuneJobConfig& cfg) {
  ordered_json j;
  j["space"] = cfg.space;
  j["scenarios"] = cfg.scenarios;
  j["surrogate"] = SurrogateName(cfg.surrogate);
  j["acquisition"] = AcquisitionName(cfg.acquisition.kind);
  j["kappa"] = cfg.acquisition.kappa;
  j["batch"] = cfg.batch;
  j["budget"] = cfg.budget;
  j["init_count"] = cfg.init_count;
  j["seed"] = cfg.seed;
  j["weights"] = ordered_json(cfg.weights);
  j["table"] = cfg.table_path;
  j["out"] = cfg.out_dir;
  j["dt"] = cfg.run.dt;
  const auto& b = cfg.base;
  j["controller"]["lon"] = {{"kp_speed_high", b.lon.kp_speed_high},
                            {"ki_speed_high", b.lon.ki_speed_high},
                            {"kp_speed_low", b.lon.kp_speed_low},
                            {"ki_speed_low", b.lon.ki_speed_low},
                            {"kp_station", b.lon.kp_station},
                            {"switch_speed", b.lon.switch_speed},
                            {"integral_bound", b.lon.integral_bound}};
  j["controller"]["lqr"] = {
      {"q", {b.lqr.q(0), b.lqr.q(1), b.lqr.q(2), b.lqr.q(3)}}, {"r", b.lqr.r}};
  j["controller"]["mrac"] = {{"t_ref", b.mrac.t_ref},
                             {"p", b.mrac.adaption_gain},
                             {"gamma_state", b.mrac.gamma_state},
                             {"gamma_input", b.mrac.gamma_input}};
  j["controller"]["mrac_enabled"] = b.mrac_enabled;
  return j.dump(2) + "\n";
}

calibration::CalibrationTable LoadTable(const TuneJobConfig& cfg) {
  if (!cfg.table_path.empty()) {
    return calibration::TableFromCsv(ReadFile(cfg.table_path));
  }
  const auto speeds = calibration::DefaultSpeedGrid();
  const auto commands = calibration::DefaultCommandGrid();
  return calibration::TrueTable(cfg.run.vehicle, speeds, commands);
}

double UnstableScore(const optimizer::History& history) {
  const auto worst = history.WorstStableScore();
  const double penalty = worst ? -*worst : 0.0;
  return -10.0 * std::max(1.0, penalty);
}

Evaluator::Evaluator(const TuneJobConfig& cfg,
                     calibration::CalibrationTable table)
    : cfg_(cfg), table_(std::move(table)) {
  for (const auto& name : cfg.scenarios) {
    scenarios_.push_back(BuiltinScenario(name));
    names_.push_back(name);
  }
}

Evaluation Evaluator::Evaluate(const ControllerParams& params,
                               const optimizer::History& history,
                               int iteration) const {
  std::vector<grading::RunRecord> records;
  records.reserve(scenarios_.size());
  for (const auto& s : scenarios_) {
    records.push_back(RunScenario(s, params, table_, cfg_.run));
  }
  Evaluation out;
  out.report = grading::Grade(names_, records, cfg_.weights, cfg_.run.metrics,
                              iteration);
  out.unstable = out.report.unstable || !std::isfinite(out.report.score);
  out.score = out.unstable ? UnstableScore(history) : out.report.score;
  return out;
}

std::string BestParamsJson(const optimizer::ParamSpace& space,
                           const optimizer::History& history,
                           const std::string& space_name) {
  const std::size_t best = history.BestIndex();
  const auto& e = history.entries[best];
  ordered_json j;
  j["space"] = space_name;
  j["iteration"] = e.iteration;
  j["score"] = e.score;
  ordered_json params = ordered_json::object();
  for (std::size_t i = 0; i < space.size(); ++i) {
    params[space[i].name] = e.params[i];
  }
  j["params"] = std::move(params);
  return j.dump(2) + "\n";
}

std::string ConvergenceSvg(const optimizer::History& history,
                           const std::string& title) {
  constexpr double kW = 640.0;
  constexpr double kH = 400.0;
  constexpr double kLeft = 70.0;
  constexpr double kRight = 20.0;
  constexpr double kTop = 40.0;
  constexpr double kBottom = 50.0;
  const auto best = history.BestSoFar();
  double lo = 0.0;
  double hi = 0.0;
  bool any = false;
  for (const auto& e : history.entries) {
    if (e.unstable) {
      continue;
    }
    lo = any ? std::min(lo, e.score) : e.score;
    hi = any ? std::max(hi, e.score) : e.score;
    any = true;
  }
  if (!(hi > lo)) {
    lo -= 0.5;
    hi += 0.5;
  }
  const double n = std::max<double>(1.0, static_cast<double>(history.size()) - 1.0);
  const auto px = [&](double i) { return kLeft + (kW - kLeft - kRight) * i / n; };
  const auto py = [&](double g) {
    const double c = std::clamp(g, lo, hi);
    return kTop + (kH - kTop - kBottom) * (hi - c) / (hi - lo);
  };

  std::string svg = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:.0f}\" "
      "height=\"{:.0f}\" font-family=\"sans-serif\" font-size=\"12\">\n",
      kW, kH);
  svg += fmt::format("<rect width=\"{:.0f}\" height=\"{:.0f}\" fill=\"white\"/>\n",
                     kW, kH);
  svg += fmt::format("<text x=\"{:.1f}\" y=\"22\" text-anchor=\"middle\">{}</text>\n",
                     kW / 2, title);
  svg += fmt::format(
      "<line x1=\"{0:.1f}\" y1=\"{1:.1f}\" x2=\"{0:.1f}\" y2=\"{2:.1f}\" "
      "stroke=\"black\"/>\n",
      kLeft, kTop, kH - kBottom);
  svg += fmt::format(
      "<line x1=\"{0:.1f}\" y1=\"{1:.1f}\" x2=\"{2:.1f}\" y2=\"{1:.1f}\" "
      "stroke=\"black\"/>\n",
      kLeft, kH - kBottom, kW - kRight);
  svg += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"end\">{:.4g}</text>\n",
                     kLeft - 6, kTop + 4, hi);
  svg += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"end\">{:.4g}</text>\n",
                     kLeft - 6, kH - kBottom + 4, lo);
  svg += fmt::format(
      "<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"middle\">iteration "
      "(0..{})</text>\n",
      (kLeft + kW - kRight) / 2, kH - 15, history.empty() ? 0 : history.size() - 1);
  for (std::size_t i = 0; i < history.size(); ++i) {
    const auto& e = history.entries[i];
    svg += fmt::format(
        "<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"2\" fill=\"{}\"/>\n",
        px(static_cast<double>(i)), py(e.score), e.unstable ? "red" : "gray");
  }
  if (!best.empty()) {
    svg += "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < best.size(); ++i) {
      svg += fmt::format("{}{:.2f},{:.2f}", i == 0 ? "" : " ",
                         px(static_cast<double>(i)), py(best[i]));
    }
    svg += "\"/>\n";
  }
  svg += "</svg>\n";
  return svg;
}

TuneJobResult RunTuneJob(const TuneJobConfig& cfg) {
  namespace fs = std::filesystem;
  const optimizer::ParamSpace space = NamedSpace(cfg.space);
  fs::create_directories(cfg.out_dir);
  const fs::path dir(cfg.out_dir);

  Evaluator evaluator(cfg, LoadTable(cfg));
  TuneJobResult result;
  result.default_score = evaluator.Evaluate(cfg.base, {}, -1).score;

  const std::string grades_path = (dir / "grades.csv").string();
  const bool append = cfg.resume && fs::exists(dir / "history.jsonl") &&
                      fs::exists(grades_path);
  std::ofstream grades(grades_path, append ? std::ios::binary | std::ios::app
                                           : std::ios::binary | std::ios::trunc);
  if (!grades) {
    throw Error(ErrorCode::kIo, "cannot write " + grades_path);
  }
  const auto& metric_names = grading::MetricNames();
  if (!append) {
    grades << "iteration,score,best_so_far,unstable";
    for (const auto& m : metric_names) {
      grades << "," << m;
    }
    grades << "\n";
  }

  optimizer::TuneConfig tc;
  tc.space = space;
  tc.surrogate = cfg.surrogate;
  tc.acquisition = cfg.acquisition;
  tc.batch = cfg.batch;
  tc.budget = cfg.budget;
  tc.init_count = cfg.init_count;
  tc.seed = cfg.seed;
  tc.history_path = (dir / "history.jsonl").string();
  tc.resume = cfg.resume;

  const auto evaluate = [&](const optimizer::ParamSet& p,
                            const optimizer::History& history) {
    const int iteration = static_cast<int>(history.size());
    const auto eval =
        evaluator.Evaluate(ApplyParams(cfg.base, space, p), history, iteration);
    double best = eval.score;
    for (const auto& e : history.entries) {
      best = std::max(best, e.score);
    }
    grades << fmt::format("{},{},{},{}", iteration, eval.score, best,
                          eval.unstable ? 1 : 0);
    const auto agg = MetricAggregates(eval.report);
    for (const auto& m : metric_names) {
      const auto it = agg.find(m);
      grades << fmt::format(",{}", it == agg.end() ? 0.0 : it->second);
    }
    grades << "\n";
    grades.flush();
    return optimizer::Evaluation{eval.score, eval.unstable};
  };

  result.tune = optimizer::Tune(tc, evaluate);
  result.best = ApplyParams(cfg.base, space, result.tune.best);

  WriteFile((dir / "best_params.json").string(),
            BestParamsJson(space, result.tune.history, cfg.space));
  WriteFile((dir / "convergence.svg").string(),
            ConvergenceSvg(result.tune.history,
                           fmt::format("{} best-so-far score", cfg.space)));
  ordered_json summary;
  summary["space"] = cfg.space;
  summary["budget"] = cfg.budget;
  summary["seed"] = cfg.seed;
  summary["best_iteration"] = result.tune.history.entries[result.tune.best_index].iteration;
  summary["best_score"] = result.tune.best_score;
  summary["default_score"] = result.default_score;
  summary["improved"] = result.tune.best_score > result.default_score;
  WriteFile((dir / "summary.json").string(), summary.dump(2) + "\n");
  return result;
}

}  // namespace autotune::harness
