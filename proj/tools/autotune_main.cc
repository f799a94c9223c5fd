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
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "autotune/calibration.h"
#include "autotune/error.h"
#include "autotune/grading.h"
#include "autotune/harness.h"
#include "autotune/optimizer.h"
#include "autotune/weightreg.h"
#include "json.hpp"

namespace fs = std::filesystem;
using namespace autotune;

namespace {

struct Common {
  std::string config;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string out = "out";
};

void AddCommon(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "job configuration JSON");
  cmd->add_option_function<std::uint64_t>(
      "--seed",
      [&c](const std::uint64_t& s) {
        c.seed = s;
        c.seed_set = true;
      },
      "random seed");
  cmd->add_option("--out", c.out, "output directory");
}

harness::TuneJobConfig LoadJob(const Common& c) {
  harness::TuneJobConfig cfg =
      c.config.empty() ? harness::TuneJobConfig{}
                       : harness::TuneJobFromJson(harness::ReadFile(c.config));
  if (c.seed_set) {
    cfg.seed = c.seed;
  }
  cfg.out_dir = c.out;
  return cfg;
}

std::string Join(const fs::path& dir, const std::string& name) {
  return (dir / name).string();
}

int RunCalibrate(const Common& c, int width, int epochs, bool select) {
  const auto job = LoadJob(c);
  fs::create_directories(c.out);
  const auto& vehicle = job.run.vehicle;
  const auto sweep = calibration::DefaultSweep(vehicle);
  const auto data = calibration::CollectData(vehicle, sweep, job.run.dt);

  calibration::TrainOptions opts;
  opts.width = width;
  opts.epochs = epochs;
  opts.seed = job.seed;
  nlohmann::ordered_json report;
  if (select) {
    const std::vector<int> widths = {8, 16, 32};
    const auto sel = calibration::SelectHiddenDim(data, widths, opts);
    opts.width = sel.width;
    report["validation_rmse"] = sel.validation_rmse;
  }
  const auto trained = calibration::TrainMlp(data, opts);
  const auto speeds = calibration::DefaultSpeedGrid();
  const auto commands = calibration::DefaultCommandGrid();
  const auto table = calibration::BuildTable(trained.model, speeds, commands);

  double worst = 0.0;
  for (std::size_t i = 1; i + 1 < speeds.size(); ++i) {
    for (std::size_t k = 1; k + 1 < commands.size(); ++k) {
      const double a = plant::TrueAcceleration(commands[k], speeds[i], vehicle);
      const auto ff = calibration::InverseLookup(table, a, speeds[i]);
      worst = std::max(worst, std::abs(ff.command - commands[k]));
    }
  }
  harness::WriteFile(Join(c.out, "table.csv"), calibration::TableToCsv(table));
  harness::WriteFile(Join(c.out, "model.json"),
                     calibration::ModelToJson(trained.model));
  report["samples"] = data.size();
  report["width"] = opts.width;
  report["train_rmse"] = trained.rmse;
  report["clamp_count"] = table.clamp_count;
  report["round_trip_max_error"] = worst;
  harness::WriteFile(Join(c.out, "calibration.json"), report.dump(2) + "\n");
  fmt::print("samples {} width {} rmse {:.5f} round-trip {:.5f}\n", data.size(),
             opts.width, trained.rmse, worst);
  return 0;
}

harness::ControllerParams ParamsWithOverrides(const harness::TuneJobConfig& job,
                                              const std::string& best_params) {
  harness::ControllerParams params = job.base;
  if (best_params.empty()) {
    return params;
  }
  const auto j = nlohmann::json::parse(harness::ReadFile(best_params));
  const auto space = harness::NamedSpace(j.at("space").get<std::string>());
  optimizer::ParamSet values;
  for (const auto& s : space.specs()) {
    values.push_back(j.at("params").at(s.name).get<double>());
  }
  return harness::ApplyParams(params, space, values);
}

int RunSimulate(const Common& c, const std::string& scenario,
                const std::string& mrac, const std::string& best_params) {
  const auto job = LoadJob(c);
  auto params = ParamsWithOverrides(job, best_params);
  if (mrac == "off") {
    params.mrac_enabled = false;
  } else if (mrac == "on") {
    params.mrac_enabled = true;
  }
  const auto s = harness::BuiltinScenario(scenario);
  const auto record =
      harness::RunScenario(s, params, harness::LoadTable(job), job.run);
  fs::create_directories(c.out);
  const std::string path = Join(c.out, scenario + ".csv");
  harness::WriteFile(path, harness::RecordToCsv(record));
  fmt::print("{}: {} samples{} -> {}\n", scenario, record.size(),
             record.unstable ? " (unstable)" : "", path);
  return record.unstable ? 2 : 0;
}

int RunGrade(const Common& c, const std::vector<std::string>& records,
             const std::string& weights_path) {
  const auto job = LoadJob(c);
  const grading::Weights weights =
      weights_path.empty()
          ? job.weights
          : grading::WeightsFromJson(harness::ReadFile(weights_path));
  std::vector<std::string> names;
  std::vector<grading::RunRecord> runs;
  for (const auto& path : records) {
    names.push_back(fs::path(path).stem().string());
    runs.push_back(harness::RecordFromCsv(harness::ReadFile(path), job.run.dt));
  }
  const auto report =
      grading::Grade(names, runs, weights, job.run.metrics, 0);
  fs::create_directories(c.out);
  harness::WriteFile(Join(c.out, "report.json"), grading::ReportToJson(report));
  harness::WriteFile(Join(c.out, "report.csv"), grading::ReportToCsv(report));
  fmt::print("score {}\n", report.score);
  return 0;
}

int RunTune(Common c, const std::string& space, int budget,
            const std::string& surrogate, const std::string& acquisition,
            bool resume) {
  auto job = LoadJob(c);
  if (!space.empty()) {
    harness::NamedSpace(space);
    job.space = space;
  }
  if (budget > 0) {
    job.budget = budget;
  }
  if (surrogate == "gpr") {
    job.surrogate = optimizer::Surrogate::kGpr;
  } else if (surrogate == "tpe") {
    job.surrogate = optimizer::Surrogate::kTpe;
  }
  if (acquisition == "ucb") {
    job.acquisition.kind = optimizer::AcquisitionKind::kUcb;
  } else if (acquisition == "ei") {
    job.acquisition.kind = optimizer::AcquisitionKind::kEi;
  } else if (acquisition == "max_variance") {
    job.acquisition.kind = optimizer::AcquisitionKind::kMaxVariance;
  }
  job.resume = resume;
  const auto result = harness::RunTuneJob(job);
  fmt::print("space {} budget {} best {} (iteration {}) default {}\n",
             job.space, job.budget, result.tune.best_score,
             result.tune.best_index, result.default_score);
  return 0;
}

int RunFitWeights(const Common& c, const std::string& pairs_path,
                  double margin, int iterations, double eta0) {
  const auto pairs = weightreg::PairsFromCsv(harness::ReadFile(pairs_path));
  weightreg::FitOptions opts;
  opts.margin = margin;
  opts.iterations = iterations;
  opts.eta0 = eta0;
  opts.seed = c.seed;
  const auto fit = weightreg::FitWeights(pairs, opts);
  const auto& names = grading::MetricNames();
  std::vector<std::string> keys;
  if (fit.weights.size() == names.size()) {
    keys = names;
  } else {
    for (std::size_t k = 0; k < fit.weights.size(); ++k) {
      keys.push_back(fmt::format("metric_{}", k));
    }
  }
  fs::create_directories(c.out);
  harness::WriteFile(Join(c.out, "weights.json"),
                     grading::WeightsToJson(weightreg::ToGradingWeights(fit.weights, keys)));
  fmt::print("pairs {} loss {} separable {} steps {}\n", pairs.size(), fit.loss,
             fit.separable, fit.productive_steps);
  return 0;
}

int RunReport(const Common& c, const std::string& history_path,
              const std::string& space_name) {
  const auto space = harness::NamedSpace(space_name);
  const auto history =
      optimizer::HistoryFromJsonl(harness::ReadFile(history_path), space);
  if (history.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "history is empty");
  }
  fs::create_directories(c.out);
  harness::WriteFile(Join(c.out, "convergence.svg"),
                     harness::ConvergenceSvg(history, space_name + " best-so-far score"));
  const auto best = history.BestSoFar();
  fmt::print("{:>9} {:>14} {:>14}\n", "iteration", "score", "best_so_far");
  for (std::size_t i = 0; i < history.size(); ++i) {
    fmt::print("{:>9} {:>14.6f} {:>14.6f}\n", history.entries[i].iteration,
               history.entries[i].score, best[i]);
  }
  const auto& e = history.entries[history.BestIndex()];
  fmt::print("best iteration {} score {}\n", e.iteration, e.score);
  for (std::size_t i = 0; i < space.size(); ++i) {
    fmt::print("  {} = {}\n", space[i].name, e.params[i]);
  }
  return 0;
}

int ExitCodeFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kParse:
    case ErrorCode::kWeightMismatch:
    case ErrorCode::kNoPairs:
      return 1;
    default:
      return 2;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Control-in-the-loop autotuning workbench"};
  app.require_subcommand(1);
  Common common;

  auto* calibrate = app.add_subcommand("calibrate", "collect data, train the MLP, write the table");
  AddCommon(calibrate, common);
  int width = 16;
  int epochs = 2000;
  bool select = false;
  calibrate->add_option("--width", width, "hidden layer width");
  calibrate->add_option("--epochs", epochs, "training epochs");
  calibrate->add_flag("--select-width", select, "pick the width from {8,16,32}");

  auto* simulate = app.add_subcommand("simulate", "roll out one scenario to a record CSV");
  AddCommon(simulate, common);
  std::string scenario;
  std::string mrac = "default";
  std::string best_params;
  simulate->add_option("--scenario", scenario, "scenario name")->required();
  simulate->add_option("--mrac", mrac, "on, off or default")
      ->check(CLI::IsMember({"on", "off", "default"}));
  simulate->add_option("--params", best_params, "best_params.json to apply");

  auto* grade = app.add_subcommand("grade", "grade record CSVs");
  AddCommon(grade, common);
  std::vector<std::string> records;
  std::string weights_path;
  grade->add_option("--record", records, "record CSV (repeatable)")->required();
  grade->add_option("--weights", weights_path, "weights JSON");

  auto* tune = app.add_subcommand("tune", "run a tune job");
  AddCommon(tune, common);
  std::string space;
  int budget = 0;
  std::string surrogate;
  std::string acquisition;
  bool resume = false;
  tune->add_option("--space", space, "mrac-2, lateral-6 or complete-11");
  tune->add_option("--budget", budget, "iteration budget");
  tune->add_option("--surrogate", surrogate, "gpr or tpe")
      ->check(CLI::IsMember({"gpr", "tpe"}));
  tune->add_option("--acquisition", acquisition, "ucb, ei or max_variance")
      ->check(CLI::IsMember({"ucb", "ei", "max_variance"}));
  tune->add_flag("--resume", resume, "continue from out/history.jsonl");

  auto* fit = app.add_subcommand("fit-weights", "fit grader weights from trajectory pairs");
  AddCommon(fit, common);
  std::string pairs_path;
  double margin = 0.01;
  int iterations = 2000;
  double eta0 = 0.1;
  fit->add_option("--pairs", pairs_path, "pairs CSV")->required();
  fit->add_option("--margin", margin, "hinge margin");
  fit->add_option("--iterations", iterations, "subgradient steps");
  fit->add_option("--eta0", eta0, "initial step size");

  auto* report = app.add_subcommand("report", "plot and summarize a history file");
  AddCommon(report, common);
  std::string history_path;
  std::string report_space = "mrac-2";
  report->add_option("--history", history_path, "history JSONL")->required();
  report->add_option("--space", report_space, "parameter space of the history");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << app.help();
    return 1;
  }

  try {
    if (*calibrate) return RunCalibrate(common, width, epochs, select);
    if (*simulate) return RunSimulate(common, scenario, mrac, best_params);
    if (*grade) return RunGrade(common, records, weights_path);
    if (*tune) return RunTune(common, space, budget, surrogate, acquisition, resume);
    if (*fit) return RunFitWeights(common, pairs_path, margin, iterations, eta0);
    if (*report) return RunReport(common, history_path, report_space);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return ExitCodeFor(e.code());
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
