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

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "autotune/plant.h"

namespace autotune::calibration {

struct CalibrationSample {
  double command = 0.0;  // signed throttle/brake in [-1, 1]
  double speed = 0.0;
  double accel = 0.0;    // lag-compensated acceleration over the step
};

/// One constant-command segment of a data-collection drive.
struct Segment {
  double command = 0.0;
  double hold = 0.0;  // seconds
};

/// Throttle levels 0.1..1.0 from rest up to about 21 m/s (or 20 s), each
/// followed by a coast and a full brake; then brake levels 0.1..0.9 from
/// about 21 m/s down to rest; then light throttle 0.1..0.5 held at speed.
std::vector<Segment> DefaultSweep(const plant::VehicleParams& params);

/// Drives the plant from rest through the schedule and records one sample
/// per step, skipping the first 3 * T_lon seconds of every segment. The
/// label inverts the plant's first-order acceleration lag,
/// a_prev + T_lon * (a_next - a_prev) / dt. Steps that end at standstill
/// under braking are dropped.
std::vector<CalibrationSample> CollectData(const plant::VehicleParams& params,
                                           std::span<const Segment> schedule,
                                           double dt = 0.01);

/// One-hidden-layer sigmoid network a = f(u, v). Inputs and output are
/// standardized with the stored statistics.
struct MlpModel {
  std::vector<double> w_command;  // per hidden unit
  std::vector<double> w_speed;
  std::vector<double> bias;
  std::vector<double> w_out;
  double b_out = 0.0;
  double command_mean = 0.0, command_scale = 1.0;
  double speed_mean = 0.0, speed_scale = 1.0;
  double accel_mean = 0.0, accel_scale = 1.0;

  int width() const { return static_cast<int>(w_out.size()); }

  double Predict(double command, double speed) const;

  /// out[i] = Predict(commands[i], speeds[i]).
  void PredictBatch(std::span<const double> commands,
                    std::span<const double> speeds,
                    std::span<double> out) const;
};

double Sigmoid(double z);

struct TrainOptions {
  int width = 16;
  int epochs = 2000;
  double learning_rate = 0.2;
  int batch_size = 32;
  std::uint64_t seed = 0;
};

struct TrainResult {
  MlpModel model;
  double rmse = 0.0;  // on the training data, in output units
};

/// Mini-batch gradient descent on mean squared error. Throws
/// Error(kInvalidArgument) with fewer than 10 * width samples and
/// Error(kDiverged) if the loss stops being finite.
TrainResult TrainMlp(std::span<const CalibrationSample> data,
                     const TrainOptions& options);

double Rmse(const MlpModel& model, std::span<const CalibrationSample> data);

struct WidthSelection {
  int width = 0;
  std::vector<double> validation_rmse;  // aligned with the candidates
};

/// Trains one model per candidate on the first 80% of a seeded shuffle and
/// keeps the width with the lowest RMSE on the rest. Ties go to the smaller
/// width.
WidthSelection SelectHiddenDim(std::span<const CalibrationSample> data,
                               std::span<const int> widths,
                               const TrainOptions& options);

/// Acceleration over a (speed, command) grid, non-decreasing in command at
/// every speed.
struct CalibrationTable {
  std::vector<double> speeds;    // ascending
  std::vector<double> commands;  // ascending
  std::vector<double> values;    // speeds.size() x commands.size(), row-major
  int clamp_count = 0;

  double at(std::size_t speed_index, std::size_t command_index) const {
    return values[speed_index * commands.size() + command_index];
  }
};

std::vector<double> DefaultSpeedGrid();
std::vector<double> DefaultCommandGrid();

/// Tabulates an arbitrary map and applies the running-maximum clamp along
/// the command axis.
CalibrationTable TabulateFunction(
    std::span<const double> speeds, std::span<const double> commands,
    const std::function<double(double command, double speed)>& fn);

CalibrationTable BuildTable(const MlpModel& model,
                            std::span<const double> speeds,
                            std::span<const double> commands);

/// Table of the plant's ground-truth drivetrain map.
CalibrationTable TrueTable(const plant::VehicleParams& params,
                           std::span<const double> speeds,
                           std::span<const double> commands);

/// Forward bilinear lookup of acceleration.
double TableAcceleration(const CalibrationTable& table, double command,
                         double speed);

struct Feedforward {
  double command = 0.0;
  bool saturated = false;
};

/// Inverse lookup: command u with table(u, v) = accel, clamped to the
/// command grid range when accel lies outside the column.
Feedforward InverseLookup(const CalibrationTable& table, double accel,
                          double speed);

void ValidateTable(const CalibrationTable& table);

// Header row is "speed" followed by the command grid; each following row
// is a speed and its accelerations.
std::string TableToCsv(const CalibrationTable& table);
CalibrationTable TableFromCsv(const std::string& text);

std::string ModelToJson(const MlpModel& model);
MlpModel ModelFromJson(const std::string& text);

}  // namespace autotune::calibration
