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

#include "autotune/calibration.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include <fmt/format.h>

#include "autotune/error.h"
#include "autotune/simd.h"
#include "json.hpp"

namespace autotune::calibration {
namespace {

struct Stats {
  double mean = 0.0;
  double scale = 1.0;
};

template <typename Getter>
Stats Standardize(std::span<const CalibrationSample> data, Getter get) {
  double mean = 0.0;
  for (const auto& s : data) {
    mean += get(s);
  }
  mean /= static_cast<double>(data.size());
  double var = 0.0;
  for (const auto& s : data) {
    const double d = get(s) - mean;
    var += d * d;
  }
  var /= static_cast<double>(data.size());
  const double scale = var > 1e-24 ? std::sqrt(var) : 1.0;
  return {mean, scale};
}

void RequireAscending(std::span<const double> grid, const char* name) {
  if (grid.empty()) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string(name) + " grid is empty");
  }
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1])) {
      throw Error(ErrorCode::kInvalidArgument,
                  std::string(name) + " grid must be strictly ascending");
    }
  }
}

// Running maximum along the command axis; returns how many cells moved.
int ClampMonotone(CalibrationTable& table) {
  int clamps = 0;
  const std::size_t nc = table.commands.size();
  for (std::size_t i = 0; i < table.speeds.size(); ++i) {
    double* row = table.values.data() + i * nc;
    for (std::size_t k = 1; k < nc; ++k) {
      if (row[k] < row[k - 1]) {
        row[k] = row[k - 1];
        ++clamps;
      }
    }
  }
  return clamps;
}

// Index of the lower bracket and the interpolation weight for x in grid.
std::pair<std::size_t, double> Bracket(std::span<const double> grid,
                                       double x) {
  if (grid.size() == 1 || x <= grid.front()) {
    return {0, 0.0};
  }
  if (x >= grid.back()) {
    return {grid.size() - 2, 1.0};
  }
  const auto it = std::upper_bound(grid.begin(), grid.end(), x);
  const std::size_t hi = static_cast<std::size_t>(it - grid.begin());
  const std::size_t lo = hi - 1;
  return {lo, (x - grid[lo]) / (grid[hi] - grid[lo])};
}

std::vector<double> Linspace(double lo, double hi, double step) {
  std::vector<double> out;
  const int n = static_cast<int>(std::lround((hi - lo) / step));
  for (int i = 0; i <= n; ++i) {
    out.push_back(lo + step * i);
  }
  return out;
}

}  // namespace

double Sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

std::vector<Segment> DefaultSweep(const plant::VehicleParams& params) {
  constexpr double kTopSpeed = 21.0;
  constexpr double kMaxHold = 20.0;
  constexpr double dt = 0.01;
  // Time for a constant command to take the vehicle from rest to kTopSpeed.
  auto time_to_top = [&](double command) {
    plant::VehicleState state;
    const auto cmd = plant::ActuationCommand::FromSigned(command, 0.0);
    double t = 0.0;
    while (state.v < kTopSpeed && t < kMaxHold) {
      state = plant::Step(state, cmd, params, dt);
      t += dt;
    }
    return std::round(t * 100.0) / 100.0;
  };
  const double full_throttle = time_to_top(1.0);
  std::vector<Segment> schedule;
  for (int k = 1; k <= 10; ++k) {
    const double level = 0.1 * k;
    schedule.push_back({level, time_to_top(level)});
    schedule.push_back({0.0, 3.0});
    schedule.push_back({-1.0, kTopSpeed / params.max_decel + 1.0});
    schedule.push_back({0.0, 1.0});
  }
  for (int k = 1; k <= 9; ++k) {
    const double level = 0.1 * k;
    schedule.push_back({1.0, full_throttle});
    schedule.push_back({-level, kTopSpeed / (params.max_decel * level) + 1.0});
    schedule.push_back({0.0, 1.0});
  }
  // Light throttle at speed, which the runs from rest never reach.
  for (int k = 1; k <= 5; ++k) {
    schedule.push_back({1.0, full_throttle});
    schedule.push_back({0.1 * k, 8.0});
    schedule.push_back({-1.0, kTopSpeed / params.max_decel + 1.0});
    schedule.push_back({0.0, 1.0});
  }
  return schedule;
}

std::vector<CalibrationSample> CollectData(const plant::VehicleParams& params,
                                           std::span<const Segment> schedule,
                                           double dt) {
  if (schedule.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "empty command schedule");
  }
  plant::Validate(params);
  const double skip = 3.0 * params.lon_time_constant;
  std::vector<CalibrationSample> samples;
  plant::VehicleState state;
  for (const Segment& seg : schedule) {
    if (seg.command < -1.0 || seg.command > 1.0) {
      throw Error(ErrorCode::kInvalidArgument,
                  "schedule command outside [-1, 1]");
    }
    const auto steps = static_cast<long>(std::lround(seg.hold / dt));
    const auto skip_steps = static_cast<long>(std::lround(skip / dt));
    const auto cmd = plant::ActuationCommand::FromSigned(seg.command, 0.0);
    for (long n = 0; n < steps; ++n) {
      const double speed = state.v;
      const double accel_before = state.accel;
      state = plant::Step(state, cmd, params, dt);
      if (n < skip_steps) {
        continue;
      }
      // Braked to (or held at) standstill.
      if (seg.command < 0.0 && state.v == 0.0) {
        continue;
      }
      // Lag-compensated label.
      const double label = accel_before + params.lon_time_constant *
                                              (state.accel - accel_before) / dt;
      samples.push_back({seg.command, speed, label});
    }
  }
  if (samples.empty()) {
    throw Error(ErrorCode::kEmptyDataset, "schedule produced no samples");
  }
  return samples;
}

double MlpModel::Predict(double command, double speed) const {
  const double x1 = (command - command_mean) / command_scale;
  const double x2 = (speed - speed_mean) / speed_scale;
  double out = b_out;
  for (std::size_t l = 0; l < w_out.size(); ++l) {
    out += w_out[l] * Sigmoid(w_command[l] * x1 + w_speed[l] * x2 + bias[l]);
  }
  return accel_mean + accel_scale * out;
}

void MlpModel::PredictBatch(std::span<const double> commands,
                            std::span<const double> speeds,
                            std::span<double> out) const {
  const std::size_t n = commands.size();
  const auto& k = simd::Kernels();
  std::vector<double> x1(n), x2(n), z(n), acc(n, b_out);
  for (std::size_t i = 0; i < n; ++i) {
    x1[i] = (commands[i] - command_mean) / command_scale;
    x2[i] = (speeds[i] - speed_mean) / speed_scale;
  }
  for (std::size_t l = 0; l < w_out.size(); ++l) {
    k.affine2(w_command[l], w_speed[l], bias[l], x1.data(), x2.data(), n,
              z.data());
    for (double& v : z) {
      v = Sigmoid(v);
    }
    k.axpy(w_out[l], z.data(), acc.data(), n);
  }
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = accel_mean + accel_scale * acc[i];
  }
}

double Rmse(const MlpModel& model, std::span<const CalibrationSample> data) {
  std::vector<double> u(data.size()), v(data.size()), pred(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    u[i] = data[i].command;
    v[i] = data[i].speed;
  }
  model.PredictBatch(u, v, pred);
  double sum = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double e = pred[i] - data[i].accel;
    sum += e * e;
  }
  return std::sqrt(sum / static_cast<double>(data.size()));
}

TrainResult TrainMlp(std::span<const CalibrationSample> data,
                     const TrainOptions& options) {
  if (options.width < 1) {
    throw Error(ErrorCode::kInvalidArgument, "hidden width must be >= 1");
  }
  if (data.size() < static_cast<std::size_t>(10 * options.width)) {
    throw Error(ErrorCode::kInvalidArgument,
                "need at least 10 samples per hidden unit");
  }
  if (options.epochs < 1 || options.batch_size < 1 ||
      !(options.learning_rate > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "invalid training options");
  }
  const std::size_t width = static_cast<std::size_t>(options.width);
  const std::size_t n = data.size();

  MlpModel model;
  const Stats su = Standardize(data, [](const auto& s) { return s.command; });
  const Stats sv = Standardize(data, [](const auto& s) { return s.speed; });
  const Stats sa = Standardize(data, [](const auto& s) { return s.accel; });
  model.command_mean = su.mean;
  model.command_scale = su.scale;
  model.speed_mean = sv.mean;
  model.speed_scale = sv.scale;
  model.accel_mean = sa.mean;
  model.accel_scale = sa.scale;

  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  model.w_command.resize(width);
  model.w_speed.resize(width);
  model.bias.resize(width);
  model.w_out.resize(width);
  const double out_scale = 1.0 / std::sqrt(static_cast<double>(width));
  for (std::size_t l = 0; l < width; ++l) {
    model.w_command[l] = normal(rng);
    model.w_speed[l] = normal(rng);
    model.bias[l] = normal(rng);
    model.w_out[l] = out_scale * normal(rng);
  }

  std::vector<double> x1(n), x2(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    x1[i] = (data[i].command - su.mean) / su.scale;
    x2[i] = (data[i].speed - sv.mean) / sv.scale;
    y[i] = (data[i].accel - sa.mean) / sa.scale;
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);

  const std::size_t batch = static_cast<std::size_t>(options.batch_size);
  const auto& kern = simd::Kernels();
  std::vector<double> bx1(batch), bx2(batch), by(batch), pred(batch),
      delta(batch), dh(batch);
  std::vector<double> hidden(width * batch);
  const double lr = options.learning_rate;

  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss = 0.0;
    for (std::size_t start = 0; start < n; start += batch) {
      const std::size_t m = std::min(batch, n - start);
      for (std::size_t i = 0; i < m; ++i) {
        const std::size_t idx = order[start + i];
        bx1[i] = x1[idx];
        bx2[i] = x2[idx];
        by[i] = y[idx];
      }
      // Forward.
      std::fill(pred.begin(), pred.begin() + m, model.b_out);
      for (std::size_t l = 0; l < width; ++l) {
        double* h = hidden.data() + l * batch;
        kern.affine2(model.w_command[l], model.w_speed[l], model.bias[l],
                     bx1.data(), bx2.data(), m, h);
        for (std::size_t i = 0; i < m; ++i) {
          h[i] = Sigmoid(h[i]);
        }
        kern.axpy(model.w_out[l], h, pred.data(), m);
      }
      // d(mean squared error)/d(pred).
      const double inv_m = 1.0 / static_cast<double>(m);
      double grad_b_out = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        const double e = pred[i] - by[i];
        loss += e * e;
        delta[i] = 2.0 * e * inv_m;
        grad_b_out += delta[i];
      }
      // Backward, updating unit by unit.
      for (std::size_t l = 0; l < width; ++l) {
        const double* h = hidden.data() + l * batch;
        const double grad_w_out = kern.dot(delta.data(), h, m);
        const double w_out = model.w_out[l];
        double grad_bias = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
          dh[i] = delta[i] * w_out * h[i] * (1.0 - h[i]);
          grad_bias += dh[i];
        }
        model.w_command[l] -= lr * kern.dot(dh.data(), bx1.data(), m);
        model.w_speed[l] -= lr * kern.dot(dh.data(), bx2.data(), m);
        model.bias[l] -= lr * grad_bias;
        model.w_out[l] -= lr * grad_w_out;
      }
      model.b_out -= lr * grad_b_out;
    }
    if (!std::isfinite(loss)) {
      throw Error(ErrorCode::kDiverged,
                  fmt::format("training loss non-finite at epoch {}", epoch));
    }
  }
  TrainResult result{model, Rmse(model, data)};
  if (!std::isfinite(result.rmse)) {
    throw Error(ErrorCode::kDiverged, "training produced non-finite output");
  }
  return result;
}

WidthSelection SelectHiddenDim(std::span<const CalibrationSample> data,
                               std::span<const int> widths,
                               const TrainOptions& options) {
  if (widths.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "no candidate widths");
  }
  std::vector<CalibrationSample> shuffled(data.begin(), data.end());
  std::mt19937_64 rng(options.seed ^ 0x9e3779b97f4a7c15ULL);
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  const std::size_t n_train = shuffled.size() * 4 / 5;
  if (n_train == 0 || n_train == shuffled.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "dataset too small for an 80/20 split");
  }
  const std::span<const CalibrationSample> train(shuffled.data(), n_train);
  const std::span<const CalibrationSample> valid(shuffled.data() + n_train,
                                                 shuffled.size() - n_train);
  WidthSelection selection;
  double best = 0.0;
  for (const int width : widths) {
    TrainOptions opts = options;
    opts.width = width;
    const double rmse = Rmse(TrainMlp(train, opts).model, valid);
    selection.validation_rmse.push_back(rmse);
    const bool better = selection.width == 0 || rmse < best ||
                        (rmse == best && width < selection.width);
    if (better) {
      best = rmse;
      selection.width = width;
    }
  }
  return selection;
}

std::vector<double> DefaultSpeedGrid() { return Linspace(0.0, 20.0, 1.0); }

std::vector<double> DefaultCommandGrid() { return Linspace(-1.0, 1.0, 0.05); }

CalibrationTable TabulateFunction(
    std::span<const double> speeds, std::span<const double> commands,
    const std::function<double(double, double)>& fn) {
  RequireAscending(speeds, "speed");
  RequireAscending(commands, "command");
  CalibrationTable table;
  table.speeds.assign(speeds.begin(), speeds.end());
  table.commands.assign(commands.begin(), commands.end());
  table.values.reserve(speeds.size() * commands.size());
  for (const double v : speeds) {
    for (const double u : commands) {
      table.values.push_back(fn(u, v));
    }
  }
  table.clamp_count = ClampMonotone(table);
  return table;
}

CalibrationTable BuildTable(const MlpModel& model,
                            std::span<const double> speeds,
                            std::span<const double> commands) {
  RequireAscending(speeds, "speed");
  RequireAscending(commands, "command");
  const std::size_t nc = commands.size();
  CalibrationTable table;
  table.speeds.assign(speeds.begin(), speeds.end());
  table.commands.assign(commands.begin(), commands.end());
  table.values.resize(speeds.size() * nc);
  std::vector<double> v(nc);
  for (std::size_t i = 0; i < speeds.size(); ++i) {
    std::fill(v.begin(), v.end(), speeds[i]);
    model.PredictBatch(commands, v,
                       std::span<double>(table.values.data() + i * nc, nc));
  }
  table.clamp_count = ClampMonotone(table);
  return table;
}

CalibrationTable TrueTable(const plant::VehicleParams& params,
                           std::span<const double> speeds,
                           std::span<const double> commands) {
  return TabulateFunction(speeds, commands, [&](double u, double v) {
    return plant::TrueAcceleration(u, v, params);
  });
}

double TableAcceleration(const CalibrationTable& table, double command,
                         double speed) {
  const auto [i, ts] = Bracket(table.speeds, speed);
  const auto [k, tc] = Bracket(table.commands, command);
  const std::size_t i1 = std::min(i + 1, table.speeds.size() - 1);
  const std::size_t k1 = std::min(k + 1, table.commands.size() - 1);
  const double lo = (1.0 - tc) * table.at(i, k) + tc * table.at(i, k1);
  const double hi = (1.0 - tc) * table.at(i1, k) + tc * table.at(i1, k1);
  return (1.0 - ts) * lo + ts * hi;
}

Feedforward InverseLookup(const CalibrationTable& table, double accel,
                          double speed) {
  const auto [i, ts] = Bracket(table.speeds, speed);
  const std::size_t i1 = std::min(i + 1, table.speeds.size() - 1);
  const std::size_t nc = table.commands.size();
  auto column = [&](std::size_t k) {
    return (1.0 - ts) * table.at(i, k) + ts * table.at(i1, k);
  };
  if (accel > column(nc - 1)) {
    return {table.commands.back(), true};
  }
  if (accel < column(0)) {
    return {table.commands.front(), true};
  }
  // Bisection for the first knot whose acceleration reaches accel.
  std::size_t lo = 0;
  std::size_t hi = nc - 1;
  if (column(0) >= accel) {
    return {table.commands.front(), false};
  }
  while (hi - lo > 1) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (column(mid) >= accel) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  const double a_lo = column(lo);
  const double a_hi = column(hi);
  if (a_hi == accel) {
    return {table.commands[hi], false};
  }
  const double frac = (accel - a_lo) / (a_hi - a_lo);
  return {table.commands[lo] + frac * (table.commands[hi] - table.commands[lo]),
          false};
}

void ValidateTable(const CalibrationTable& table) {
  RequireAscending(table.speeds, "speed");
  RequireAscending(table.commands, "command");
  if (table.values.size() != table.speeds.size() * table.commands.size()) {
    throw Error(ErrorCode::kInvalidArgument, "table value count mismatch");
  }
  for (std::size_t i = 0; i < table.speeds.size(); ++i) {
    for (std::size_t k = 0; k < table.commands.size(); ++k) {
      if (!std::isfinite(table.at(i, k))) {
        throw Error(ErrorCode::kInvalidArgument, "non-finite table value");
      }
      if (k > 0 && table.at(i, k) < table.at(i, k - 1)) {
        throw Error(ErrorCode::kInvalidArgument,
                    "table not monotone in command");
      }
    }
  }
}

std::string TableToCsv(const CalibrationTable& table) {
  std::string out = "speed";
  for (const double u : table.commands) {
    out += fmt::format(",{}", u);
  }
  out += '\n';
  for (std::size_t i = 0; i < table.speeds.size(); ++i) {
    out += fmt::format("{}", table.speeds[i]);
    for (std::size_t k = 0; k < table.commands.size(); ++k) {
      out += fmt::format(",{}", table.at(i, k));
    }
    out += '\n';
  }
  return out;
}

CalibrationTable TableFromCsv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  CalibrationTable table;
  auto split = [](const std::string& row) {
    std::vector<std::string> cells;
    std::stringstream ss(row);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      cells.push_back(cell);
    }
    return cells;
  };
  auto number = [](const std::string& cell) {
    try {
      std::size_t used = 0;
      const double v = std::stod(cell, &used);
      if (used != cell.size()) {
        throw std::invalid_argument(cell);
      }
      return v;
    } catch (const std::exception&) {
      throw Error(ErrorCode::kParse, "bad number in table CSV: '" + cell + "'");
    }
  };
  if (!std::getline(in, line)) {
    throw Error(ErrorCode::kParse, "table CSV is empty");
  }
  const auto header = split(line);
  if (header.size() < 2) {
    throw Error(ErrorCode::kParse, "table CSV header needs commands");
  }
  for (std::size_t k = 1; k < header.size(); ++k) {
    table.commands.push_back(number(header[k]));
  }
  while (std::getline(in, line)) {
    if (line.empty()) {
      continue;
    }
    const auto cells = split(line);
    if (cells.size() != header.size()) {
      throw Error(ErrorCode::kParse, "table CSV row has wrong column count");
    }
    table.speeds.push_back(number(cells[0]));
    for (std::size_t k = 1; k < cells.size(); ++k) {
      table.values.push_back(number(cells[k]));
    }
  }
  ValidateTable(table);
  return table;
}

std::string ModelToJson(const MlpModel& model) {
  nlohmann::json j;
  j["w_command"] = model.w_command;
  j["w_speed"] = model.w_speed;
  j["bias"] = model.bias;
  j["w_out"] = model.w_out;
  j["b_out"] = model.b_out;
  j["command_mean"] = model.command_mean;
  j["command_scale"] = model.command_scale;
  j["speed_mean"] = model.speed_mean;
  j["speed_scale"] = model.speed_scale;
  j["accel_mean"] = model.accel_mean;
  j["accel_scale"] = model.accel_scale;
  return j.dump(2) + "\n";
}

MlpModel ModelFromJson(const std::string& text) {
  MlpModel model;
  try {
    const auto j = nlohmann::json::parse(text);
    model.w_command = j.at("w_command").get<std::vector<double>>();
    model.w_speed = j.at("w_speed").get<std::vector<double>>();
    model.bias = j.at("bias").get<std::vector<double>>();
    model.w_out = j.at("w_out").get<std::vector<double>>();
    model.b_out = j.at("b_out").get<double>();
    model.command_mean = j.at("command_mean").get<double>();
    model.command_scale = j.at("command_scale").get<double>();
    model.speed_mean = j.at("speed_mean").get<double>();
    model.speed_scale = j.at("speed_scale").get<double>();
    model.accel_mean = j.at("accel_mean").get<double>();
    model.accel_scale = j.at("accel_scale").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("model JSON: ") + e.what());
  }
  const std::size_t w = model.w_out.size();
  if (w == 0 || model.w_command.size() != w || model.w_speed.size() != w ||
      model.bias.size() != w) {
    throw Error(ErrorCode::kParse, "model JSON arrays inconsistent");
  }
  return model;
}

}  // namespace autotune::calibration
