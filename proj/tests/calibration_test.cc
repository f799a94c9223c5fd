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

#include <gtest/gtest.h>

#include "autotune/calibration.h"
#include "autotune/error.h"
#include "test_util.h"

namespace autotune::calibration {
namespace {

using testing::Gen;

std::vector<CalibrationSample> LinearData(int n, std::uint64_t seed) {
  Gen gen(seed);
  std::vector<CalibrationSample> data;
  for (int i = 0; i < n; ++i) {
    const double u = gen.Uniform(-1, 1);
    data.push_back({u, gen.Uniform(0, 20), 2.0 * u});
  }
  return data;
}

TEST(Sigmoid, ZeroIsHalf) { EXPECT_EQ(Sigmoid(0.0), 0.5); }

TEST(Sigmoid, StaysInOpenInterval) {
  Gen gen(21);
  for (int c = 0; c < testing::kPropertyCases; ++c) {
    const double s = Sigmoid(gen.Uniform(-30, 30));
    EXPECT_GT(s, 0.0);
    EXPECT_LT(s, 1.0);
  }
}

TEST(CollectData, IdleFromRestIsAllZero) {
  const auto p = plant::DefaultVehicleParams();
  const std::vector<Segment> schedule = {{0.0, 1.0}};
  const auto data = CollectData(p, schedule);
  ASSERT_EQ(data.size(), 40u);  // 100 steps minus a 3 T_lon = 60-step skip
  for (const auto& s : data) {
    EXPECT_EQ(s.accel, 0.0);
    EXPECT_EQ(s.speed, 0.0);
  }
}

TEST(CollectData, CountIsStepsAfterSkips) {
  const auto p = plant::DefaultVehicleParams();
  const std::vector<Segment> schedule = {{0.5, 2.0}, {0.2, 1.5}, {0.0, 0.5}};
  EXPECT_EQ(CollectData(p, schedule).size(), (200u - 60) + (150u - 60));
}

TEST(CollectData, DefaultSweepHasBrakingSamplesAtSpeed) {
  const auto p = plant::DefaultVehicleParams();
  const auto data = CollectData(p, DefaultSweep(p));
  const auto braking = std::count_if(data.begin(), data.end(), [](const auto& s) {
    return s.command < 0.0 && s.accel < 0.0 && s.speed > 0.0;
  });
  EXPECT_GT(braking, 100);
  for (const auto& s : data) {
    ASSERT_TRUE(std::isfinite(s.accel));
    ASSERT_GE(s.speed, 0.0);
  }
}

TEST(CollectData, LabelsMatchTheDrivetrainMap) {
  const auto p = plant::DefaultVehicleParams();
  const auto data = CollectData(p, DefaultSweep(p));
  double worst = 0.0;
  for (const auto& s : data) {
    worst = std::max(worst,
                     std::abs(s.accel - plant::TrueAcceleration(s.command, s.speed, p)));
  }
  EXPECT_LT(worst, 1e-9);
}

TEST(CollectData, Errors) {
  const auto p = plant::DefaultVehicleParams();
  const std::vector<Segment> short_hold = {{0.3, 0.2}};
  try {
    CollectData(p, short_hold);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyDataset);
  }
  const std::vector<Segment> bad = {{1.5, 1.0}};
  EXPECT_THROW(CollectData(p, bad), Error);
  EXPECT_THROW(CollectData(p, {}), Error);
}

TEST(TrainMlp, LearnsLinearMap) {
  const auto data = LinearData(400, 22);
  TrainOptions opts;
  opts.width = 4;
  opts.epochs = 1500;
  opts.seed = 3;
  const auto result = TrainMlp(data, opts);
  double worst = 0.0;
  for (const auto& s : data) {
    worst = std::max(worst, std::abs(result.model.Predict(s.command, s.speed) - s.accel));
  }
  EXPECT_LT(worst, 0.05);
}

TEST(TrainMlp, SameSeedSameModel) {
  const auto data = LinearData(200, 23);
  TrainOptions opts;
  opts.width = 4;
  opts.epochs = 50;
  opts.seed = 9;
  const auto a = TrainMlp(data, opts).model;
  const auto b = TrainMlp(data, opts).model;
  EXPECT_EQ(a.w_command, b.w_command);
  EXPECT_EQ(a.w_speed, b.w_speed);
  EXPECT_EQ(a.bias, b.bias);
  EXPECT_EQ(a.w_out, b.w_out);
  EXPECT_EQ(a.b_out, b.b_out);
}

TEST(TrainMlp, NeedsTenSamplesPerUnit) {
  const auto data = LinearData(39, 24);
  TrainOptions opts;
  opts.width = 4;
  EXPECT_THROW(TrainMlp(data, opts), Error);
}

TEST(TrainMlp, HugeLearningRateDiverges) {
  auto data = LinearData(200, 25);
  for (auto& s : data) {
    s.accel = s.command > 0 ? 1e6 : -1e6;
  }
  TrainOptions opts;
  opts.width = 4;
  opts.epochs = 200;
  opts.learning_rate = 1e12;
  try {
    TrainMlp(data, opts);
    FAIL() << "expected divergence";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDiverged);
  }
}

TEST(MlpModel, BatchMatchesSinglePredictions) {
  const auto data = LinearData(200, 26);
  TrainOptions opts;
  opts.width = 8;
  opts.epochs = 20;
  const auto model = TrainMlp(data, opts).model;
  std::vector<double> u, v, out(data.size());
  for (const auto& s : data) {
    u.push_back(s.command);
    v.push_back(s.speed);
  }
  model.PredictBatch(u, v, out);
  for (std::size_t i = 0; i < data.size(); ++i) {
    EXPECT_NEAR(out[i], model.Predict(u[i], v[i]), 1e-12);
  }
}

TEST(SelectHiddenDim, SingleCandidate) {
  const auto data = LinearData(200, 27);
  TrainOptions opts;
  opts.epochs = 20;
  const std::vector<int> widths = {8};
  EXPECT_EQ(SelectHiddenDim(data, widths, opts).width, 8);
}

TEST(SelectHiddenDim, PicksLowestValidationError) {
  const auto p = plant::DefaultVehicleParams();
  auto data = CollectData(p, DefaultSweep(p));
  // thin the dataset to keep the enumeration quick
  std::vector<CalibrationSample> thin;
  for (std::size_t i = 0; i < data.size(); i += 10) {
    thin.push_back(data[i]);
  }
  TrainOptions opts;
  opts.epochs = 60;
  const std::vector<int> widths = {1, 8};
  const auto sel = SelectHiddenDim(thin, widths, opts);
  ASSERT_EQ(sel.validation_rmse.size(), 2u);
  const int expected = sel.validation_rmse[1] < sel.validation_rmse[0] ? 8 : 1;
  EXPECT_EQ(sel.width, expected);
}

TEST(SelectHiddenDim, TieGoesToSmallerWidth) {
  const auto data = LinearData(200, 28);
  TrainOptions opts;
  opts.epochs = 5;
  const std::vector<int> widths = {4, 4};
  const auto sel = SelectHiddenDim(data, widths, opts);
  EXPECT_EQ(sel.validation_rmse[0], sel.validation_rmse[1]);
  EXPECT_EQ(sel.width, 4);
}

TEST(Table, LinearFunctionHasNoClamps) {
  const auto speeds = DefaultSpeedGrid();
  const auto commands = DefaultCommandGrid();
  const auto t = TabulateFunction(speeds, commands, [](double u, double) { return 2.0 * u; });
  EXPECT_EQ(t.clamp_count, 0);
  for (std::size_t i = 0; i < speeds.size(); ++i) {
    for (std::size_t k = 0; k < commands.size(); ++k) {
      EXPECT_EQ(t.at(i, k), 2.0 * commands[k]);
    }
  }
}

TEST(Table, TrainedLinearModelTabulatesLinearly) {
  const auto data = LinearData(400, 29);
  TrainOptions opts;
  opts.width = 4;
  opts.epochs = 1500;
  opts.seed = 3;
  const auto model = TrainMlp(data, opts).model;
  const auto speeds = DefaultSpeedGrid();
  const auto commands = DefaultCommandGrid();
  const auto t = BuildTable(model, speeds, commands);
  for (std::size_t i = 0; i < speeds.size(); ++i) {
    for (std::size_t k = 0; k < commands.size(); ++k) {
      EXPECT_NEAR(t.at(i, k), 2.0 * commands[k], 0.05);
    }
  }
}

TEST(Table, SingleCellEqualsForwardPass) {
  const auto data = LinearData(200, 30);
  TrainOptions opts;
  opts.epochs = 10;
  const auto model = TrainMlp(data, opts).model;
  const std::vector<double> s = {7.0};
  const std::vector<double> c = {0.3};
  const auto t = BuildTable(model, s, c);
  ASSERT_EQ(t.values.size(), 1u);
  EXPECT_DOUBLE_EQ(t.values[0], model.Predict(0.3, 7.0));
}

TEST(Table, RippleIsClampedMonotone) {
  const auto speeds = DefaultSpeedGrid();
  const auto commands = DefaultCommandGrid();
  const auto t = TabulateFunction(speeds, commands, [](double u, double v) {
    return u + 0.2 * std::sin(25.0 * u + v);
  });
  EXPECT_GT(t.clamp_count, 0);
  for (std::size_t i = 0; i < speeds.size(); ++i) {
    for (std::size_t k = 1; k < commands.size(); ++k) {
      EXPECT_GE(t.at(i, k), t.at(i, k - 1));
    }
  }
  EXPECT_NO_THROW(ValidateTable(t));
}

class InverseLookupTest : public ::testing::Test {
 protected:
  plant::VehicleParams p_ = plant::DefaultVehicleParams();
  std::vector<double> speeds_ = DefaultSpeedGrid();
  std::vector<double> commands_ = DefaultCommandGrid();
  CalibrationTable table_ = TrueTable(p_, speeds_, commands_);
};

TEST_F(InverseLookupTest, HalfThrottleRoundTrip) {
  const auto ff = InverseLookup(table_, plant::TrueAcceleration(0.5, 10.0, p_), 10.0);
  EXPECT_NEAR(ff.command, 0.5, 0.02);
  EXPECT_FALSE(ff.saturated);
}

TEST_F(InverseLookupTest, SaturatesOutsideColumn) {
  const auto hi = InverseLookup(table_, 100.0, 10.0);
  EXPECT_EQ(hi.command, 1.0);
  EXPECT_TRUE(hi.saturated);
  const auto lo = InverseLookup(table_, -100.0, 10.0);
  EXPECT_EQ(lo.command, -1.0);
  EXPECT_TRUE(lo.saturated);
}

TEST_F(InverseLookupTest, KnotsAreReproducedExactly) {
  for (const std::size_t i : {0u, 5u, 12u, 20u}) {
    for (const std::size_t k : {1u, 10u, 20u, 33u, 39u}) {
      const auto ff = InverseLookup(table_, table_.at(i, k), speeds_[i]);
      EXPECT_EQ(ff.command, commands_[k]) << "i=" << i << " k=" << k;
    }
  }
}

TEST_F(InverseLookupTest, RoundTripOnInteriorGrid) {
  for (std::size_t i = 1; i + 1 < speeds_.size(); ++i) {
    for (std::size_t k = 1; k + 1 < commands_.size(); ++k) {
      const double a = plant::TrueAcceleration(commands_[k], speeds_[i], p_);
      EXPECT_LT(std::abs(InverseLookup(table_, a, speeds_[i]).command - commands_[k]), 0.02);
    }
  }
}

TEST_F(InverseLookupTest, MonotoneInAcceleration) {
  Gen gen(31);
  for (int c = 0; c < testing::kPropertyCases; ++c) {
    const double v = gen.Uniform(0, 20);
    const double a1 = gen.Uniform(-8, 6);
    const double a2 = a1 + gen.Uniform(0, 2);
    EXPECT_LE(InverseLookup(table_, a1, v).command, InverseLookup(table_, a2, v).command);
  }
}

TEST_F(InverseLookupTest, ForwardLookupInterpolatesKnots) {
  EXPECT_DOUBLE_EQ(TableAcceleration(table_, commands_[30], speeds_[4]), table_.at(4, 30));
}

TEST_F(InverseLookupTest, CsvRoundTripIsExact) {
  const auto back = TableFromCsv(TableToCsv(table_));
  EXPECT_EQ(back.speeds, table_.speeds);
  EXPECT_EQ(back.commands, table_.commands);
  EXPECT_EQ(back.values, table_.values);
}

TEST(TableCsv, RejectsGarbage) {
  EXPECT_THROW(TableFromCsv("speed,a,b\n1,2\n"), Error);
  EXPECT_THROW(TableFromCsv(""), Error);
}

TEST(ModelJson, RoundTripIsExact) {
  const auto data = LinearData(200, 32);
  TrainOptions opts;
  opts.epochs = 10;
  const auto model = TrainMlp(data, opts).model;
  const auto back = ModelFromJson(ModelToJson(model));
  Gen gen(33);
  for (int c = 0; c < 20; ++c) {
    const double u = gen.Uniform(-1, 1), v = gen.Uniform(0, 20);
    EXPECT_EQ(back.Predict(u, v), model.Predict(u, v));
  }
}

}  // namespace
}  // namespace autotune::calibration
