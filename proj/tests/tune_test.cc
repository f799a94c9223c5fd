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

#include <gtest/gtest.h>

#include "autotune/error.h"
#include "autotune/optimizer.h"
#include "test_util.h"

namespace autotune::optimizer {
namespace {

using testing::Gen;

const ParamSpace kSpace({{"x", -1, 2}, {"y", 0, 4}});

Evaluation Bowl(const ParamSet& p, const History&) {
  return {-(p[0] - 0.7) * (p[0] - 0.7) - 0.5 * (p[1] - 1.1) * (p[1] - 1.1), false};
}

std::string TempPath(const std::string& name) {
  return (std::filesystem::temp_directory_path() /
          ("autotune_tune_test_" + name + ".jsonl"))
      .string();
}

std::string Slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TEST(History, BestIndexPrefersEarliest) {
  History h;
  h.Append({0, {0.0}, -1.0});
  h.Append({1, {0.1}, -0.5});
  h.Append({2, {0.2}, -0.5});
  EXPECT_EQ(h.BestIndex(), 1u);
  EXPECT_EQ(h.BestSoFar(), (std::vector<double>{-1.0, -0.5, -0.5}));
  EXPECT_THROW(h.Append({3, {0.0}, NAN}), Error);
}

TEST(History, WorstStableSkipsSubstitutes) {
  History h;
  EXPECT_FALSE(h.WorstStableScore());
  h.Append({0, {0.0}, -2.0});
  h.Append({1, {0.0}, -20.0, 0.0, true});
  EXPECT_EQ(*h.WorstStableScore(), -2.0);
}

TEST(Jsonl, RoundTripIsExact) {
  Gen gen(91);
  std::string text;
  History h;
  h.seed = 0xDEADBEEFCAFEULL;
  for (int i = 0; i < 10; ++i) {
    HistoryEntry e{i, kSpace.FromUnit(gen.Vector(2, 0, 1)), gen.Uniform(-3, 0),
                   static_cast<double>(i), gen.Bool()};
    text += EntryToJsonLine(e, kSpace, h.seed);
    h.Append(e);
  }
  const History back = HistoryFromJsonl(text, kSpace);
  EXPECT_EQ(back.seed, h.seed);
  ASSERT_EQ(back.size(), h.size());
  for (std::size_t i = 0; i < h.size(); ++i) {
    EXPECT_EQ(back.entries[i].params, h.entries[i].params);
    EXPECT_EQ(back.entries[i].score, h.entries[i].score);
    EXPECT_EQ(back.entries[i].unstable, h.entries[i].unstable);
    EXPECT_EQ(back.entries[i].iteration, h.entries[i].iteration);
  }
}

TEST(Jsonl, LineHasNamedParams) {
  const std::string line = EntryToJsonLine({3, {0.5, 2.0}, -1.0, 3.0}, kSpace, 7);
  EXPECT_EQ(line.back(), '\n');
  for (const char* key : {"\"iteration\"", "\"params\"", "\"x\"", "\"y\"", "\"score\"",
                          "\"timestamp\"", "\"unstable\"", "\"seed\""}) {
    EXPECT_NE(line.find(key), std::string::npos) << key;
  }
  EXPECT_THROW(HistoryFromJsonl("{\"iteration\": 0}\n", kSpace), Error);
}

TEST(Tune, BudgetEqualToInitIsHaltonOnly) {
  TuneConfig cfg;
  cfg.space = kSpace;
  cfg.budget = DefaultInitCount(2);
  cfg.seed = 5;
  const auto r = Tune(cfg, Bowl);
  ASSERT_EQ(r.history.size(), 5u);
  const auto shift = RandomShift(2, 5);
  for (int i = 0; i < 5; ++i) {
    EXPECT_EQ(r.history.entries[i].params, kSpace.FromUnit(HaltonPoint(i, shift)));
    EXPECT_EQ(r.history.entries[i].timestamp, i);
  }
}

TEST(Tune, DefaultInitCount) {
  EXPECT_EQ(DefaultInitCount(1), 5);
  EXPECT_EQ(DefaultInitCount(11), 22);
}

TEST(Tune, SameSeedSameRun) {
  for (const auto surrogate : {Surrogate::kGpr, Surrogate::kTpe}) {
    TuneConfig cfg;
    cfg.space = kSpace;
    cfg.budget = 20;
    cfg.seed = 11;
    cfg.surrogate = surrogate;
    const auto a = Tune(cfg, Bowl);
    const auto b = Tune(cfg, Bowl);
    for (std::size_t i = 0; i < a.history.size(); ++i) {
      EXPECT_EQ(a.history.entries[i].params, b.history.entries[i].params);
    }
  }
}

TEST(Tune, ResumeReproducesUninterruptedRun) {
  const std::string full_path = TempPath("full");
  const std::string part_path = TempPath("part");
  TuneConfig cfg;
  cfg.space = kSpace;
  cfg.seed = 21;
  cfg.budget = 16;
  cfg.history_path = full_path;
  const auto full = Tune(cfg, Bowl);

  cfg.history_path = part_path;
  cfg.budget = 9;
  Tune(cfg, Bowl);
  cfg.budget = 16;
  cfg.resume = true;
  cfg.seed = 999;  // the file's seed wins
  const auto resumed = Tune(cfg, Bowl);
  ASSERT_EQ(resumed.history.size(), 16u);
  EXPECT_EQ(resumed.history.seed, 21u);
  for (std::size_t i = 0; i < 16; ++i) {
    EXPECT_EQ(resumed.history.entries[i].params, full.history.entries[i].params) << i;
  }
  EXPECT_EQ(Slurp(full_path), Slurp(part_path));
  std::filesystem::remove(full_path);
  std::filesystem::remove(part_path);
}

TEST(Tune, FailedEvaluationKeepsPartialHistory) {
  const std::string path = TempPath("fail");
  TuneConfig cfg;
  cfg.space = kSpace;
  cfg.budget = 20;
  cfg.history_path = path;
  const Evaluator flaky = [](const ParamSet& p, const History& h) {
    if (h.size() == 7) {
      throw std::runtime_error("boom");
    }
    return Bowl(p, h);
  };
  try {
    Tune(cfg, flaky);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEvaluationFailed);
  }
  EXPECT_EQ(HistoryFromJsonl(Slurp(path), kSpace).size(), 7u);

  const Evaluator nan = [](const ParamSet&, const History&) {
    return Evaluation{NAN, false};
  };
  EXPECT_THROW(Tune(cfg, nan), Error);
  std::filesystem::remove(path);
}

TEST(Tune, BestSoFarIsMonotone) {
  Gen gen(92);
  for (int c = 0; c < 10; ++c) {
    TuneConfig cfg;
    cfg.space = kSpace;
    cfg.budget = 15;
    cfg.seed = gen.Int(0, 1 << 30);
    cfg.surrogate = gen.Bool() ? Surrogate::kGpr : Surrogate::kTpe;
    cfg.batch = gen.Int(1, 3);
    const auto r = Tune(cfg, Bowl);
    const auto best = r.history.BestSoFar();
    EXPECT_TRUE(std::is_sorted(best.begin(), best.end()));
    EXPECT_EQ(best.back(), r.best_score);
    EXPECT_EQ(r.history.size(), 15u);
  }
}

TEST(Tune, GprBeatsRandomSearch) {
  std::vector<double> gpr, random;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    TuneConfig cfg;
    cfg.space = kSpace;
    cfg.budget = 30;
    cfg.seed = seed;
    gpr.push_back(Tune(cfg, Bowl).best_score);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0, 1);
    double best = -1e300;
    for (int i = 0; i < 30; ++i) {
      best = std::max(best, Bowl(kSpace.FromUnit({u(rng), u(rng)}), {}).score);
    }
    random.push_back(best);
  }
  std::sort(gpr.begin(), gpr.end());
  std::sort(random.begin(), random.end());
  EXPECT_GT(gpr[2], random[2]);
  EXPECT_GT(gpr[2], -1e-3);
}

TEST(Tune, SeedsDifferPerIteration) {
  EXPECT_NE(IterationSeed(1, 0), IterationSeed(1, 1));
  EXPECT_NE(IterationSeed(1, 0), IterationSeed(2, 0));
  EXPECT_EQ(IterationSeed(3, 4), IterationSeed(3, 4));
}

TEST(Tune, RejectsBadConfig) {
  TuneConfig cfg;
  cfg.space = kSpace;
  cfg.budget = 0;
  EXPECT_THROW(Tune(cfg, Bowl), Error);
}

}  // namespace
}  // namespace autotune::optimizer
