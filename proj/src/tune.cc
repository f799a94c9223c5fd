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

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "autotune/error.h"
#include "autotune/optimizer.h"

namespace autotune::optimizer {
namespace {

std::uint64_t SplitMix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::kIo, "cannot read " + path);
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

int DefaultInitCount(std::size_t dims) {
  return std::max(5, 2 * static_cast<int>(dims));
}

std::uint64_t IterationSeed(std::uint64_t seed, int iteration) {
  return SplitMix64(SplitMix64(seed) ^ static_cast<std::uint64_t>(iteration));
}

TuneResult Tune(const TuneConfig& config, const Evaluator& evaluate) {
  const ParamSpace& space = config.space;
  if (space.size() == 0) {
    throw Error(ErrorCode::kInvalidArgument, "tune needs a parameter space");
  }
  const int init_count = config.init_count > 0
                             ? config.init_count
                             : DefaultInitCount(space.size());
  if (config.budget < 1) {
    throw Error(ErrorCode::kInvalidArgument, "budget must be >= 1");
  }
  if (config.batch < 1) {
    throw Error(ErrorCode::kInvalidArgument, "batch must be >= 1");
  }

  History history;
  history.seed = config.seed;
  std::ofstream out;
  if (!config.history_path.empty()) {
    const bool resume =
        config.resume && std::filesystem::exists(config.history_path);
    if (resume) {
      history = HistoryFromJsonl(ReadFile(config.history_path), space);
      if (history.empty()) {
        history.seed = config.seed;
      }
    }
    out.open(config.history_path,
             resume ? std::ios::binary | std::ios::app
                    : std::ios::binary | std::ios::trunc);
    if (!out) {
      throw Error(ErrorCode::kIo, "cannot write " + config.history_path);
    }
  }

  const std::uint64_t seed = history.seed;
  const auto shift = RandomShift(space.size(), seed);
  const auto start = std::chrono::steady_clock::now();

  while (static_cast<int>(history.size()) < config.budget) {
    const int i = static_cast<int>(history.size());
    std::vector<ParamSet> round;
    if (i < init_count) {
      round.push_back(space.FromUnit(HaltonPoint(i, shift)));
    } else if (config.surrogate == Surrogate::kGpr) {
      const GprModel model = GprModel::Fit(history, space, config.kernel);
      round.push_back(
          SuggestNext(model, space, config.acquisition, IterationSeed(seed, i)));
    } else {
      const int k = std::min(config.batch, config.budget - i);
      round = TpeSuggest(history, space, config.tpe, k, IterationSeed(seed, i));
    }

    for (const ParamSet& params : round) {
      Evaluation eval;
      try {
        eval = evaluate(params, history);
      } catch (const std::exception& e) {
        throw Error(ErrorCode::kEvaluationFailed,
                    "iteration " + std::to_string(history.size()) + ": " +
                        e.what());
      }
      if (!std::isfinite(eval.score)) {
        throw Error(ErrorCode::kEvaluationFailed,
                    "iteration " + std::to_string(history.size()) +
                        " returned a non-finite score");
      }
      HistoryEntry entry;
      entry.iteration = static_cast<int>(history.size());
      entry.params = params;
      entry.score = eval.score;
      entry.unstable = eval.unstable;
      entry.timestamp =
          config.wall_clock
              ? std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                              start)
                    .count()
              : static_cast<double>(entry.iteration);
      if (out.is_open()) {
        out << EntryToJsonLine(entry, space, seed);
        out.flush();
      }
      history.Append(std::move(entry));
    }
  }

  TuneResult result;
  result.best_index = history.BestIndex();
  result.best = history.entries[result.best_index].params;
  result.best_score = history.entries[result.best_index].score;
  result.history = std::move(history);
  return result;
}

}  // namespace autotune::optimizer
