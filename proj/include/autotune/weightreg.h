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
#include <span>
#include <string>
#include <vector>

#include "autotune/grading.h"

namespace autotune::weightreg {

/// Per-metric penalty scores of a demonstration and of a generated
/// trajectory on the same scenario.
struct TrajectoryPair {
  std::string scenario;
  std::vector<double> demo;
  std::vector<double> gen;
};

struct FitOptions {
  double margin = 0.01;
  double eta0 = 0.1;  // step size eta0 / sqrt(t + 1)
  int iterations = 2000;
  std::uint64_t seed = 0;
};

struct WeightFit {
  std::vector<double> weights;  // non-negative, sums to 1
  double margin = 0.01;
  double loss = 0.0;            // loss of `weights`
  int iterations = 0;
  int productive_steps = 0;     // steps with a non-zero subgradient
  bool separable = false;       // loss reached 0
  std::vector<double> best_loss;  // best loss after each step
};

/// sum_j max(w.demo_j - w.gen_j + margin, 0).
double SiameseLoss(std::span<const double> weights,
                   std::span<const TrajectoryPair> pairs, double margin);

/// Projected subgradient descent from the uniform vector. Throws
/// Error(kNoPairs) on empty input.
WeightFit FitWeights(std::span<const TrajectoryPair> pairs,
                     const FitOptions& options = {});

/// Rows "scenario,demo_1..demo_M,gen_1..gen_M" with an optional header.
/// metric_count = 0 infers M from the column count.
std::vector<TrajectoryPair> PairsFromCsv(const std::string& text,
                                         std::size_t metric_count = 0);
std::string PairsToCsv(std::span<const TrajectoryPair> pairs,
                       std::span<const std::string> metric_names);

grading::Weights ToGradingWeights(std::span<const double> weights,
                                  std::span<const std::string> metric_names);

}  // namespace autotune::weightreg
