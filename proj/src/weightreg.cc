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

#include "autotune/weightreg.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include <fmt/format.h>

#include "autotune/error.h"

namespace autotune::weightreg {
namespace {

double Penalty(std::span<const double> w, const std::vector<double>& f) {
  double s = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) {
    s += w[k] * f[k];
  }
  return s;
}

void CheckPairs(std::span<const TrajectoryPair> pairs, std::size_t m) {
  for (const auto& p : pairs) {
    if (p.demo.size() != m || p.gen.size() != m) {
      throw Error(ErrorCode::kInvalidArgument,
                  "pair feature length must equal the weight length");
    }
    for (std::size_t k = 0; k < m; ++k) {
      if (!(p.demo[k] >= 0.0) || !(p.gen[k] >= 0.0) ||
          !std::isfinite(p.demo[k]) || !std::isfinite(p.gen[k])) {
        throw Error(ErrorCode::kInvalidArgument,
                    "pair scores must be finite and >= 0");
      }
    }
  }
}

std::vector<double> Normalized(std::vector<double> w) {
  const double sum = std::accumulate(w.begin(), w.end(), 0.0);
  if (sum > 0.0) {
    for (double& x : w) {
      x /= sum;
    }
  } else {
    std::fill(w.begin(), w.end(), 1.0 / static_cast<double>(w.size()));
  }
  return w;
}

std::vector<std::string> SplitCsv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) {
    const auto b = field.find_first_not_of(" \t\r");
    const auto e = field.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? "" : field.substr(b, e - b + 1));
  }
  return out;
}

bool ParseDouble(const std::string& s, double& out) {
  try {
    std::size_t used = 0;
    out = std::stod(s, &used);
    return used == s.size();
  } catch (const std::exception&) {
    return false;
  }
}

}  // namespace

double SiameseLoss(std::span<const double> weights,
                   std::span<const TrajectoryPair> pairs, double margin) {
  if (!(margin > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "margin must be > 0");
  }
  for (const double w : weights) {
    if (!(w >= 0.0)) {
      throw Error(ErrorCode::kInvalidArgument, "weights must be >= 0");
    }
  }
  CheckPairs(pairs, weights.size());
  // Margin and differences are summed separately; w = 0 gives N * margin.
  std::size_t active = 0;
  double diff_sum = 0.0;
  for (const auto& p : pairs) {
    const double diff = Penalty(weights, p.demo) - Penalty(weights, p.gen);
    if (diff + margin > 0.0) {
      ++active;
      diff_sum += diff;
    }
  }
  return static_cast<double>(active) * margin + diff_sum;
}

WeightFit FitWeights(std::span<const TrajectoryPair> pairs,
                     const FitOptions& options) {
  if (pairs.empty()) {
    throw Error(ErrorCode::kNoPairs, "no trajectory pairs");
  }
  if (!(options.margin > 0.0) || !(options.eta0 > 0.0) ||
      options.iterations < 0) {
    throw Error(ErrorCode::kInvalidArgument,
                "margin and eta0 must be > 0, iterations >= 0");
  }
  const std::size_t m = pairs.front().demo.size();
  if (m == 0) {
    throw Error(ErrorCode::kInvalidArgument, "pairs carry no features");
  }
  CheckPairs(pairs, m);

  WeightFit fit;
  fit.margin = options.margin;
  std::vector<double> w(m, 1.0 / static_cast<double>(m));
  fit.weights = w;
  fit.loss = SiameseLoss(w, pairs, options.margin);
  if (fit.loss > 0.0 && options.seed != 0) {
    std::mt19937_64 rng(options.seed);
    std::uniform_real_distribution<double> jitter(0.5, 1.5);
    for (double& x : w) {
      x *= jitter(rng);
    }
  }

  std::vector<double> grad(m);
  for (int t = 0; t < options.iterations && fit.loss > 0.0; ++t) {
    std::fill(grad.begin(), grad.end(), 0.0);
    bool any = false;
    for (const auto& p : pairs) {
      if (Penalty(w, p.demo) - Penalty(w, p.gen) + options.margin > 0.0) {
        any = true;
        for (std::size_t k = 0; k < m; ++k) {
          grad[k] += p.demo[k] - p.gen[k];
        }
      }
    }
    fit.iterations = t + 1;
    if (!any || std::all_of(grad.begin(), grad.end(),
                            [](double g) { return g == 0.0; })) {
      fit.best_loss.push_back(fit.loss);
      break;
    }
    ++fit.productive_steps;
    const double eta = options.eta0 / std::sqrt(static_cast<double>(t) + 1.0);
    for (std::size_t k = 0; k < m; ++k) {
      w[k] = std::max(0.0, w[k] - eta * grad[k]);
    }
    const auto candidate = Normalized(w);
    const double loss = SiameseLoss(candidate, pairs, options.margin);
    if (loss < fit.loss) {
      fit.loss = loss;
      fit.weights = candidate;
    }
    fit.best_loss.push_back(fit.loss);
  }
  fit.separable = fit.loss == 0.0;
  return fit;
}

std::vector<TrajectoryPair> PairsFromCsv(const std::string& text,
                                         std::size_t metric_count) {
  std::vector<TrajectoryPair> pairs;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) {
      continue;
    }
    const auto fields = SplitCsv(line);
    double probe = 0.0;
    if (pairs.empty() && fields.size() > 1 && !ParseDouble(fields[1], probe)) {
      continue;  // header
    }
    if (fields.size() < 3 || (fields.size() - 1) % 2 != 0) {
      throw Error(ErrorCode::kParse,
                  fmt::format("pairs line {}: expected scenario plus an even "
                              "number of scores",
                              line_no));
    }
    const std::size_t m = (fields.size() - 1) / 2;
    if (metric_count == 0) {
      metric_count = m;
    }
    if (m != metric_count) {
      throw Error(ErrorCode::kParse,
                  fmt::format("pairs line {}: {} metrics, expected {}", line_no,
                              m, metric_count));
    }
    TrajectoryPair p;
    p.scenario = fields[0];
    for (std::size_t k = 0; k < 2 * m; ++k) {
      double v = 0.0;
      if (!ParseDouble(fields[1 + k], v)) {
        throw Error(ErrorCode::kParse,
                    fmt::format("pairs line {}: bad number '{}'", line_no,
                                fields[1 + k]));
      }
      (k < m ? p.demo : p.gen).push_back(v);
    }
    pairs.push_back(std::move(p));
  }
  CheckPairs(pairs, metric_count);
  return pairs;
}

std::string PairsToCsv(std::span<const TrajectoryPair> pairs,
                       std::span<const std::string> metric_names) {
  std::string out = "scenario";
  for (const auto& n : metric_names) {
    out += ",demo_" + n;
  }
  for (const auto& n : metric_names) {
    out += ",gen_" + n;
  }
  out += "\n";
  for (const auto& p : pairs) {
    out += p.scenario;
    for (const double v : p.demo) {
      out += fmt::format(",{}", v);
    }
    for (const double v : p.gen) {
      out += fmt::format(",{}", v);
    }
    out += "\n";
  }
  return out;
}

grading::Weights ToGradingWeights(std::span<const double> weights,
                                  std::span<const std::string> metric_names) {
  if (weights.size() != metric_names.size()) {
    throw Error(ErrorCode::kWeightMismatch,
                "weight count differs from the metric registry");
  }
  grading::Weights out;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    out[metric_names[k]] = weights[k];
  }
  return out;
}

}  // namespace autotune::weightreg
