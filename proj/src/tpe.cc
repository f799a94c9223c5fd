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
#include <numeric>

#include "autotune/error.h"
#include "autotune/optimizer.h"

namespace autotune::optimizer {
namespace {

constexpr double kPriorMean = 0.5;
constexpr double kPriorSigma = 1.0;

double TruncatedMass(double mean, double sigma) {
  return NormalCdf((1.0 - mean) / sigma) - NormalCdf((0.0 - mean) / sigma);
}

ParamSet UniformPoint(const ParamSpace& space, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> unit(space.size());
  for (double& x : unit) {
    x = u(rng);
  }
  return space.FromUnit(unit);
}

bool Contains(const std::vector<ParamSet>& sets, const ParamSet& p) {
  return std::find(sets.begin(), sets.end(), p) != sets.end();
}

}  // namespace

Parzen1d::Parzen1d(std::vector<double> observations) {
  std::sort(observations.begin(), observations.end());
  const std::size_t n = observations.size();
  const double min_sigma =
      kPriorSigma / std::min(100.0, 1.0 + static_cast<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const double left = i == 0 ? observations[i] : observations[i] - observations[i - 1];
    const double right =
        i + 1 == n ? 1.0 - observations[i] : observations[i + 1] - observations[i];
    means_.push_back(observations[i]);
    sigmas_.push_back(std::clamp(std::max(left, right), min_sigma, kPriorSigma));
  }
  means_.push_back(kPriorMean);
  sigmas_.push_back(kPriorSigma);
  for (std::size_t i = 0; i < means_.size(); ++i) {
    mass_.push_back(TruncatedMass(means_[i], sigmas_[i]));
  }
}

double Parzen1d::Density(double x) const {
  if (x < 0.0 || x > 1.0) {
    return 0.0;
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < means_.size(); ++i) {
    sum += NormalPdf((x - means_[i]) / sigmas_[i]) / (sigmas_[i] * mass_[i]);
  }
  return sum / static_cast<double>(means_.size());
}

double Parzen1d::Sample(std::mt19937_64& rng) const {
  std::uniform_int_distribution<std::size_t> pick(0, means_.size() - 1);
  const std::size_t c = pick(rng);
  std::normal_distribution<double> normal(means_[c], sigmas_[c]);
  for (int attempt = 0; attempt < 100; ++attempt) {
    const double x = normal(rng);
    if (x >= 0.0 && x <= 1.0) {
      return x;
    }
  }
  return std::clamp(means_[c], 0.0, 1.0);
}

std::size_t TpeColdStart(double gamma) {
  return std::max<std::size_t>(8, static_cast<std::size_t>(std::ceil(2.0 / gamma)));
}

std::vector<ParamSet> TpeSuggest(const History& history,
                                 const ParamSpace& space,
                                 const TpeSettings& settings, int batch,
                                 std::uint64_t seed) {
  if (!(settings.gamma > 0.0 && settings.gamma < 1.0) ||
      settings.candidates < 1 || batch < 1) {
    throw Error(ErrorCode::kInvalidArgument,
                "TPE needs 0 < gamma < 1, candidates >= 1, batch >= 1");
  }
  std::mt19937_64 rng(seed);
  std::vector<ParamSet> out;
  const auto fill_uniform = [&] {
    for (int attempt = 0; static_cast<int>(out.size()) < batch; ++attempt) {
      ParamSet p = UniformPoint(space, rng);
      if (!Contains(out, p) || attempt > 1000) {
        out.push_back(std::move(p));
      }
    }
  };
  if (history.size() < TpeColdStart(settings.gamma)) {
    fill_uniform();
    return out;
  }

  std::vector<std::size_t> order(history.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return history.entries[a].score > history.entries[b].score;
  });
  const std::size_t n_good = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::ceil(settings.gamma * history.size())));

  const std::size_t d = space.size();
  std::vector<Parzen1d> good;
  std::vector<Parzen1d> bad;
  for (std::size_t k = 0; k < d; ++k) {
    std::vector<double> g;
    std::vector<double> b;
    for (std::size_t r = 0; r < order.size(); ++r) {
      const double u = space.ToUnit(history.entries[order[r]].params)[k];
      (r < n_good ? g : b).push_back(std::clamp(u, 0.0, 1.0));
    }
    good.emplace_back(std::move(g));
    bad.emplace_back(std::move(b));
  }

  for (int member = 0; member < batch; ++member) {
    std::mt19937_64 member_rng(seed + 0x9E3779B97F4A7C15ULL * (member + 1));
    struct Candidate {
      double score;
      ParamSet params;
    };
    std::vector<Candidate> candidates;
    for (int c = 0; c < settings.candidates; ++c) {
      std::vector<double> unit(d);
      double score = 0.0;
      for (std::size_t k = 0; k < d; ++k) {
        unit[k] = good[k].Sample(member_rng);
        score += std::log(good[k].Density(unit[k])) -
                 std::log(bad[k].Density(unit[k]));
      }
      candidates.push_back({score, space.FromUnit(unit)});
    }
    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const Candidate& a, const Candidate& b) {
                       return a.score > b.score;
                     });
    bool placed = false;
    for (auto& c : candidates) {
      if (!Contains(out, c.params)) {
        out.push_back(std::move(c.params));
        placed = true;
        break;
      }
    }
    if (!placed) {
      fill_uniform();
      break;
    }
  }
  return out;
}

}  // namespace autotune::optimizer
