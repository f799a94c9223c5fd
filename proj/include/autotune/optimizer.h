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
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace autotune::optimizer {

enum class ParamKind { kContinuous, kInteger };

struct ParamSpec {
  std::string name;
  double lower = 0.0;
  double upper = 1.0;
  ParamKind kind = ParamKind::kContinuous;
  bool log_scale = false;  // normalized coordinate is linear in log(value)
};

using ParamSet = std::vector<double>;

/// Ordered, bounded search box.
class ParamSpace {
 public:
  ParamSpace() = default;
  /// Throws Error(kInvalidArgument) on empty, duplicate names or
  /// lower >= upper.
  explicit ParamSpace(std::vector<ParamSpec> specs);

  const std::vector<ParamSpec>& specs() const { return specs_; }
  std::size_t size() const { return specs_.size(); }
  const ParamSpec& operator[](std::size_t i) const { return specs_[i]; }
  std::optional<std::size_t> IndexOf(const std::string& name) const;

  std::vector<double> ToUnit(const ParamSet& params) const;
  /// Maps a unit-cube point into the box; integer dimensions are rounded.
  ParamSet FromUnit(const std::vector<double>& unit) const;
  bool Contains(const ParamSet& params) const;

 private:
  std::vector<ParamSpec> specs_;
};

struct HistoryEntry {
  int iteration = 0;
  ParamSet params;
  double score = 0.0;
  double timestamp = 0.0;
  bool unstable = false;  // score is a substitute for a diverged rollout
};

struct History {
  std::vector<HistoryEntry> entries;
  std::uint64_t seed = 0;

  std::size_t size() const { return entries.size(); }
  bool empty() const { return entries.empty(); }
  /// Throws Error(kInvalidArgument) on a non-finite score.
  void Append(HistoryEntry entry);
  /// Index of the highest score; the earliest wins ties.
  std::size_t BestIndex() const;
  /// Running maximum of the scores.
  std::vector<double> BestSoFar() const;
  /// Lowest score among entries not flagged unstable.
  std::optional<double> WorstStableScore() const;
};

std::string EntryToJsonLine(const HistoryEntry& entry, const ParamSpace& space,
                            std::uint64_t seed);
/// Parses line-delimited history. The seed is taken from the first line.
History HistoryFromJsonl(const std::string& text, const ParamSpace& space);

// ---------------------------------------------------------------------------
// Gaussian process surrogate.

/// Unset fields take their data-driven defaults: signal variance = label
/// variance (floored at 1e-6), noise variance = 1e-4 signal variance,
/// prior mean = label mean.
struct KernelSettings {
  double length_scale = 0.2;
  std::optional<double> signal_variance;
  std::optional<double> noise_variance;
  std::optional<double> prior_mean;
};

struct Posterior {
  double mean = 0.0;
  double variance = 0.0;
  double stddev = 0.0;
};

class GprModel {
 public:
  /// Fits on points already in the unit cube. An empty point set yields
  /// the prior. Throws Error(kSingularKernel) when the Cholesky
  /// factorization of K + noise I fails.
  static GprModel FitUnit(const std::vector<std::vector<double>>& points,
                          const std::vector<double>& labels,
                          const KernelSettings& settings = {});
  /// Throws Error(kInvalidArgument) on an empty history.
  static GprModel Fit(const History& history, const ParamSpace& space,
                      const KernelSettings& settings = {});

  Posterior PredictUnit(const double* unit) const;
  Posterior PredictUnit(const std::vector<double>& unit) const {
    return PredictUnit(unit.data());
  }

  std::size_t size() const { return n_; }
  std::size_t dims() const { return dims_; }
  double prior_mean() const { return prior_mean_; }
  double signal_variance() const { return signal_variance_; }
  double noise_variance() const { return noise_variance_; }
  double best_label() const { return best_label_; }
  /// Lower Cholesky factor, row-major n x n.
  const std::vector<double>& cholesky() const { return chol_; }

 private:
  std::size_t n_ = 0;
  std::size_t dims_ = 0;
  double length_scale_ = 0.2;
  double prior_mean_ = 0.0;
  double signal_variance_ = 1e-6;
  double noise_variance_ = 1e-10;
  double best_label_ = 0.0;
  std::vector<double> points_;  // dimension-major, points_[k * n + i]
  std::vector<double> chol_;
  std::vector<double> alpha_;   // (K + noise I)^-1 (g - mu0)
};

/// In-place lower Cholesky of a row-major SPD matrix. Returns false when a
/// pivot is not positive.
bool CholeskyInPlace(std::vector<double>& a, std::size_t n);

// ---------------------------------------------------------------------------
// Acquisitions.

enum class AcquisitionKind { kUcb, kEi, kMaxVariance };

struct Acquisition {
  AcquisitionKind kind = AcquisitionKind::kUcb;
  double kappa = 2.0;  // UCB exploration weight
  std::optional<double> incumbent;  // EI reference; defaults to best label
};

double NormalPdf(double z);
double NormalCdf(double z);

double AcquisitionValue(const Posterior& posterior, const Acquisition& acq,
                        double incumbent);
double AcquisitionValue(const GprModel& model, const std::vector<double>& unit,
                        const Acquisition& acq);

/// Scrambled Halton point: radical inverse of index + 1 in the first d
/// primes, shifted by `shift` modulo 1.
std::vector<double> HaltonPoint(std::size_t index,
                                const std::vector<double>& shift);
std::vector<double> RandomShift(std::size_t dims, std::uint64_t seed);

inline constexpr std::size_t kSuggestCandidates = 1024;
inline constexpr int kGoldenIterations = 50;

/// Best of 1024 quasi-random candidates, then one golden-section pass per
/// dimension around it. Returns a point of the box.
ParamSet SuggestNext(const GprModel& model, const ParamSpace& space,
                     const Acquisition& acq, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Tree-structured Parzen estimator.

struct TpeSettings {
  double gamma = 0.25;
  int candidates = 24;
};

/// Truncated-normal mixture on [0, 1] with one component per observation
/// plus a broad prior component.
class Parzen1d {
 public:
  explicit Parzen1d(std::vector<double> observations);

  double Density(double x) const;
  double Sample(std::mt19937_64& rng) const;

  const std::vector<double>& means() const { return means_; }
  const std::vector<double>& sigmas() const { return sigmas_; }

 private:
  std::vector<double> means_;
  std::vector<double> sigmas_;
  std::vector<double> mass_;  // truncation mass of each component on [0, 1]
};

std::size_t TpeColdStart(double gamma);

std::vector<ParamSet> TpeSuggest(const History& history,
                                 const ParamSpace& space,
                                 const TpeSettings& settings, int batch,
                                 std::uint64_t seed);

// ---------------------------------------------------------------------------
// Tuning loop.

enum class Surrogate { kGpr, kTpe };

struct TuneConfig {
  ParamSpace space;
  Surrogate surrogate = Surrogate::kGpr;
  Acquisition acquisition;
  KernelSettings kernel;
  TpeSettings tpe;
  int batch = 1;           // TPE members per round
  int budget = 60;
  int init_count = 0;      // 0 selects max(5, 2d)
  std::uint64_t seed = 0;
  std::string history_path;  // empty disables persistence
  bool resume = false;
  bool wall_clock = false;   // timestamp in seconds instead of iteration
};

int DefaultInitCount(std::size_t dims);

struct Evaluation {
  double score = 0.0;
  bool unstable = false;
};

/// Scores a parameter set. Receives the history so far.
using Evaluator = std::function<Evaluation(const ParamSet&, const History&)>;

struct TuneResult {
  History history;
  std::size_t best_index = 0;
  ParamSet best;
  double best_score = 0.0;
};

/// Seed used for the suggestion at `iteration`.
std::uint64_t IterationSeed(std::uint64_t seed, int iteration);

/// Throws Error(kEvaluationFailed) when the evaluator throws or returns a
/// non-finite score; entries evaluated so far stay in the history file.
TuneResult Tune(const TuneConfig& config, const Evaluator& evaluate);

}  // namespace autotune::optimizer
