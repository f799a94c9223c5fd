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
#include <limits>
#include <numbers>
#include <set>

#include "autotune/error.h"
#include "autotune/optimizer.h"
#include "autotune/simd.h"
#include "json.hpp"

namespace autotune::optimizer {
namespace {

using nlohmann::ordered_json;

constexpr double kSignalFloor = 1e-6;
constexpr double kNoiseRatio = 1e-4;

constexpr unsigned kPrimes[] = {2,  3,  5,  7,  11, 13, 17, 19, 23, 29, 31,
                                37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79};

double RadicalInverse(std::size_t index, unsigned base) {
  double result = 0.0;
  double f = 1.0 / base;
  while (index > 0) {
    result += f * static_cast<double>(index % base);
    index /= base;
    f /= base;
  }
  return result;
}

}  // namespace

ParamSpace::ParamSpace(std::vector<ParamSpec> specs) : specs_(std::move(specs)) {
  if (specs_.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "parameter space is empty");
  }
  std::set<std::string> names;
  for (const auto& s : specs_) {
    if (!names.insert(s.name).second) {
      throw Error(ErrorCode::kInvalidArgument,
                  "duplicate parameter '" + s.name + "'");
    }
    if (!std::isfinite(s.lower) || !std::isfinite(s.upper) ||
        !(s.lower < s.upper)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "parameter '" + s.name + "' needs lower < upper");
    }
    if (s.log_scale && (s.kind == ParamKind::kInteger || !(s.lower > 0.0))) {
      throw Error(ErrorCode::kInvalidArgument,
                  "log-scaled parameter '" + s.name +
                      "' must be continuous with lower > 0");
    }
    if (s.kind == ParamKind::kInteger &&
        std::ceil(s.lower) > std::floor(s.upper)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "integer parameter '" + s.name + "' has no integer value");
    }
  }
}

std::optional<std::size_t> ParamSpace::IndexOf(const std::string& name) const {
  for (std::size_t i = 0; i < specs_.size(); ++i) {
    if (specs_[i].name == name) {
      return i;
    }
  }
  return std::nullopt;
}

std::vector<double> ParamSpace::ToUnit(const ParamSet& params) const {
  if (params.size() != specs_.size()) {
    throw Error(ErrorCode::kInvalidArgument, "parameter count mismatch");
  }
  std::vector<double> unit(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& s = specs_[i];
    unit[i] = s.log_scale ? std::log(params[i] / s.lower) /
                                std::log(s.upper / s.lower)
                          : (params[i] - s.lower) / (s.upper - s.lower);
  }
  return unit;
}

ParamSet ParamSpace::FromUnit(const std::vector<double>& unit) const {
  if (unit.size() != specs_.size()) {
    throw Error(ErrorCode::kInvalidArgument, "parameter count mismatch");
  }
  ParamSet params(unit.size());
  for (std::size_t i = 0; i < unit.size(); ++i) {
    const auto& s = specs_[i];
    const double u = std::clamp(unit[i], 0.0, 1.0);
    double v = s.log_scale ? s.lower * std::pow(s.upper / s.lower, u)
                           : s.lower + u * (s.upper - s.lower);
    if (s.kind == ParamKind::kInteger) {
      v = std::clamp(std::round(v), std::ceil(s.lower), std::floor(s.upper));
    }
    params[i] = std::clamp(v, s.lower, s.upper);
  }
  return params;
}

bool ParamSpace::Contains(const ParamSet& params) const {
  if (params.size() != specs_.size()) {
    return false;
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& s = specs_[i];
    if (!(params[i] >= s.lower && params[i] <= s.upper)) {
      return false;
    }
    if (s.kind == ParamKind::kInteger && params[i] != std::round(params[i])) {
      return false;
    }
  }
  return true;
}

void History::Append(HistoryEntry entry) {
  if (!std::isfinite(entry.score)) {
    throw Error(ErrorCode::kInvalidArgument, "history scores must be finite");
  }
  entries.push_back(std::move(entry));
}

std::size_t History::BestIndex() const {
  if (entries.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "history is empty");
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < entries.size(); ++i) {
    if (entries[i].score > entries[best].score) {
      best = i;
    }
  }
  return best;
}

std::vector<double> History::BestSoFar() const {
  std::vector<double> out;
  out.reserve(entries.size());
  for (const auto& e : entries) {
    out.push_back(out.empty() ? e.score : std::max(out.back(), e.score));
  }
  return out;
}

std::optional<double> History::WorstStableScore() const {
  std::optional<double> worst;
  for (const auto& e : entries) {
    if (!e.unstable) {
      worst = worst ? std::min(*worst, e.score) : e.score;
    }
  }
  return worst;
}

std::string EntryToJsonLine(const HistoryEntry& entry, const ParamSpace& space,
                            std::uint64_t seed) {
  ordered_json params = ordered_json::object();
  for (std::size_t i = 0; i < space.size(); ++i) {
    params[space[i].name] = entry.params.at(i);
  }
  ordered_json j;
  j["iteration"] = entry.iteration;
  j["params"] = std::move(params);
  j["score"] = entry.score;
  j["timestamp"] = entry.timestamp;
  j["unstable"] = entry.unstable;
  j["seed"] = seed;
  return j.dump() + "\n";
}

History HistoryFromJsonl(const std::string& text, const ParamSpace& space) {
  History history;
  std::size_t start = 0;
  bool first = true;
  int line_no = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string::npos) {
      end = text.size();
    }
    const std::string line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) {
      continue;
    }
    try {
      const auto j = nlohmann::json::parse(line);
      HistoryEntry e;
      e.iteration = j.at("iteration").get<int>();
      e.score = j.at("score").get<double>();
      e.timestamp = j.value("timestamp", 0.0);
      e.unstable = j.value("unstable", false);
      const auto& params = j.at("params");
      for (const auto& spec : space.specs()) {
        e.params.push_back(params.at(spec.name).get<double>());
      }
      if (first && j.contains("seed")) {
        history.seed = j.at("seed").get<std::uint64_t>();
      }
      first = false;
      history.Append(std::move(e));
    } catch (const nlohmann::json::exception& ex) {
      throw Error(ErrorCode::kParse, "history line " + std::to_string(line_no) +
                                         ": " + ex.what());
    }
  }
  return history;
}

// ---------------------------------------------------------------------------

bool CholeskyInPlace(std::vector<double>& a, std::size_t n) {
  const auto& k = simd::Kernels();
  for (std::size_t i = 0; i < n; ++i) {
    double* row_i = &a[i * n];
    for (std::size_t j = 0; j <= i; ++j) {
      const double* row_j = &a[j * n];
      const double s = row_i[j] - k.dot(row_i, row_j, j);
      if (i == j) {
        if (!(s > 0.0) || !std::isfinite(s)) {
          return false;
        }
        row_i[i] = std::sqrt(s);
      } else {
        row_i[j] = s / row_j[j];
      }
    }
    std::fill(row_i + i + 1, row_i + n, 0.0);
  }
  return true;
}

GprModel GprModel::FitUnit(const std::vector<std::vector<double>>& points,
                           const std::vector<double>& labels,
                           const KernelSettings& settings) {
  if (points.size() != labels.size()) {
    throw Error(ErrorCode::kInvalidArgument, "one label per point required");
  }
  if (!(settings.length_scale > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "length scale must be > 0");
  }
  GprModel m;
  m.n_ = points.size();
  m.dims_ = points.empty() ? 0 : points.front().size();
  m.length_scale_ = settings.length_scale;

  double mean = 0.0;
  for (const double g : labels) {
    if (!std::isfinite(g)) {
      throw Error(ErrorCode::kInvalidArgument, "labels must be finite");
    }
    mean += g;
  }
  mean = m.n_ > 0 ? mean / static_cast<double>(m.n_) : 0.0;
  double var = 0.0;
  for (const double g : labels) {
    var += (g - mean) * (g - mean);
  }
  var = m.n_ > 0 ? var / static_cast<double>(m.n_) : 0.0;

  m.prior_mean_ = settings.prior_mean.value_or(mean);
  m.signal_variance_ =
      settings.signal_variance.value_or(std::max(var, kSignalFloor));
  m.noise_variance_ =
      settings.noise_variance.value_or(kNoiseRatio * m.signal_variance_);
  if (!(m.signal_variance_ > 0.0) || !(m.noise_variance_ >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "kernel variances out of range");
  }
  m.best_label_ = labels.empty()
                      ? m.prior_mean_
                      : *std::max_element(labels.begin(), labels.end());

  const std::size_t n = m.n_;
  m.points_.assign(n * m.dims_, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (points[i].size() != m.dims_) {
      throw Error(ErrorCode::kInvalidArgument, "inconsistent point dimension");
    }
    for (std::size_t k = 0; k < m.dims_; ++k) {
      m.points_[k * n + i] = points[i][k];
    }
  }

  const auto& kernels = simd::Kernels();
  const double inv_two_l2 = 1.0 / (2.0 * m.length_scale_ * m.length_scale_);
  m.chol_.assign(n * n, 0.0);
  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) {
    kernels.squared_distances(points[i].data(), m.points_.data(), n, m.dims_,
                              d2.data());
    for (std::size_t j = 0; j <= i; ++j) {
      m.chol_[i * n + j] = m.signal_variance_ * std::exp(-d2[j] * inv_two_l2);
    }
    m.chol_[i * n + i] += m.noise_variance_;
  }
  if (!CholeskyInPlace(m.chol_, n)) {
    throw Error(ErrorCode::kSingularKernel,
                "kernel matrix is not positive definite");
  }

  // alpha = L^-T L^-1 (g - mu0)
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = &m.chol_[i * n];
    y[i] = (labels[i] - m.prior_mean_ - kernels.dot(row, y.data(), i)) / row[i];
  }
  m.alpha_.assign(n, 0.0);
  for (std::size_t ii = n; ii-- > 0;) {
    double s = y[ii];
    for (std::size_t j = ii + 1; j < n; ++j) {
      s -= m.chol_[j * n + ii] * m.alpha_[j];
    }
    m.alpha_[ii] = s / m.chol_[ii * n + ii];
  }
  return m;
}

GprModel GprModel::Fit(const History& history, const ParamSpace& space,
                       const KernelSettings& settings) {
  if (history.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "cannot fit on an empty history");
  }
  std::vector<std::vector<double>> points;
  std::vector<double> labels;
  for (const auto& e : history.entries) {
    points.push_back(space.ToUnit(e.params));
    labels.push_back(e.score);
  }
  return FitUnit(points, labels, settings);
}

Posterior GprModel::PredictUnit(const double* unit) const {
  Posterior out;
  if (n_ == 0) {
    out.mean = prior_mean_;
    out.variance = signal_variance_;
    out.stddev = std::sqrt(signal_variance_);
    return out;
  }
  const auto& kernels = simd::Kernels();
  std::vector<double> k(n_);
  kernels.squared_distances(unit, points_.data(), n_, dims_, k.data());
  const double inv_two_l2 = 1.0 / (2.0 * length_scale_ * length_scale_);
  for (double& v : k) {
    v = signal_variance_ * std::exp(-v * inv_two_l2);
  }
  out.mean = prior_mean_ + kernels.dot(k.data(), alpha_.data(), n_);
  // v = L^-1 k, variance = k** - v.v
  for (std::size_t i = 0; i < n_; ++i) {
    const double* row = &chol_[i * n_];
    k[i] = (k[i] - kernels.dot(row, k.data(), i)) / row[i];
  }
  out.variance = signal_variance_ - kernels.dot(k.data(), k.data(), n_);
  out.stddev = std::sqrt(std::max(out.variance, 0.0));
  return out;
}

// ---------------------------------------------------------------------------

double NormalPdf(double z) {
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

double NormalCdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double AcquisitionValue(const Posterior& p, const Acquisition& acq,
                        double incumbent) {
  switch (acq.kind) {
    case AcquisitionKind::kUcb:
      return p.mean + acq.kappa * p.stddev;
    case AcquisitionKind::kEi: {
      if (!(p.stddev > 0.0)) {
        return 0.0;
      }
      const double diff = p.mean - incumbent;
      const double z = diff / p.stddev;
      return diff * NormalCdf(z) + p.stddev * NormalPdf(z);
    }
    case AcquisitionKind::kMaxVariance:
      return p.stddev;
  }
  return 0.0;
}

double AcquisitionValue(const GprModel& model, const std::vector<double>& unit,
                        const Acquisition& acq) {
  return AcquisitionValue(model.PredictUnit(unit), acq,
                          acq.incumbent.value_or(model.best_label()));
}

std::vector<double> HaltonPoint(std::size_t index,
                                const std::vector<double>& shift) {
  if (shift.size() > std::size(kPrimes)) {
    throw Error(ErrorCode::kInvalidArgument, "too many Halton dimensions");
  }
  std::vector<double> p(shift.size());
  for (std::size_t k = 0; k < shift.size(); ++k) {
    const double v = RadicalInverse(index + 1, kPrimes[k]) + shift[k];
    p[k] = v - std::floor(v);
  }
  return p;
}

std::vector<double> RandomShift(std::size_t dims, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> shift(dims);
  for (double& s : shift) {
    s = u(rng);
  }
  return shift;
}

ParamSet SuggestNext(const GprModel& model, const ParamSpace& space,
                     const Acquisition& acq, std::uint64_t seed) {
  const std::size_t d = space.size();
  if (model.size() > 0 && model.dims() != d) {
    throw Error(ErrorCode::kInvalidArgument, "model and space disagree");
  }
  const double incumbent = acq.incumbent.value_or(model.best_label());
  const auto value = [&](const std::vector<double>& u) {
    return AcquisitionValue(model.PredictUnit(u), acq, incumbent);
  };

  const auto shift = RandomShift(d, seed);
  std::vector<double> best;
  double best_value = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < kSuggestCandidates; ++i) {
    auto u = HaltonPoint(i, shift);
    const double v = value(u);
    if (v > best_value) {
      best_value = v;
      best = std::move(u);
    }
  }

  const double half_width =
      std::min(0.5, 2.0 * std::pow(static_cast<double>(kSuggestCandidates),
                                   -1.0 / static_cast<double>(d)));
  const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
  for (std::size_t k = 0; k < d; ++k) {
    double lo = std::max(0.0, best[k] - half_width);
    double hi = std::min(1.0, best[k] + half_width);
    std::vector<double> probe = best;
    const auto at = [&](double x) {
      probe[k] = x;
      return value(probe);
    };
    double x1 = hi - ratio * (hi - lo);
    double x2 = lo + ratio * (hi - lo);
    double f1 = at(x1);
    double f2 = at(x2);
    for (int it = 0; it < kGoldenIterations; ++it) {
      if (f1 >= f2) {
        hi = x2;
        x2 = x1;
        f2 = f1;
        x1 = hi - ratio * (hi - lo);
        f1 = at(x1);
      } else {
        lo = x1;
        x1 = x2;
        f1 = f2;
        x2 = lo + ratio * (hi - lo);
        f2 = at(x2);
      }
    }
    const double x = f1 >= f2 ? x1 : x2;
    const double fx = std::max(f1, f2);
    if (fx > best_value) {
      best_value = fx;
      best[k] = x;
    }
  }

  ParamSet params = space.FromUnit(best);
  for (std::size_t k = 0; k < d; ++k) {
    const auto& s = space[k];
    if (s.kind != ParamKind::kInteger) {
      continue;
    }
    const double raw = s.lower + std::clamp(best[k], 0.0, 1.0) * (s.upper - s.lower);
    double chosen = params[k];
    double chosen_value = -std::numeric_limits<double>::infinity();
    for (const double c : {std::floor(raw), std::ceil(raw)}) {
      const double cv = std::clamp(c, std::ceil(s.lower), std::floor(s.upper));
      ParamSet trial = params;
      trial[k] = cv;
      const double v = value(space.ToUnit(trial));
      if (v > chosen_value) {
        chosen_value = v;
        chosen = cv;
      }
    }
    params[k] = chosen;
  }
  return params;
}

}  // namespace autotune::optimizer
