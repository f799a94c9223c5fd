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

#include "autotune/error.h"
#include "autotune/optimizer.h"
#include "test_util.h"

namespace autotune::optimizer {
namespace {

using testing::Gen;

const std::vector<std::vector<double>> kX = {
    {0.1, 0.2}, {0.4, 0.9}, {0.75, 0.3}, {0.5, 0.5}, {0.95, 0.85}};
const std::vector<double> kG = {-1.0, 0.5, 0.25, 1.5, -0.3};

TEST(Space, Validation) {
  EXPECT_THROW(ParamSpace(std::vector<ParamSpec>{}), Error);
  EXPECT_THROW(ParamSpace({{"a", 1, 1}}), Error);
  EXPECT_THROW(ParamSpace({{"a", 0, 1}, {"a", 0, 2}}), Error);
  EXPECT_THROW(ParamSpace({{"a", 0, 1, ParamKind::kContinuous, true}}), Error);
}

TEST(Space, UnitRoundTrip) {
  const ParamSpace space({{"a", -2, 3},
                          {"n", 1, 9, ParamKind::kInteger},
                          {"p", 0.1, 1e5, ParamKind::kContinuous, true}});
  Gen gen(71);
  for (int c = 0; c < testing::kPropertyCases; ++c) {
    const ParamSet p = space.FromUnit(gen.Vector(3, 0, 1));
    EXPECT_TRUE(space.Contains(p));
    EXPECT_EQ(p[1], std::round(p[1]));
    const ParamSet back = space.FromUnit(space.ToUnit(p));
    for (int k = 0; k < 3; ++k) {
      EXPECT_NEAR(back[k], p[k], 1e-9 * std::max(1.0, std::abs(p[k])));
    }
  }
  EXPECT_EQ(space.IndexOf("p"), 2u);
  EXPECT_FALSE(space.IndexOf("q"));
}

TEST(Space, LogScaleMidpointIsGeometricMean) {
  const ParamSpace space({{"p", 0.1, 1e5, ParamKind::kContinuous, true}});
  EXPECT_NEAR(space.FromUnit({0.5})[0], 100.0, 1e-9);
  EXPECT_NEAR(space.ToUnit({1000.0})[0], 4.0 / 6.0, 1e-12);
}

TEST(Cholesky, KnownFactor) {
  std::vector<double> a = {4, 2, 2, 3};
  ASSERT_TRUE(CholeskyInPlace(a, 2));
  EXPECT_DOUBLE_EQ(a[0], 2.0);
  EXPECT_DOUBLE_EQ(a[2], 1.0);
  EXPECT_DOUBLE_EQ(a[3], std::sqrt(2.0));
  std::vector<double> bad = {1, 2, 2, 1};
  EXPECT_FALSE(CholeskyInPlace(bad, 2));
}

TEST(Gpr, OraclePosterior) {
  const auto model = GprModel::FitUnit(kX, kG);
  const auto p1 = model.PredictUnit({0.3, 0.4});
  EXPECT_NEAR(p1.mean, 0.4865293858188794, 1e-9);
  EXPECT_NEAR(p1.variance, 0.4081388279928074, 1e-9);
  const auto p2 = model.PredictUnit({0.6, 0.7});
  EXPECT_NEAR(p2.mean, 0.8999866358493069, 1e-9);
  EXPECT_NEAR(p2.variance, 0.41380180125143445, 1e-9);
  EXPECT_NEAR(p2.stddev, std::sqrt(p2.variance), 1e-15);
}

TEST(Gpr, DefaultHyperparameters) {
  const auto model = GprModel::FitUnit(kX, kG);
  double mean = 0.0;
  for (double g : kG) mean += g;
  mean /= 5.0;
  double var = 0.0;
  for (double g : kG) var += (g - mean) * (g - mean);
  var /= 5.0;
  EXPECT_NEAR(model.prior_mean(), mean, 1e-15);
  EXPECT_NEAR(model.signal_variance(), var, 1e-15);
  EXPECT_NEAR(model.noise_variance(), 1e-4 * var, 1e-18);
  EXPECT_EQ(model.best_label(), 1.5);
}

TEST(Gpr, TwoPointClosedForm) {
  KernelSettings s;
  s.length_scale = 1.0;
  s.signal_variance = 1.0;
  s.noise_variance = 0.0;
  s.prior_mean = 0.0;
  const auto model = GprModel::FitUnit({{0.0}, {1.0}}, {0.0, 1.0}, s);
  const auto p = model.PredictUnit({0.5});
  EXPECT_NEAR(p.mean, 0.5493184317705154, 1e-12);
  EXPECT_NEAR(p.variance, 0.030456370859785364, 1e-12);
}

TEST(Gpr, DuplicatePointsWithoutNoiseAreSingular) {
  KernelSettings s;
  s.noise_variance = 0.0;
  try {
    GprModel::FitUnit({{0.3}, {0.3}}, {0.0, 1.0}, s);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSingularKernel);
  }
}

TEST(Gpr, EmptyFitIsThePrior) {
  KernelSettings s;
  s.signal_variance = 2.0;
  s.prior_mean = 0.7;
  const auto model = GprModel::FitUnit({}, {}, s);
  const auto p = model.PredictUnit({0.2, 0.9});
  EXPECT_EQ(p.mean, 0.7);
  EXPECT_EQ(p.variance, 2.0);
  EXPECT_THROW(GprModel::Fit(History{}, ParamSpace({{"a", 0, 1}})), Error);
}

TEST(Gpr, InterpolatesTrainingPoints) {
  const auto model = GprModel::FitUnit(kX, kG);
  for (std::size_t i = 0; i < kX.size(); ++i) {
    const auto p = model.PredictUnit(kX[i]);
    EXPECT_NEAR(p.mean, kG[i], 1e-3);
    EXPECT_LT(p.variance, 1e-3 * model.signal_variance());
  }
}

TEST(Gpr, FarAwayRevertsToPrior) {
  KernelSettings s;
  s.length_scale = 0.01;
  const auto model = GprModel::FitUnit(kX, kG, s);
  const auto p = model.PredictUnit({0.2, 0.6});
  EXPECT_NEAR(p.mean, model.prior_mean(), 1e-9);
  EXPECT_NEAR(p.variance, model.signal_variance(), 1e-9);
}

TEST(Gpr, PermutationInvariant) {
  Gen gen(72);
  for (int c = 0; c < 20; ++c) {
    const int n = gen.Int(2, 12);
    std::vector<std::vector<double>> x;
    std::vector<double> g;
    for (int i = 0; i < n; ++i) {
      x.push_back(gen.Vector(3, 0, 1));
      g.push_back(gen.Uniform(-2, 2));
    }
    std::vector<int> perm(n);
    for (int i = 0; i < n; ++i) perm[i] = i;
    std::shuffle(perm.begin(), perm.end(), gen.rng());
    std::vector<std::vector<double>> xp;
    std::vector<double> gp;
    for (int i : perm) {
      xp.push_back(x[i]);
      gp.push_back(g[i]);
    }
    const auto a = GprModel::FitUnit(x, g);
    const auto b = GprModel::FitUnit(xp, gp);
    const auto q = gen.Vector(3, 0, 1);
    EXPECT_NEAR(a.PredictUnit(q).mean, b.PredictUnit(q).mean, 1e-8);
    EXPECT_NEAR(a.PredictUnit(q).variance, b.PredictUnit(q).variance, 1e-8);
  }
}

TEST(Gpr, VarianceWithinPriorBounds) {
  Gen gen(73);
  const auto model = GprModel::FitUnit(kX, kG);
  for (int c = 0; c < testing::kPropertyCases; ++c) {
    const auto p = model.PredictUnit(gen.Vector(2, 0, 1));
    EXPECT_GE(p.variance, 0.0);
    EXPECT_LE(p.variance, model.signal_variance() + 1e-12);
  }
}

TEST(Gpr, FitUsesNormalizedCoordinates) {
  const ParamSpace space({{"a", 10, 20}, {"b", -1, 1}});
  History h;
  for (std::size_t i = 0; i < kX.size(); ++i) {
    h.Append({static_cast<int>(i), space.FromUnit(kX[i]), kG[i]});
  }
  const auto model = GprModel::Fit(h, space);
  EXPECT_NEAR(model.PredictUnit({0.3, 0.4}).mean, 0.4865293858188794, 1e-9);
}

TEST(Acquisition, NormalFunctions) {
  EXPECT_NEAR(NormalPdf(0.0), 0.3989422804014327, 1e-15);
  EXPECT_NEAR(NormalCdf(0.0), 0.5, 1e-15);
  EXPECT_NEAR(NormalCdf(1.96), 0.9750021048517795, 1e-12);
}

TEST(Acquisition, ExpectedImprovementExamples) {
  const Acquisition ei{AcquisitionKind::kEi};
  EXPECT_NEAR(AcquisitionValue(Posterior{1.0, 1.0, 1.0}, ei, 1.0), 0.3989422804014327,
              1e-12);
  EXPECT_NEAR(AcquisitionValue(Posterior{1.3, 0.25, 0.5}, ei, 1.0),
              0.38433636612087774, 1e-12);
  EXPECT_EQ(AcquisitionValue(Posterior{5.0, 0.0, 0.0}, ei, 1.0), 0.0);
}

TEST(Acquisition, UcbAndVariance) {
  const Acquisition ucb{AcquisitionKind::kUcb, 2.0};
  EXPECT_DOUBLE_EQ(AcquisitionValue(Posterior{1.0, 0.25, 0.5}, ucb, 0.0), 2.0);
  const Acquisition mv{AcquisitionKind::kMaxVariance};
  EXPECT_DOUBLE_EQ(AcquisitionValue(Posterior{1.0, 0.25, 0.5}, mv, 0.0), 0.5);
}

TEST(Acquisition, MonotoneInMeanAndSpread) {
  Gen gen(74);
  for (int c = 0; c < testing::kPropertyCases; ++c) {
    const double mu = gen.Uniform(-2, 2);
    const double sd = gen.Uniform(0.01, 2);
    const double inc = gen.Uniform(-2, 2);
    const double d = gen.Uniform(0.01, 1);
    for (const auto kind : {AcquisitionKind::kUcb, AcquisitionKind::kEi}) {
      const Acquisition acq{kind, 2.0};
      const double base = AcquisitionValue(Posterior{mu, sd * sd, sd}, acq, inc);
      EXPECT_GE(AcquisitionValue(Posterior{mu + d, sd * sd, sd}, acq, inc), base);
      const double s2 = sd + d;
      EXPECT_GE(AcquisitionValue(Posterior{mu, s2 * s2, s2}, acq, inc), base);
      if (kind == AcquisitionKind::kEi) {
        EXPECT_GE(base, 0.0);
      }
    }
  }
}

TEST(Halton, FirstPointsAndShift) {
  const std::vector<double> zero(2, 0.0);
  const auto p0 = HaltonPoint(0, zero);
  EXPECT_DOUBLE_EQ(p0[0], 0.5);
  EXPECT_DOUBLE_EQ(p0[1], 1.0 / 3.0);
  const auto p1 = HaltonPoint(1, zero);
  EXPECT_DOUBLE_EQ(p1[0], 0.25);
  EXPECT_DOUBLE_EQ(p1[1], 2.0 / 3.0);
  const auto shifted = HaltonPoint(0, {0.75, 0.0});
  EXPECT_DOUBLE_EQ(shifted[0], 0.25);
  EXPECT_EQ(RandomShift(3, 5), RandomShift(3, 5));
  EXPECT_NE(RandomShift(3, 5), RandomShift(3, 6));
}

TEST(Suggest, MatchesDenseGridIn1d) {
  Gen gen(75);
  const ParamSpace space({{"x", 0, 1}});
  for (int c = 0; c < 10; ++c) {
    std::vector<std::vector<double>> x;
    std::vector<double> g;
    for (int i = 0, n = gen.Int(2, 8); i < n; ++i) {
      x.push_back({gen.Uniform(0, 1)});
      g.push_back(gen.Uniform(-1, 1));
    }
    const auto model = GprModel::FitUnit(x, g);
    for (const auto kind :
         {AcquisitionKind::kUcb, AcquisitionKind::kEi, AcquisitionKind::kMaxVariance}) {
      const Acquisition acq{kind, 2.0};
      double grid_best = -1e300;
      for (int i = 0; i < 4096; ++i) {
        grid_best = std::max(grid_best,
                             AcquisitionValue(model, {(i + 0.5) / 4096.0}, acq));
      }
      const ParamSet s = SuggestNext(model, space, acq, 11 + c);
      EXPECT_GE(AcquisitionValue(model, space.ToUnit(s), acq), grid_best - 1e-3)
          << "case " << c;
    }
  }
}

TEST(Suggest, MaxVarianceWithFlatLabelsLeavesTheData) {
  Gen gen(77);
  const ParamSpace space({{"a", 0, 1}, {"b", 0, 1}});
  std::vector<std::vector<double>> x;
  for (int i = 0; i < 6; ++i) {
    x.push_back(gen.Vector(2, 0, 1));
  }
  const auto model = GprModel::FitUnit(x, std::vector<double>(6, 0.3));
  const Acquisition mv{AcquisitionKind::kMaxVariance};
  const double sd = model.PredictUnit(space.ToUnit(SuggestNext(model, space, mv, 1))).stddev;
  for (const auto& xi : x) {
    EXPECT_GE(sd, model.PredictUnit(xi).stddev);
  }
}

TEST(Suggest, StaysInBoxAndIsDeterministic) {
  const ParamSpace space({{"a", -5, 5},
                          {"n", 0, 4, ParamKind::kInteger},
                          {"p", 0.1, 1e5, ParamKind::kContinuous, true}});
  Gen gen(76);
  History h;
  for (int i = 0; i < 8; ++i) {
    h.Append({i, space.FromUnit(gen.Vector(3, 0, 1)), gen.Uniform(-1, 0)});
  }
  const auto model = GprModel::Fit(h, space);
  const Acquisition acq;
  const auto a = SuggestNext(model, space, acq, 3);
  EXPECT_TRUE(space.Contains(a));
  EXPECT_EQ(a[1], std::round(a[1]));
  EXPECT_EQ(a, SuggestNext(model, space, acq, 3));
}

}  // namespace
}  // namespace autotune::optimizer
