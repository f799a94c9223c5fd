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

#include <cmath>

#include <gtest/gtest.h>

#include "autotune/error.h"
#include "autotune/optimizer.h"
#include "test_util.h"

namespace autotune::optimizer {
namespace {

using testing::Gen;

History Quadratic1d(int n, std::uint64_t seed) {
  Gen gen(seed);
  History h;
  for (int i = 0; i < n; ++i) {
    const double x = gen.Uniform(0, 1);
    h.Append({i, {x}, -(x - 0.3) * (x - 0.3)});
  }
  return h;
}

TEST(Parzen, DensityIntegratesToOne) {
  Gen gen(81);
  for (int c = 0; c < 20; ++c) {
    const Parzen1d p(gen.Vector(gen.Int(0, 30), 0, 1));
    double sum = 0.0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
      sum += p.Density((i + 0.5) / n) / n;
    }
    EXPECT_NEAR(sum, 1.0, 1e-3);
    EXPECT_EQ(p.Density(-0.1), 0.0);
  }
}

TEST(Parzen, BandwidthIsWiderNeighbourGap) {
  const Parzen1d p({0.2, 0.3, 0.7});
  ASSERT_EQ(p.means().size(), 4u);  // plus the prior component
  EXPECT_NEAR(p.sigmas()[0], 0.25, 1e-15);  // gap 0.2 raised to the 1/4 floor
  EXPECT_NEAR(p.sigmas()[1], 0.4, 1e-15);
  EXPECT_NEAR(p.sigmas()[2], 0.4, 1e-15);
  EXPECT_EQ(p.means()[3], 0.5);
  EXPECT_EQ(p.sigmas()[3], 1.0);
}

TEST(Parzen, BandwidthWithoutFloor) {
  std::vector<double> obs;
  for (int i = 0; i < 19; ++i) {
    obs.push_back(0.05 * i);
  }
  obs.push_back(0.97);
  const Parzen1d p(obs);
  EXPECT_NEAR(p.sigmas()[0], 0.05, 1e-12);
  EXPECT_NEAR(p.sigmas()[18], 0.07, 1e-12);  // wider right gap
  EXPECT_NEAR(p.sigmas()[19], 0.07, 1e-12);
}

TEST(Parzen, BandwidthFloor) {
  const Parzen1d p({0.5, 0.5, 0.5});
  EXPECT_NEAR(p.sigmas()[1], 0.25, 1e-15);  // 1 / (n + 1)
}

TEST(Parzen, SamplesStayInUnitInterval) {
  const Parzen1d p({0.0, 0.01, 0.99});
  std::mt19937_64 rng(82);
  for (int i = 0; i < 1000; ++i) {
    const double x = p.Sample(rng);
    ASSERT_GE(x, 0.0);
    ASSERT_LE(x, 1.0);
  }
}

TEST(Tpe, ColdStartThreshold) {
  EXPECT_EQ(TpeColdStart(0.25), 8u);
  EXPECT_EQ(TpeColdStart(0.1), 20u);
}

TEST(Tpe, ColdStartIsUniformAndSeeded) {
  const ParamSpace space({{"a", 0, 1}, {"b", -1, 1}});
  const auto h = Quadratic1d(0, 0);
  const auto a = TpeSuggest(h, space, {}, 3, 9);
  ASSERT_EQ(a.size(), 3u);
  EXPECT_EQ(a, TpeSuggest(h, space, {}, 3, 9));
  EXPECT_NE(a, TpeSuggest(h, space, {}, 3, 10));
  for (const auto& p : a) {
    EXPECT_TRUE(space.Contains(p));
  }
}

TEST(Tpe, ConcentratesNearTheOptimum) {
  const ParamSpace space({{"x", 0, 1}});
  int near = 0;
  for (int seed = 0; seed < 50; ++seed) {
    const auto h = Quadratic1d(40, 1000 + seed);
    const auto s = TpeSuggest(h, space, {}, 1, seed);
    if (std::abs(s[0][0] - 0.3) < 0.2) {
      ++near;
    }
  }
  EXPECT_GE(near, 40);  // a uniform draw lands there 40% of the time
}

TEST(Tpe, BatchMembersAreDistinct) {
  const ParamSpace space({{"x", 0, 1}, {"y", 0, 1}});
  Gen gen(83);
  History h;
  for (int i = 0; i < 30; ++i) {
    const auto u = gen.Vector(2, 0, 1);
    h.Append({i, u, -u[0] - u[1]});
  }
  const auto batch = TpeSuggest(h, space, {}, 5, 4);
  ASSERT_EQ(batch.size(), 5u);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    for (std::size_t j = i + 1; j < batch.size(); ++j) {
      EXPECT_NE(batch[i], batch[j]);
    }
  }
}

TEST(Tpe, IntegerSpaceFallsBackWhenExhausted) {
  const ParamSpace space({{"n", 0, 1, ParamKind::kInteger}});
  Gen gen(84);
  History h;
  for (int i = 0; i < 12; ++i) {
    h.Append({i, {static_cast<double>(i % 2)}, -static_cast<double>(i % 2)});
  }
  const auto batch = TpeSuggest(h, space, {}, 3, 1);
  EXPECT_EQ(batch.size(), 3u);
  for (const auto& p : batch) {
    EXPECT_TRUE(space.Contains(p));
  }
}

TEST(Tpe, RejectsBadSettings) {
  const ParamSpace space({{"x", 0, 1}});
  TpeSettings s;
  s.gamma = 1.0;
  EXPECT_THROW(TpeSuggest(History{}, space, s, 1, 0), Error);
  EXPECT_THROW(TpeSuggest(History{}, space, {}, 0, 0), Error);
}

}  // namespace
}  // namespace autotune::optimizer
