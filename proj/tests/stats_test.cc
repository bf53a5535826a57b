// Copyright 2026 The ropasum Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "ropasum/stats.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "ropasum/random.h"

namespace ropasum {
namespace {

TEST(BoxplotTest, InclusiveLinearQuartiles) {
  std::vector<double> v{4, 1, 3, 2};
  BoxplotSummary s = boxplot_summary(v);
  EXPECT_EQ(s.min, 1);
  EXPECT_EQ(s.max, 4);
  EXPECT_DOUBLE_EQ(s.q1, 1.75);
  EXPECT_DOUBLE_EQ(s.median, 2.5);
  EXPECT_DOUBLE_EQ(s.q3, 3.25);
  EXPECT_DOUBLE_EQ(s.mean, 2.5);
  EXPECT_DOUBLE_EQ(s.variance, 5.0 / 3.0);
  EXPECT_EQ(s.n, 4u);
  BoxplotSummary one = boxplot_summary(std::vector<double>{0.3});
  EXPECT_EQ(one.median, 0.3);
  EXPECT_EQ(one.variance, 0.0);
  EXPECT_THROW(boxplot_summary(std::vector<double>{}), std::invalid_argument);
}

TEST(BoxplotTest, PermutationInvariant) {
  Rng rng(4);
  std::vector<double> v(37);
  for (double& x : v) x = rng.uniform_real();
  std::string first = boxplot_to_json(boxplot_summary(v)).dump();
  for (int i = 0; i < 20; ++i) {
    rng.shuffle(std::span<double>(v));
    ASSERT_EQ(boxplot_to_json(boxplot_summary(v)).dump(), first);
  }
}

TEST(StreamingSummaryTest, ExactBelowTheLimit) {
  Rng rng(5);
  std::vector<double> v(500);
  StreamingSummary s;
  for (double& x : v) {
    x = rng.uniform_real();
    s.add(x);
  }
  BoxplotSummary exact = boxplot_summary(v);
  BoxplotSummary streamed = s.summary();
  EXPECT_TRUE(s.quartiles_exact());
  EXPECT_EQ(s.count(), 500u);
  EXPECT_EQ(streamed.q1, exact.q1);
  EXPECT_EQ(streamed.median, exact.median);
  EXPECT_EQ(streamed.q3, exact.q3);
  EXPECT_EQ(streamed.min, exact.min);
  EXPECT_EQ(streamed.max, exact.max);
  EXPECT_NEAR(streamed.mean, exact.mean, 1e-12);
  EXPECT_NEAR(streamed.variance, exact.variance, 1e-12);
}

TEST(StreamingSummaryTest, ApproximatesBeyondTheLimit) {
  Rng rng(6);
  std::vector<double> v(20000);
  StreamingSummary s;
  for (double& x : v) {
    x = rng.uniform_real();
    s.add(x);
  }
  BoxplotSummary exact = boxplot_summary(v);
  BoxplotSummary streamed = s.summary();
  EXPECT_FALSE(s.quartiles_exact());
  EXPECT_NEAR(streamed.q1, exact.q1, 0.02);
  EXPECT_NEAR(streamed.median, exact.median, 0.02);
  EXPECT_NEAR(streamed.q3, exact.q3, 0.02);
  EXPECT_NEAR(streamed.mean, exact.mean, 1e-9);
  EXPECT_NEAR(streamed.variance, exact.variance, 1e-9);
  EXPECT_THROW(StreamingSummary().summary(), std::logic_error);
}

TEST(SeCurveTest, PooledFixture) {
  auto curve = se_curve({{0.2, 0.4}, {0.6, 0.8}});
  ASSERT_EQ(curve.size(), 2u);
  EXPECT_NEAR(curve[0].standard_error, std::sqrt(0.02) / std::sqrt(2.0),
              1e-12);
  EXPECT_NEAR(curve[1].standard_error, 0.1291, 1e-4);
  EXPECT_NEAR(curve[1].mean, 0.5, 1e-12);
  EXPECT_EQ(curve[1].n, 4u);
  auto within = se_curve({{0.2, 0.4}, {0.6, 0.8}}, SeMode::kWithinShot);
  EXPECT_EQ(within[1].n, 2u);
  EXPECT_NEAR(within[1].standard_error, 0.1, 1e-12);
}

TEST(SeCurveTest, PooledCountsGrowByRepetitions) {
  std::vector<std::vector<double>> m(11, std::vector<double>(10, 0.5));
  auto curve = se_curve(m);
  for (std::size_t s = 0; s < curve.size(); ++s) {
    EXPECT_EQ(curve[s].n, (s + 1) * 10);
    EXPECT_EQ(curve[s].standard_error, 0.0);
  }
  EXPECT_EQ(select_shot_count(curve).shots, 0u);
}

TEST(SeCurveTest, RejectsBadMatrices) {
  EXPECT_THROW(se_curve({}), std::invalid_argument);
  EXPECT_THROW(se_curve({{0.1}}), std::invalid_argument);
  EXPECT_THROW(se_curve({{0.1, 0.2}, {0.3}}), std::invalid_argument);
}

std::vector<SECurvePoint> curve_of(std::vector<double> se) {
  std::vector<SECurvePoint> out;
  for (std::size_t s = 0; s < se.size(); ++s) out.push_back({s, 0.5, se[s], 2});
  return out;
}

TEST(SelectShotTest, FirstCrossing) {
  auto curve = curve_of({0.2, 0.06, 0.04, 0.03});
  ShotSelection s = select_shot_count(curve, 0.05);
  EXPECT_EQ(s.shots, 2u);
  EXPECT_TRUE(s.threshold_met);
  EXPECT_EQ(select_shot_count(curve_of({0.2, 0.05, 0.01}), 0.05).shots, 1u);
  ShotSelection unmet = select_shot_count(curve_of({0.3, 0.2, 0.1}), 0.05);
  EXPECT_EQ(unmet.shots, 2u);
  EXPECT_FALSE(unmet.threshold_met);
  EXPECT_THROW(select_shot_count(curve_of({}), 0.05), std::invalid_argument);
  EXPECT_THROW(select_shot_count(curve, 0.0), std::invalid_argument);
}

TEST(SelectShotTest, MonotoneInThreshold) {
  Rng rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> se(11);
    for (double& x : se) x = rng.uniform_real() * 0.2;
    auto curve = curve_of(se);
    std::size_t previous = 11;
    for (double t = 0.005; t < 0.25; t += 0.005) {
      std::size_t s = select_shot_count(curve, t).shots;
      ASSERT_LE(s, previous);
      previous = s;
    }
  }
}

TEST(SeCurveTest, PoolingShrinksErrorInMostTrials) {
  Rng rng(9);
  int shrunk = 0;
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::vector<double>> m(11, std::vector<double>(10));
    for (auto& row : m) {
      for (double& x : row) x = 0.4 + 0.2 * rng.uniform_real();
    }
    auto curve = se_curve(m);
    shrunk += curve[10].standard_error < curve[1].standard_error;
  }
  EXPECT_GE(shrunk, 190);
}

}  // namespace
}  // namespace ropasum
