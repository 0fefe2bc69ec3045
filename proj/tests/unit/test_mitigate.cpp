/*
 * Copyright 2026 The fairaudit Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "fairaudit/fairness.hpp"
#include "fairaudit/mitigate.hpp"
#include "fairaudit/pipeline.hpp"
#include "fairaudit/rng.hpp"

namespace fairaudit {
namespace {

// Largest |P_w(a, y) - P_w(a) P_w(y)| over the observed cells.
double WeightedDependence(const std::vector<Label>& y, const std::vector<int>& a,
                          const std::vector<double>& w) {
  std::map<int, double> pa;
  std::map<std::pair<int, int>, double> pay;
  double py1 = 0.0, total = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    total += w[i];
    pa[a[i]] += w[i];
    pay[{a[i], y[i]}] += w[i];
    py1 += y[i] ? w[i] : 0.0;
  }
  double worst = 0.0;
  for (const auto& [code, mass] : pa)
    for (int label : {0, 1}) {
      const double py = label ? py1 / total : 1.0 - py1 / total;
      const double joint = pay.count({code, label}) ? pay[{code, label}] / total : 0.0;
      worst = std::max(worst, std::abs(joint - mass / total * py));
    }
  return worst;
}

struct Scored {
  std::vector<double> s;
  std::vector<Label> y;
  std::vector<int> a;
};

// Group 2's scores are group 1's shifted up by `shift`; labels follow the
// unshifted score in both groups.
Scored Shifted(std::size_t per_group, double shift, std::uint64_t seed) {
  Rng rng(seed);
  Scored d;
  for (int g : {1, 2})
    for (std::size_t i = 0; i < per_group; ++i) {
      const double u = rng.Uniform01() * (1.0 - shift);
      d.s.push_back(g == 1 ? u : u + shift);
      d.y.push_back(rng.Bernoulli(u / (1.0 - shift)));
      d.a.push_back(g);
    }
  return d;
}

// Biased scores: group 2 has a lower base rate and the score tracks the label.
Scored Biased(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  Scored d;
  for (std::size_t i = 0; i < n; ++i) {
    const int g = rng.Bernoulli(0.5) ? 1 : 2;
    const Label y = rng.Bernoulli(g == 1 ? 0.65 : 0.35);
    const double s = std::clamp(0.5 + (y ? 0.2 : -0.2) + (rng.Uniform01() - 0.5) * 0.7, 0.0, 1.0);
    d.s.push_back(std::round(s * 1000.0) / 1000.0);
    d.y.push_back(y);
    d.a.push_back(g);
  }
  return d;
}

double AccuracyOf(const std::vector<Label>& p, const std::vector<Label>& y) {
  std::size_t hit = 0;
  for (std::size_t i = 0; i < y.size(); ++i) hit += p[i] == y[i];
  return static_cast<double>(hit) / static_cast<double>(y.size());
}

TEST(Reweigh, IndependentDataGetsUnitWeights) {
  const std::vector<Label> y = {1, 0, 1, 0, 1, 0, 1, 0};
  const std::vector<int> a = {1, 1, 1, 1, 2, 2, 2, 2};
  for (double w : Reweigh(y, a)) EXPECT_DOUBLE_EQ(w, 1.0);
}

TEST(Reweigh, ClosedFormCellWeight) {
  // P(a=1) = 0.5, P(y=1) = 0.5, P(a=1, y=1) = 0.4.
  const std::vector<Label> y = {1, 1, 1, 1, 0, 1, 0, 0, 0, 0};
  const std::vector<int> a = {1, 1, 1, 1, 1, 2, 2, 2, 2, 2};
  EXPECT_DOUBLE_EQ(Reweigh(y, a)[0], 0.625);
}

TEST(Reweigh, WeightedJointFactorizesAndIsIdempotent) {
  Rng rng(12);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Label> y;
    std::vector<int> a;
    for (int i = 0; i < 400; ++i) {
      a.push_back(1 + static_cast<int>(rng.UniformIndex(4)));
      y.push_back(rng.Bernoulli(0.2 + 0.15 * a.back()));
    }
    const auto w = Reweigh(y, a);
    EXPECT_TRUE(std::all_of(w.begin(), w.end(), [](double v) { return v > 0.0; }));
    EXPECT_LT(WeightedDependence(y, a, w), 1e-12);
    // Reweighing the weighted distribution asks for no further change: the
    // weighted cell masses already equal the product of their marginals.
    std::map<std::pair<int, int>, double> cell;
    std::map<int, double> pa;
    double py1 = 0.0, total = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      cell[{a[i], y[i]}] += w[i];
      pa[a[i]] += w[i];
      py1 += y[i] ? w[i] : 0.0;
      total += w[i];
    }
    for (const auto& [key, mass] : cell) {
      const double py = key.second ? py1 / total : 1.0 - py1 / total;
      EXPECT_NEAR(pa[key.first] / total * py / (mass / total), 1.0, 1e-12);
    }
  }
}

TEST(Reweigh, EmptyCellIsADataError) {
  try {
    Reweigh(std::vector<Label>{1, 1, 0}, std::vector<int>{1, 1, 2});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kData);
  }
}

TEST(ThresholdGrid, DistinctScoresPlusOneOrEvenGrid) {
  EXPECT_EQ(ThresholdGrid(std::vector<double>{0.3, 0.1, 0.3}), (std::vector<double>{0.1, 0.3, 1.0}));
  EXPECT_EQ(ThresholdGrid(std::vector<double>{1.0, 0.2}), (std::vector<double>{0.2, 1.0}));
  std::vector<double> many;
  for (int i = 0; i < 500; ++i) many.push_back(i / 499.0);
  const auto g = ThresholdGrid(many);
  ASSERT_EQ(g.size(), kMaxThresholdGrid);
  EXPECT_EQ(g.front(), 0.0);
  EXPECT_EQ(g[37], 0.37);
  EXPECT_EQ(g.back(), 1.0);
}

TEST(ApplyThresholds, BoundaryAndFallbackRules) {
  ThresholdPolicy p;
  p.thresholds = {{1, 0.0}, {2, 1.0}, {3, 0.5}};
  p.global_threshold = 0.5;
  const std::vector<double> s = {0.0, 0.99, 0.5, 0.49, 0.7};
  const std::vector<int> a = {1, 2, 3, 3, 9};
  Diagnostics diag;
  EXPECT_EQ(ApplyThresholds(p, s, a, &diag), (std::vector<Label>{1, 0, 1, 0, 1}));
  EXPECT_EQ(diag.warnings().size(), 1u);
}

TEST(FitThresholds, UnconstrainedFitBeatsTheGlobalCutAndDefault) {
  const Scored d = Biased(3000, 4);
  const ThresholdPolicy p =
      FitGroupThresholds(d.s, d.y, d.a, FairnessCriterion::kDemographicParity, 1.0);
  EXPECT_TRUE(p.feasible);
  // Exhaustive pooled scan for the accuracy-optimal single cut.
  double best = -1.0, best_t = 0.0;
  for (double t : ThresholdGrid(d.s)) {
    std::vector<Label> pred;
    for (double s : d.s) pred.push_back(s >= t);
    const double acc = AccuracyOf(pred, d.y);
    if (acc > best) {
      best = acc;
      best_t = t;
    }
  }
  EXPECT_DOUBLE_EQ(p.global_threshold, best_t);
  const double fitted = AccuracyOf(ApplyThresholds(p, d.s, d.a), d.y);
  EXPECT_DOUBLE_EQ(fitted, p.fit_accuracy);
  EXPECT_GE(fitted, best);
  std::vector<Label> half;
  for (double s : d.s) half.push_back(s >= 0.5);
  EXPECT_GE(fitted, AccuracyOf(half, d.y));
}

TEST(FitThresholds, ShiftedGroupsGetShiftedThresholds) {
  const Scored d = Shifted(3000, 0.2, 9);
  const ThresholdPolicy p =
      FitGroupThresholds(d.s, d.y, d.a, FairnessCriterion::kDemographicParity, 0.01);
  EXPECT_NEAR(p.thresholds.at(2) - p.thresholds.at(1), 0.2, 0.03);
}

TEST(FitThresholds, FeasiblePoliciesCloseOnTheFitData) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const Scored d = Biased(1500, seed);
    for (double eps : {0.0, 0.02, 0.05, 0.1}) {
      const ThresholdPolicy dp =
          FitGroupThresholds(d.s, d.y, d.a, FairnessCriterion::kDemographicParity, eps);
      ASSERT_TRUE(dp.feasible);
      const auto labels = ApplyThresholds(dp, d.s, d.a);
      EXPECT_LE(SelectionRateGap(labels, d.a), eps + 1e-12);
      EXPECT_LE(dp.achieved_disparity, eps + 1e-12);

      const ThresholdPolicy eo =
          FitGroupThresholds(d.s, d.y, d.a, FairnessCriterion::kEqualizedOdds, eps);
      ASSERT_TRUE(eo.feasible);
      const auto eo_labels = ApplyThresholds(eo, d.s, d.a);
      const RateDifferences diff = ComputeRateDifferences(ComputeGroupOutcomes(d.y, eo_labels, d.a));
      EXPECT_LE(diff.eod, eps + 1e-12);
    }
  }
}

TEST(FitThresholds, LooserToleranceNeverLowersFitAccuracy) {
  const Scored d = Biased(2000, 21);
  double prev = 0.0;
  for (double eps : {0.0, 0.01, 0.05, 0.1, 0.3, 1.0}) {
    const ThresholdPolicy p =
        FitGroupThresholds(d.s, d.y, d.a, FairnessCriterion::kDemographicParity, eps);
    EXPECT_GE(p.fit_accuracy, prev);
    prev = p.fit_accuracy;
  }
}

TEST(FitThresholds, IsDeterministicAndValidatesInput) {
  const Scored d = Biased(800, 2);
  const auto a = FitGroupThresholds(d.s, d.y, d.a, FairnessCriterion::kEqualizedOdds, 0.05);
  const auto b = FitGroupThresholds(d.s, d.y, d.a, FairnessCriterion::kEqualizedOdds, 0.05);
  EXPECT_EQ(a.thresholds, b.thresholds);
  std::vector<int> one(d.a.size(), 1);
  EXPECT_THROW(FitGroupThresholds(d.s, d.y, one, FairnessCriterion::kDemographicParity, 0.05), Error);
  std::vector<double> bad = d.s;
  bad[0] = 1.5;
  EXPECT_THROW(FitGroupThresholds(bad, d.y, d.a, FairnessCriterion::kDemographicParity, 0.05), Error);
  EXPECT_EQ(ParseCriterion("equalized_odds"), FairnessCriterion::kEqualizedOdds);
  EXPECT_FALSE(ParseCriterion("parity").has_value());
}

}  // namespace
}  // namespace fairaudit
