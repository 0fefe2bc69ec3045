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
#include <vector>

#include "fairaudit/eval_metrics.hpp"
#include "fairaudit/rng.hpp"

namespace fairaudit {
namespace {

ConfusionCounts Counts(std::uint64_t tp, std::uint64_t fp, std::uint64_t tn, std::uint64_t fn) {
  ConfusionCounts c;
  c.tp = tp;
  c.fp = fp;
  c.tn = tn;
  c.fn = fn;
  return c;
}

TEST(Confusion, CountsPartitionTheRows) {
  EXPECT_EQ(Confusion(std::vector<Label>{1, 1, 0, 0}, std::vector<Label>{1, 0, 0, 1}),
            Counts(1, 1, 1, 1));
  EXPECT_EQ(Confusion(std::vector<Label>{1, 0}, std::vector<Label>{1, 1}), Counts(1, 1, 0, 0));
  const std::vector<Label> y = {1, 0, 1, 1, 0};
  const ConfusionCounts same = Confusion(y, y);
  EXPECT_EQ(same.fp + same.fn, 0u);
  EXPECT_EQ(same.total(), y.size());
}

TEST(Confusion, RejectsMismatchedOrEmptyInput) {
  EXPECT_THROW(Confusion(std::vector<Label>{1}, std::vector<Label>{1, 0}), Error);
  EXPECT_THROW(Confusion(std::vector<Label>{}, std::vector<Label>{}), Error);
}

TEST(Report, SpecExamples) {
  const ClassificationReport perfect = MakeClassificationReport(Counts(5, 0, 5, 0));
  EXPECT_EQ(perfect.accuracy, 1.0);
  EXPECT_EQ(perfect.precision, 1.0);
  EXPECT_EQ(perfect.recall, 1.0);
  EXPECT_EQ(perfect.f1, 1.0);
  const ClassificationReport even = MakeClassificationReport(Counts(1, 1, 1, 1));
  EXPECT_EQ(even.accuracy, 0.5);
  EXPECT_EQ(even.precision, 0.5);
  EXPECT_EQ(even.recall, 0.5);
  EXPECT_EQ(even.f1, 0.5);
}

TEST(Report, ZeroDenominatorsResolveToZeroAndAreNamed) {
  // Nothing predicted positive: positive-class precision is 0/0.
  const ClassificationReport r = MakeClassificationReport(Counts(0, 0, 3, 2));
  EXPECT_EQ(r.class_precision[1], 0.0);
  EXPECT_NE(std::find(r.zero_division.begin(), r.zero_division.end(), "precision[1]"),
            r.zero_division.end());
}

TEST(Report, IdentitiesHoldOnRandomCounts) {
  Rng rng(42);
  for (int i = 0; i < 2000; ++i) {
    const ConfusionCounts c = Counts(rng.UniformIndex(50), rng.UniformIndex(50),
                                     rng.UniformIndex(50), rng.UniformIndex(50) + 1);
    const ClassificationReport r = MakeClassificationReport(c);
    const double acc = static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
    EXPECT_DOUBLE_EQ(r.accuracy, acc);
    EXPECT_NEAR(r.recall, r.accuracy, 1e-12);
    for (double v : {r.precision, r.recall, r.f1}) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
    // Swapping which class is called positive leaves the weighted figures alone.
    const ClassificationReport s = MakeClassificationReport(Counts(c.tn, c.fn, c.tp, c.fp));
    EXPECT_NEAR(s.accuracy, r.accuracy, 1e-12);
    EXPECT_NEAR(s.precision, r.precision, 1e-12);
    EXPECT_NEAR(s.f1, r.f1, 1e-12);
  }
}

TEST(Confusion, InvariantUnderRowPermutation) {
  Rng rng(3);
  std::vector<Label> y(300), p(300);
  for (std::size_t i = 0; i < y.size(); ++i) {
    y[i] = rng.Bernoulli(0.4);
    p[i] = rng.Bernoulli(0.6);
  }
  const ConfusionCounts before = Confusion(y, p);
  std::vector<std::size_t> perm(y.size());
  for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
  rng.Shuffle(std::span<std::size_t>(perm));
  std::vector<Label> y2, p2;
  for (auto i : perm) {
    y2.push_back(y[i]);
    p2.push_back(p[i]);
  }
  EXPECT_EQ(Confusion(y2, p2), before);
}

}  // namespace
}  // namespace fairaudit
