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
#include <set>
#include <string>
#include <vector>

#include "fairaudit/feature_select.hpp"
#include "fairaudit/rng.hpp"
#include "test_util.hpp"

namespace fairaudit {
namespace {

using testing::Table;
using testing::Var;

SelectionResult Manual(std::vector<std::vector<std::string>> sets) {
  SelectionResult r;
  r.candidates = {"x1", "x2", "x3", "x4"};
  for (std::size_t i = 0; i < sets.size(); ++i) {
    SelectorOutcome o;
    o.selector = kAllSelectors[i];
    o.selected = sets[i];
    r.selectors.push_back(o);
  }
  TallyVotes(r);
  return r;
}

TEST(Votes, MajorityArithmetic) {
  const SelectionResult r = Manual({{"x1", "x2"}, {"x1", "x3"}, {"x1", "x2"}, {"x2"}});
  EXPECT_EQ(r.votes.at("x1"), 3);
  EXPECT_EQ(r.votes.at("x2"), 3);
  EXPECT_EQ(r.votes.at("x3"), 1);
  EXPECT_EQ(r.final_set, (std::vector<std::string>{"x1", "x2"}));
}

TEST(Votes, UnanimityAndAbstention) {
  EXPECT_EQ(Manual({{"x3", "x1"}, {"x1", "x3"}, {"x3", "x1"}, {"x1", "x3"}}).final_set,
            (std::vector<std::string>{"x1", "x3"}));
  SelectionResult r;
  r.candidates = {"x1", "x2"};
  for (std::size_t i = 0; i < 4; ++i) {
    SelectorOutcome o;
    o.selector = kAllSelectors[i];
    o.selected = {"x1"};
    o.abstained = i == 0;
    r.selectors.push_back(o);
  }
  TallyVotes(r);
  EXPECT_EQ(r.votes.at("x1"), 3);
  EXPECT_THROW(Manual({{"nope"}}), Error);
}

TEST(Votes, MonotoneAndOrderFree) {
  Rng rng(4);
  const std::vector<std::string> names = {"x1", "x2", "x3", "x4"};
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<std::vector<std::string>> sets(4);
    for (auto& s : sets)
      for (const auto& n : names)
        if (rng.Bernoulli(0.5)) s.push_back(n);
    const SelectionResult base = Manual(sets);
    // Adding one vote never removes a variable.
    auto more = sets;
    const std::size_t who = rng.UniformIndex(4);
    const std::string extra = names[rng.UniformIndex(4)];
    if (std::find(more[who].begin(), more[who].end(), extra) == more[who].end())
      more[who].push_back(extra);
    const SelectionResult grown = Manual(more);
    for (const auto& v : base.final_set)
      EXPECT_NE(std::find(grown.final_set.begin(), grown.final_set.end(), v), grown.final_set.end());
    std::reverse(sets.begin(), sets.end());
    EXPECT_EQ(Manual(sets).final_set, base.final_set);
  }
}

LabeledTable Planted(std::size_t n, std::size_t informative, std::size_t noise, std::uint64_t seed) {
  Rng rng(seed);
  const std::size_t d = informative + noise;
  std::vector<std::vector<int>> cols(d, std::vector<int>(n));
  std::vector<Label> y(n);
  for (std::size_t r = 0; r < n; ++r) {
    double margin = 0.0;
    for (std::size_t c = 0; c < d; ++c) {
      cols[c][r] = 1 + static_cast<int>(rng.UniformIndex(3));
      if (c < informative) margin += cols[c][r] == 1 ? 1.2 : -0.6;
    }
    y[r] = rng.Bernoulli(1.0 / (1.0 + std::exp(-margin))) ? 1 : 0;
  }
  std::vector<VariableSpec> vars;
  for (std::size_t c = 0; c < d; ++c)
    vars.push_back(Var("V" + std::to_string(c), Role::kFeature, {1, 2, 3}));
  return LabeledTable{Table(vars, cols), y, Cohort::kInpatient};
}

SelectorConfig FastConfig() {
  SelectorConfig c;
  c.cv_folds = 3;
  c.forest.n_trees = 30;
  c.boost.rounds = 30;
  c.seed = 5;
  return c;
}

TEST(SelectFeatures, KeepsPlantedSignalAndDropsNoise) {
  const LabeledTable train = Planted(2000, 3, 7, 17);
  Diagnostics diag;
  const SelectionResult r = SelectFeatures(train, FastConfig(), &diag);
  ASSERT_EQ(r.selectors.size(), 4u);
  for (const auto& s : r.selectors) {
    EXPECT_FALSE(s.abstained) << s.error;
    EXPECT_EQ(s.ranked.size(), 10u);
    for (std::size_t i = 1; i < s.ranked.size(); ++i)
      EXPECT_GE(s.ranked[i - 1].second, s.ranked[i].second);
  }
  for (const char* v : {"V0", "V1", "V2"})
    EXPECT_NE(std::find(r.final_set.begin(), r.final_set.end(), v), r.final_set.end()) << v;
  EXPECT_LE(r.final_set.size(), 5u);
  EXPECT_TRUE(r.selectors[0].chosen_lambda.has_value());
  // The decision is reproducible.
  EXPECT_EQ(SelectFeatures(train, FastConfig()).final_set, r.final_set);
}

TEST(SelectFeatures, OneFailureAbstainsTwoFailuresThrow) {
  const LabeledTable train = Planted(600, 2, 3, 3);
  SelectorConfig c = FastConfig();
  c.tree.max_depth = 0;
  Diagnostics diag;
  const SelectionResult r = SelectFeatures(train, c, &diag);
  EXPECT_TRUE(r.selectors[1].abstained);
  EXPECT_FALSE(r.selectors[1].error.empty());
  EXPECT_FALSE(diag.empty());
  c.forest.n_trees = 0;
  try {
    SelectFeatures(train, c);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kTraining);
  }
}

TEST(SelectFeatures, RejectsDegenerateInput) {
  const LabeledTable train = Planted(100, 1, 1, 3);
  const std::vector<std::string> one = {"V0"};
  const LabeledTable narrow{train.table.SelectColumns(one), train.labels, train.cohort};
  EXPECT_THROW(SelectFeatures(narrow, FastConfig()), Error);
  SelectorConfig c = FastConfig();
  c.min_votes = 5;
  EXPECT_THROW(SelectFeatures(train, c), Error);
}

}  // namespace
}  // namespace fairaudit
