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
#include <numeric>
#include <vector>

#include "fairaudit/encoding.hpp"
#include "fairaudit/learners.hpp"
#include "fairaudit/mitigate.hpp"
#include "fairaudit/model_io.hpp"
#include "fairaudit/rng.hpp"
#include "fairaudit/sampler.hpp"
#include "fairaudit/synth.hpp"
#include "fairaudit/tune.hpp"
#include "test_util.hpp"

namespace fairaudit {
namespace {

using testing::Table;
using testing::Var;

struct Data {
  EncodedMatrix x;
  std::vector<Label> y;
};

// `informative` binary variables drive a logistic label; `noise` variables
// are independent of it.
Data Planted(std::size_t n, std::size_t informative, std::size_t noise, double strength,
             std::uint64_t seed) {
  Rng rng(seed);
  const std::size_t d = informative + noise;
  std::vector<std::vector<int>> cols(d, std::vector<int>(n));
  std::vector<Label> y(n);
  for (std::size_t r = 0; r < n; ++r) {
    double margin = 0.0;
    for (std::size_t c = 0; c < d; ++c) {
      cols[c][r] = rng.Bernoulli(0.5) ? 1 : 2;
      if (c < informative) margin += cols[c][r] == 1 ? strength : -strength;
    }
    y[r] = rng.Bernoulli(1.0 / (1.0 + std::exp(-margin))) ? 1 : 0;
  }
  std::vector<VariableSpec> vars;
  for (std::size_t c = 0; c < d; ++c)
    vars.push_back(Var("V" + std::to_string(c), Role::kFeature, {1, 2}));
  return {EncodedMatrix(Table(vars, cols)), y};
}

// Fixed-seed separable benchmark: five features that each copy the label
// with probability 0.9.
struct Benchmark {
  EncodedMatrix train, test;
  std::vector<Label> ytrain, ytest;
};

Benchmark SeparableBenchmark() {
  const SynthData d = Generate(TwoGroupConfig(2000, 0.5, 0.5, 5, 0.9, 0.0, 2024));
  const LabeledTable all = d.Labeled();
  const SplitIndices s = StratifiedSplit(all.labels, 0.75, 7);
  const EncodedMatrix x(all.table);
  Benchmark b{x.SelectRows(s.train), x.SelectRows(s.test), {}, {}};
  for (auto r : s.train) b.ytrain.push_back(all.labels[r]);
  for (auto r : s.test) b.ytest.push_back(all.labels[r]);
  return b;
}

double Accuracy(const std::vector<Label>& a, const std::vector<Label>& b) {
  std::size_t hit = 0;
  for (std::size_t i = 0; i < a.size(); ++i) hit += a[i] == b[i];
  return static_cast<double>(hit) / static_cast<double>(a.size());
}

double LogLoss(const std::vector<double>& p, const std::vector<Label>& y) {
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s -= std::log(y[i] ? p[i] : 1.0 - p[i]);
  return s / static_cast<double>(p.size());
}

TEST(Gini, MatchesClosedForm) {
  EXPECT_DOUBLE_EQ(GiniImpurity(2, 2), 0.5);
  EXPECT_DOUBLE_EQ(GiniImpurity(4, 0), 0.0);
  EXPECT_DOUBLE_EQ(GiniImpurity(3, 1), 0.375);
  EXPECT_THROW(GiniImpurity(0, 0), Error);
}

TEST(DecisionTree, SeparatingIndicatorGivesDepthOneTree) {
  const EncodedMatrix x(Table({Var("A", Role::kFeature, {1, 2}), Var("B", Role::kFeature, {1, 2})},
                              {{1, 1, 2, 2, 1, 2}, {1, 2, 1, 2, 2, 1}}));
  const std::vector<Label> y = {1, 1, 0, 0, 1, 0};
  const TreeModel t = TrainDecisionTree(x, y, TreeParams{});
  EXPECT_EQ(t.depth, 1);
  EXPECT_EQ(Predict(t, x).labels, y);
}

TEST(DecisionTree, ConstantLabelsGiveOneLeaf) {
  const EncodedMatrix x(Table({Var("A", Role::kFeature, {1, 2})}, {{1, 2, 1}}));
  const TreeModel t = TrainDecisionTree(x, std::vector<Label>{1, 1, 1}, TreeParams{});
  ASSERT_EQ(t.nodes.size(), 1u);
  EXPECT_DOUBLE_EQ(t.nodes[0].value, 1.0);
}

TEST(DecisionTree, RootSplitIsTheExhaustiveBest) {
  const Data d = Planted(200, 1, 6, 2.0, 31);
  const TreeModel t = TrainDecisionTree(d.x, d.y, TreeParams{});
  // Exhaustive scan of every indicator test at the root.
  const double n = static_cast<double>(d.y.size());
  double pos = 0;
  for (auto v : d.y) pos += v;
  const double parent = n * GiniImpurity(n - pos, pos);
  double best = -1.0;
  std::uint32_t best_col = 0;
  for (std::uint32_t c = 0; c < d.x.encoding().num_columns(); ++c) {
    double m = 0, mp = 0;
    for (std::size_t r = 0; r < d.y.size(); ++r)
      if (d.x.Indicator(r, c)) {
        ++m;
        mp += d.y[r];
      }
    if (m == 0 || m == n) continue;
    const double gain =
        parent - m * GiniImpurity(m - mp, mp) - (n - m) * GiniImpurity(n - m - (pos - mp), pos - mp);
    if (gain > best + 1e-12) {
      best = gain;
      best_col = c;
    }
  }
  EXPECT_EQ(d.x.encoding().columns()[best_col].variable, 0u);
  EXPECT_EQ(t.nodes[0].variable, 0);
  EXPECT_EQ(d.x.encoding().columns()[t.nodes[0].column].variable,
            d.x.encoding().columns()[best_col].variable);
}

TEST(DecisionTree, RejectsBadParams) {
  const Data d = Planted(20, 1, 1, 1.0, 1);
  TreeParams p;
  p.max_depth = 0;
  EXPECT_THROW(TrainDecisionTree(d.x, d.y, p), Error);
  p = TreeParams{};
  p.min_leaf = 50;
  EXPECT_THROW(TrainDecisionTree(d.x, d.y, p), Error);
  EXPECT_THROW(TrainDecisionTree(d.x, d.y, TreeParams{}, std::vector<double>(20, -1.0)), Error);
}

TEST(RandomForest, OneTreeWithoutBootstrapIsTheTree) {
  const Data d = Planted(300, 3, 5, 1.0, 8);
  ForestParams fp;
  fp.n_trees = 1;
  fp.bootstrap = false;
  fp.feature_fraction = 1.0;
  fp.max_depth = 5;
  fp.min_leaf = 3;
  fp.seed = 44;
  TreeParams tp;
  tp.max_depth = 5;
  tp.min_leaf = 3;
  tp.seed = 44;
  const ForestModel f = TrainRandomForest(d.x, d.y, fp);
  const TreeModel t = TrainDecisionTree(d.x, d.y, tp);
  EXPECT_EQ(PredictScores(f, d.x), PredictScores(t, d.x));
}

TEST(RandomForest, FractionalWeightsTrainCleanly) {
  const SynthData d = Generate(TwoGroupConfig(4000, 0.65, 0.35, 5, 0.6, 0.1, 11));
  const LabeledTable t = d.Labeled();
  const std::vector<double> w = Reweigh(t, "RACE");
  ForestParams fp;
  fp.n_trees = 20;
  fp.seed = 3;
  const EncodedMatrix x(t.table);
  const ForestModel f = TrainRandomForest(x, t.labels, fp, w);
  for (double s : PredictScores(f, x)) ASSERT_TRUE(s >= 0.0 && s <= 1.0);
}

TEST(RandomForest, ScoreIsMeanOfTreeScoresAndSeedIsDeterministic) {
  const Data d = Planted(300, 3, 5, 1.0, 12);
  ForestParams fp;
  fp.n_trees = 7;
  fp.seed = 3;
  const ForestModel f = TrainRandomForest(d.x, d.y, fp);
  const auto scores = PredictScores(f, d.x);
  for (std::size_t r = 0; r < d.y.size(); ++r) {
    double mean = 0.0;
    for (const auto& t : f.trees) mean += t.Score(d.x, r);
    EXPECT_NEAR(scores[r], mean / 7.0, 1e-12);
  }
  EXPECT_EQ(ModelToJson(f).dump(), ModelToJson(TrainRandomForest(d.x, d.y, fp)).dump());
}

TEST(GradientBoosting, OneStepReducesLossOnSeparableRows) {
  const EncodedMatrix x(Table({Var("A", Role::kFeature, {1, 2})}, {{1, 1, 2, 2}}));
  const std::vector<Label> y = {1, 1, 0, 0};
  BoostParams p;
  p.rounds = 1;
  p.learning_rate = 1.0;
  p.max_depth = 8;
  p.lambda = 0.0;
  const BoostedModel m = TrainGradientBoosting(x, y, p);
  ASSERT_EQ(m.loss_history.size(), 2u);
  EXPECT_LT(m.loss_history[1], m.loss_history[0]);
  p.learning_rate = 0.0;
  EXPECT_THROW(TrainGradientBoosting(x, y, p), Error);
}

TEST(GradientBoosting, TrainingLossNeverRises) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const Data d = Planted(500, 4, 4, 0.8, seed);
    for (TreeGrowth growth : {TreeGrowth::kDepthWise, TreeGrowth::kLeafWise}) {
      BoostParams p;
      p.rounds = 40;
      p.learning_rate = 1.0;
      p.lambda = 0.0;
      p.growth = growth;
      p.seed = seed;
      const BoostedModel m = TrainGradientBoosting(d.x, d.y, p);
      for (std::size_t i = 1; i < m.loss_history.size(); ++i)
        ASSERT_LE(m.loss_history[i], m.loss_history[i - 1] + 1e-12) << "round " << i;
      EXPECT_NEAR(LogLoss(PredictScores(m, d.x), d.y), m.loss_history.back(), 1e-9);
    }
  }
}

TEST(L1Logistic, UnpenalizedWeightHasTheRightSign) {
  const EncodedMatrix x(Table({Var("A", Role::kFeature, {1, 2})}, {{1, 1, 1, 2, 2, 2, 1, 2}}));
  const std::vector<Label> y = {1, 1, 0, 0, 0, 1, 1, 0};
  L1Params p;
  p.lambda1 = 0.0;
  const SparseLinearModel m = TrainL1Logistic(x, y, p);
  // Indicator for code 1 raises the odds relative to code 2.
  EXPECT_GT(m.weights[0] - m.weights[1], 0.0);
}

TEST(L1Logistic, HugePenaltyLeavesOnlyTheBaseRate) {
  const Data d = Planted(400, 3, 3, 1.0, 5);
  L1Params p;
  p.lambda1 = 1e6;
  const SparseLinearModel m = TrainL1Logistic(d.x, d.y, p);
  EXPECT_TRUE(m.Support().empty());
  const double rate =
      static_cast<double>(std::count(d.y.begin(), d.y.end(), 1)) / static_cast<double>(d.y.size());
  EXPECT_NEAR(m.intercept, std::log(rate / (1.0 - rate)), 1e-6);
  const ImportanceVector imp = Importance(m);
  EXPECT_TRUE(std::all_of(imp.scores.begin(), imp.scores.end(), [](double s) { return s == 0.0; }));
}

TEST(L1Logistic, ModeratePenaltyRecoversPlantedSupport) {
  const Data d = Planted(3000, 5, 20, 0.8, 77);
  L1Params p;
  p.lambda1 = 0.02;
  const SparseLinearModel m = TrainL1Logistic(d.x, d.y, p);
  const ImportanceVector imp = Importance(m);
  for (std::size_t v = 0; v < 5; ++v) EXPECT_GT(imp.scores[v], 0.0) << "informative V" << v;
  std::size_t noise_kept = 0;
  for (std::size_t v = 5; v < 25; ++v) noise_kept += imp.scores[v] > 0.0;
  EXPECT_LE(noise_kept, 2u);
}

TEST(L1Logistic, GradientMatchesFiniteDifferences) {
  const Data d = Planted(300, 3, 3, 1.0, 19);
  Rng rng(5);
  SparseLinearModel m;
  m.encoding = d.x.encoding_ptr();
  for (int trial = 0; trial < 5; ++trial) {
    m.weights.assign(d.x.encoding().num_columns(), 0.0);
    for (auto& w : m.weights) w = rng.Uniform01() * 2.0 - 1.0;
    m.intercept = rng.Uniform01() - 0.5;
    const auto grad = LogisticGradient(m, d.x, d.y);
    const double h = 1e-5;
    for (std::size_t j = 0; j < grad.size(); ++j) {
      SparseLinearModel up = m, down = m;
      if (j == 0) {
        up.intercept += h;
        down.intercept -= h;
      } else {
        up.weights[j - 1] += h;
        down.weights[j - 1] -= h;
      }
      const double fd = (LogisticLoss(up, d.x, d.y) - LogisticLoss(down, d.x, d.y)) / (2 * h);
      const double scale = std::max({std::abs(fd), std::abs(grad[j]), 1e-8});
      EXPECT_LE(std::abs(fd - grad[j]) / scale, 1e-4) << "coordinate " << j;
    }
  }
}

TEST(L1Logistic, GradientVanishesAtTheUnpenalizedSolution) {
  const Data d = Planted(400, 2, 2, 1.0, 23);
  L1Params p;
  p.lambda1 = 0.0;
  p.tol = 1e-8;
  p.max_iters = 5000;
  const SparseLinearModel m = TrainL1Logistic(d.x, d.y, p);
  const auto grad = LogisticGradient(m, d.x, d.y);
  double norm = 0.0;
  for (double g : grad) norm = std::max(norm, std::abs(g));
  EXPECT_LT(norm, 10 * p.tol);
}

TEST(Learners, SeparableBenchmarkIsLearnedByEveryLearner) {
  const Benchmark b = SeparableBenchmark();
  const std::vector<LearnerParams> all = {TreeParams{}, ForestParams{}, BoostParams{}, L1Params{}};
  for (const auto& params : all) {
    const Model m = Train(b.train, b.ytrain, params);
    EXPECT_GE(Accuracy(Predict(m, b.test).labels, b.ytest), 0.95) << DescribeParams(params);
  }
}

TEST(Learners, ForestAndBoostingAreCloseOnTheBenchmark) {
  const Benchmark b = SeparableBenchmark();
  TreeParams tp;
  tp.seed = 1;
  ForestParams fp;
  fp.seed = 1;
  BoostParams bp;
  bp.seed = 1;
  const double tree = Accuracy(Predict(TrainDecisionTree(b.train, b.ytrain, tp), b.test).labels, b.ytest);
  const double forest = Accuracy(Predict(TrainRandomForest(b.train, b.ytrain, fp), b.test).labels, b.ytest);
  const double boost = Accuracy(Predict(TrainGradientBoosting(b.train, b.ytrain, bp), b.test).labels, b.ytest);
  EXPECT_GE(forest, tree - 0.02);
  EXPECT_NEAR(boost, forest, 0.03);
}

TEST(Predict, EdgeCasesAndContracts) {
  const Data d = Planted(100, 2, 2, 1.0, 4);
  TreeModel leaf;
  leaf.nodes.push_back(TreeNode{});
  leaf.nodes[0].value = 0.8;
  leaf.encoding = d.x.encoding_ptr();
  const Predictions p = Predict(leaf, d.x);
  EXPECT_TRUE(std::all_of(p.labels.begin(), p.labels.end(), [](Label l) { return l == 1; }));
  const Predictions none = Predict(leaf, d.x.SelectRows(std::vector<std::size_t>{}));
  EXPECT_TRUE(none.scores.empty() && none.labels.empty());
  const Data other = Planted(10, 1, 1, 1.0, 4);
  EXPECT_THROW(Predict(leaf, other.x), Error);
}

TEST(Predict, ScoresAreBoundedAndRowWise) {
  const Data d = Planted(200, 3, 3, 1.0, 14);
  std::vector<std::size_t> perm(d.y.size());
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(2);
  rng.Shuffle(std::span<std::size_t>(perm));
  const EncodedMatrix shuffled = d.x.SelectRows(perm);
  const std::vector<LearnerParams> all = {TreeParams{}, ForestParams{}, BoostParams{}, L1Params{}};
  for (const auto& params : all) {
    const Model m = Train(d.x, d.y, params);
    const auto s = PredictScores(m, d.x);
    const auto t = PredictScores(m, shuffled);
    for (std::size_t i = 0; i < perm.size(); ++i) {
      ASSERT_GE(s[i], 0.0);
      ASSERT_LE(s[i], 1.0);
      ASSERT_EQ(t[i], s[perm[i]]);
    }
  }
}

TEST(Importance, SingleSplitConcentratesOnItsVariable) {
  const EncodedMatrix x(Table({Var("A", Role::kFeature, {1, 2}), Var("B", Role::kFeature, {1, 2})},
                              {{1, 1, 2, 2}, {1, 2, 1, 2}}));
  TreeParams p;
  p.max_depth = 1;
  const ImportanceVector imp = Importance(TrainDecisionTree(x, std::vector<Label>{1, 1, 0, 0}, p));
  EXPECT_EQ(imp.scores, (std::vector<double>{1.0, 0.0}));
}

TEST(Importance, PlantedSignalRanksAboveNoiseForMostLearners) {
  const Data d = Planted(1500, 3, 6, 1.0, 61);
  L1Params l1;
  l1.lambda1 = 0.01;
  const std::vector<LearnerParams> all = {TreeParams{}, ForestParams{}, BoostParams{}, l1};
  int agree = 0;
  for (const auto& params : all) {
    const ImportanceVector imp = Importance(Train(d.x, d.y, params));
    const double min_signal = *std::min_element(imp.scores.begin(), imp.scores.begin() + 3);
    const double max_noise = *std::max_element(imp.scores.begin() + 3, imp.scores.end());
    agree += min_signal > max_noise;
  }
  EXPECT_GE(agree, 3);
}

TEST(Tune, GridRulesHold) {
  const Data d = Planted(200, 2, 2, 1.0, 9);
  const FoldPlan folds = StratifiedKFold(d.y, 3, 1);
  TreeParams good;
  good.max_depth = 3;
  TreeParams broken;
  broken.max_depth = 0;
  const std::vector<LearnerParams> one = {good};
  EXPECT_EQ(Tune(d.x, d.y, one, folds).best_index, 0u);
  const std::vector<LearnerParams> with_broken = {broken, good};
  const TuneResult r = Tune(d.x, d.y, with_broken, folds);
  EXPECT_TRUE(r.cells[0].failed);
  EXPECT_EQ(r.best_index, 1u);
  const std::vector<LearnerParams> twins = {good, good};
  EXPECT_EQ(Tune(d.x, d.y, twins, folds).best_index, 0u);
  const std::vector<LearnerParams> all_broken = {broken};
  EXPECT_THROW(Tune(d.x, d.y, all_broken, folds), Error);
}

TEST(ModelIo, SummariesRoundTripWithIdenticalPredictions) {
  const Data d = Planted(200, 2, 3, 1.0, 10);
  const std::vector<LearnerParams> all = {TreeParams{}, ForestParams{}, BoostParams{}, L1Params{}};
  for (const auto& params : all) {
    const Model m = Train(d.x, d.y, params);
    const Model back = ModelFromJson(nlohmann::json::parse(ModelToJson(m).dump()));
    EXPECT_EQ(PredictScores(back, d.x), PredictScores(m, d.x)) << ModelKind(m);
    EXPECT_EQ(ModelToJson(back).dump(), ModelToJson(m).dump());
  }
  const auto params = LearnerParamsFromJson(nlohmann::json::parse(R"({"learner":"gradient_boosting","rounds":7})"));
  EXPECT_EQ(std::get<BoostParams>(params).rounds, 7u);
  EXPECT_THROW(LearnerParamsFromJson(nlohmann::json::parse(R"({"learner":"random_forest","trees":7})")), Error);
}

}  // namespace
}  // namespace fairaudit
