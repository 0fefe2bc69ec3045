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

#ifndef FAIRAUDIT_LEARNERS_HPP_
#define FAIRAUDIT_LEARNERS_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "fairaudit/encoding.hpp"

namespace fairaudit {

// Gini impurity 1 - p0^2 - p1^2 of a binary node.
double GiniImpurity(double negatives, double positives);

enum class TreeGrowth { kDepthWise, kLeafWise };

struct TreeParams {
  int max_depth = 6;
  std::size_t min_leaf = 1;
  // Minimum impurity decrease, as a fraction of the root's total weight.
  double min_gain = 0.0;
  // Fraction of source variables considered at each split (1 = all).
  double feature_fraction = 1.0;
  std::uint64_t seed = 0;
};

struct ForestParams {
  std::size_t n_trees = 100;
  int max_depth = 8;
  std::size_t min_leaf = 1;
  double feature_fraction = 0.5;
  bool bootstrap = true;
  std::uint64_t seed = 0;
};

struct BoostParams {
  std::size_t rounds = 100;
  double learning_rate = 0.1;
  int max_depth = 6;
  double lambda = 1.0;
  std::size_t min_leaf = 1;
  TreeGrowth growth = TreeGrowth::kDepthWise;
  // Leaf cap used by leaf-wise growth.
  std::size_t max_leaves = 31;
  std::uint64_t seed = 0;
};

struct L1Params {
  double lambda1 = 0.01;
  std::size_t max_iters = 1000;
  double tol = 1e-6;
};

struct TreeNode {
  // Split test: the row's indicator `column` is 1 -> `match`, else `other`.
  // Leaves have column = -1.
  std::int32_t column = -1;
  std::int32_t variable = -1;
  std::int32_t match = -1;
  std::int32_t other = -1;
  // Leaf score: positive fraction (classification) or margin (boosting).
  double value = 0.0;
  // Impurity (or loss) decrease achieved by this node's split.
  double gain = 0.0;
  double weight = 0.0;
  std::int32_t depth = 0;

  bool is_leaf() const { return column < 0; }
};

struct TreeModel {
  std::vector<TreeNode> nodes;
  int depth = 0;
  TreeParams params;
  EncodingPtr encoding;

  double Score(const EncodedMatrix& data, std::size_t row) const;
  std::size_t num_leaves() const;
};

struct ForestModel {
  std::vector<TreeModel> trees;
  ForestParams params;
  EncodingPtr encoding;
};

struct BoostedModel {
  // Leaf values already include the learning rate.
  std::vector<TreeModel> trees;
  double base_score = 0.0;
  BoostParams params;
  // Weighted mean training log-loss: entry 0 is the base score, entry i the
  // loss after round i.
  std::vector<double> loss_history;
  // Rounds whose step was shortened to keep the loss from rising.
  std::size_t damped_rounds = 0;
  EncodingPtr encoding;
};

struct SparseLinearModel {
  std::vector<double> weights;  // one per indicator column
  double intercept = 0.0;
  L1Params params;
  std::size_t iterations = 0;
  bool converged = false;
  EncodingPtr encoding;

  std::vector<std::size_t> Support() const;
};

using Model = std::variant<TreeModel, ForestModel, BoostedModel, SparseLinearModel>;

std::string ModelKind(const Model& model);
const EncodingPtr& ModelEncoding(const Model& model);

// Empty weights means unit weights. Weights must be positive.
TreeModel TrainDecisionTree(const EncodedMatrix& data, std::span<const Label> labels,
                            const TreeParams& params, std::span<const double> weights = {});
ForestModel TrainRandomForest(const EncodedMatrix& data, std::span<const Label> labels,
                              const ForestParams& params, std::span<const double> weights = {});
BoostedModel TrainGradientBoosting(const EncodedMatrix& data, std::span<const Label> labels,
                                   const BoostParams& params,
                                   std::span<const double> weights = {});
SparseLinearModel TrainL1Logistic(const EncodedMatrix& data, std::span<const Label> labels,
                                  const L1Params& params, std::span<const double> weights = {});

// Weighted mean logistic loss of a linear model (no penalty term).
double LogisticLoss(const SparseLinearModel& model, const EncodedMatrix& data,
                    std::span<const Label> labels, std::span<const double> weights = {});
// Gradient of LogisticLoss: element 0 is the intercept, then one per column.
std::vector<double> LogisticGradient(const SparseLinearModel& model, const EncodedMatrix& data,
                                     std::span<const Label> labels,
                                     std::span<const double> weights = {});

struct Predictions {
  std::vector<double> scores;
  std::vector<Label> labels;
};

// Scores in [0, 1]; label = score >= threshold. Throws DataError if the data
// was encoded with a different dictionary than the model.
Predictions Predict(const Model& model, const EncodedMatrix& data, double threshold = 0.5);
std::vector<double> PredictScores(const Model& model, const EncodedMatrix& data);

struct ImportanceVector {
  std::vector<std::string> variables;
  std::vector<double> scores;
  std::string method;
};

// Trees: summed split gain per source variable; linear: max |weight| over a
// variable's indicators. Normalized to sum 1 unless all zero.
ImportanceVector Importance(const Model& model);

}  // namespace fairaudit

#endif  // FAIRAUDIT_LEARNERS_HPP_
