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

#include "fairaudit/tune.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fairaudit/parallel.hpp"

namespace fairaudit {

Model Train(const EncodedMatrix& data, std::span<const Label> labels, const LearnerParams& params,
            std::span<const double> weights) {
  return std::visit(
      [&](const auto& p) -> Model {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, TreeParams>) return TrainDecisionTree(data, labels, p, weights);
        else if constexpr (std::is_same_v<T, ForestParams>) return TrainRandomForest(data, labels, p, weights);
        else if constexpr (std::is_same_v<T, BoostParams>) return TrainGradientBoosting(data, labels, p, weights);
        else return TrainL1Logistic(data, labels, p, weights);
      },
      params);
}

std::string DescribeParams(const LearnerParams& params) {
  std::ostringstream os;
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, TreeParams>) {
          os << "decision_tree(max_depth=" << p.max_depth << ", min_leaf=" << p.min_leaf
             << ", min_gain=" << p.min_gain << ")";
        } else if constexpr (std::is_same_v<T, ForestParams>) {
          os << "random_forest(n_trees=" << p.n_trees << ", max_depth=" << p.max_depth
             << ", feature_fraction=" << p.feature_fraction
             << ", bootstrap=" << (p.bootstrap ? "true" : "false") << ")";
        } else if constexpr (std::is_same_v<T, BoostParams>) {
          os << "gradient_boosting(rounds=" << p.rounds << ", eta=" << p.learning_rate
             << ", max_depth=" << p.max_depth << ", lambda=" << p.lambda << ", growth="
             << (p.growth == TreeGrowth::kDepthWise ? "depth_wise" : "leaf_wise") << ")";
        } else {
          os << "l1_logistic(lambda1=" << p.lambda1 << ")";
        }
      },
      params);
  return os.str();
}

double Score(ScoringRule rule, std::span<const Label> labels, std::span<const double> scores) {
  if (labels.empty()) return 0.0;
  double s = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (rule == ScoringRule::kAccuracy) {
      s += ((scores[i] >= 0.5) == (labels[i] != 0)) ? 1.0 : 0.0;
    } else {
      const double p = std::clamp(scores[i], 1e-15, 1.0 - 1e-15);
      s += labels[i] ? std::log(p) : std::log(1.0 - p);
    }
  }
  return s / static_cast<double>(labels.size());
}

TuneResult Tune(const EncodedMatrix& data, std::span<const Label> labels,
                std::span<const LearnerParams> grid, const FoldPlan& folds, ScoringRule rule,
                std::span<const double> weights) {
  if (grid.empty()) throw InvalidArgument("tuning grid is empty");
  if (folds.fold_of_row.size() != data.rows())
    throw InvalidArgument("fold plan does not match the data");
  TuneResult result;
  result.cells.resize(grid.size());

  std::vector<std::vector<std::size_t>> train_rows(folds.k), test_rows(folds.k);
  for (std::size_t f = 0; f < folds.k; ++f) {
    train_rows[f] = folds.TrainRows(f);
    test_rows[f] = folds.TestRows(f);
  }

  ParallelFor(grid.size(), [&](std::size_t g) {
    CvCell& cell = result.cells[g];
    cell.params = grid[g];
    try {
      for (std::size_t f = 0; f < folds.k; ++f) {
        const EncodedMatrix train = data.SelectRows(train_rows[f]);
        const EncodedMatrix test = data.SelectRows(test_rows[f]);
        std::vector<Label> ytr, yte;
        std::vector<double> wtr;
        for (std::size_t r : train_rows[f]) {
          ytr.push_back(labels[r]);
          if (!weights.empty()) wtr.push_back(weights[r]);
        }
        for (std::size_t r : test_rows[f]) yte.push_back(labels[r]);
        const Model model = Train(train, ytr, grid[g], wtr);
        cell.fold_scores.push_back(Score(rule, yte, PredictScores(model, test)));
      }
      double s = 0.0;
      for (double x : cell.fold_scores) s += x;
      cell.mean_score = s / static_cast<double>(cell.fold_scores.size());
    } catch (const std::exception& e) {
      cell.failed = true;
      cell.error = e.what();
      cell.fold_scores.clear();
    }
  });

  bool found = false;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const CvCell& cell = result.cells[g];
    if (cell.failed) continue;
    if (!found || cell.mean_score > result.cells[result.best_index].mean_score) {
      result.best_index = g;
      found = true;
    }
  }
  if (!found) throw TrainingError("every tuning grid cell failed to train");
  result.best = grid[result.best_index];
  return result;
}

}  // namespace fairaudit
