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

#ifndef FAIRAUDIT_TUNE_HPP_
#define FAIRAUDIT_TUNE_HPP_

#include <span>
#include <string>
#include <variant>
#include <vector>

#include "fairaudit/learners.hpp"
#include "fairaudit/sampler.hpp"

namespace fairaudit {

using LearnerParams = std::variant<TreeParams, ForestParams, BoostParams, L1Params>;

Model Train(const EncodedMatrix& data, std::span<const Label> labels, const LearnerParams& params,
            std::span<const double> weights = {});

std::string DescribeParams(const LearnerParams& params);

enum class ScoringRule { kAccuracy, kNegLogLoss };

struct CvCell {
  LearnerParams params;
  std::vector<double> fold_scores;
  double mean_score = 0.0;
  bool failed = false;
  std::string error;
};

struct TuneResult {
  std::size_t best_index = 0;
  LearnerParams best;
  std::vector<CvCell> cells;
};

// Grid search by mean cross-validated score (higher is better). A cell whose
// training throws is marked failed and skipped; ties go to the earlier grid
// entry. Throws TrainingError if every cell fails.
TuneResult Tune(const EncodedMatrix& data, std::span<const Label> labels,
                std::span<const LearnerParams> grid, const FoldPlan& folds,
                ScoringRule rule = ScoringRule::kAccuracy,
                std::span<const double> weights = {});

double Score(ScoringRule rule, std::span<const Label> labels, std::span<const double> scores);

}  // namespace fairaudit

#endif  // FAIRAUDIT_TUNE_HPP_
