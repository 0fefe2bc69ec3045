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

#ifndef FAIRAUDIT_FEATURE_SELECT_HPP_
#define FAIRAUDIT_FEATURE_SELECT_HPP_

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fairaudit/learners.hpp"
#include "fairaudit/schema.hpp"

namespace fairaudit {

enum class Selector { kL1Logistic, kDecisionTree, kRandomForest, kGradientBoosting };
inline constexpr std::array<Selector, 4> kAllSelectors = {
    Selector::kL1Logistic, Selector::kDecisionTree, Selector::kRandomForest,
    Selector::kGradientBoosting};
std::string_view SelectorName(Selector selector);

struct SelectorConfig {
  // Candidate penalties for the L1 selector, chosen by cross-validated log loss.
  std::vector<double> l1_lambdas = {1e-4, 1e-3, 1e-2, 1e-1, 1.0};
  std::size_t cv_folds = 5;
  L1Params l1;
  TreeParams tree;
  ForestParams forest;
  BoostParams boost;
  std::size_t min_votes = 3;
  std::uint64_t seed = 0;
};

struct SelectorOutcome {
  Selector selector = Selector::kL1Logistic;
  bool abstained = false;
  std::string error;
  // (variable, importance), highest first; ties keep candidate order.
  std::vector<std::pair<std::string, double>> ranked;
  std::vector<std::string> selected;
  std::optional<double> chosen_lambda;
};

struct SelectionResult {
  std::vector<std::string> candidates;
  std::vector<SelectorOutcome> selectors;
  std::map<std::string, int> votes;
  // Candidates with votes >= min_votes, in candidate order.
  std::vector<std::string> final_set;
  SelectorConfig config;
};

// Counts one vote per selected variable of every non-abstaining outcome.
// Names outside `candidates` raise InvalidArgument.
void TallyVotes(SelectionResult& result);

// Runs the four selectors (concurrently) and takes the vote. Tree-based
// selectors keep variables whose normalized importance is at least 1/d for d
// candidates; the L1 selector keeps variables with a nonzero weight. A
// failing selector abstains with a warning; two or more failures throw
// TrainingError.
SelectionResult SelectFeatures(const LabeledTable& train, const SelectorConfig& config,
                               Diagnostics* diag = nullptr);

}  // namespace fairaudit

#endif  // FAIRAUDIT_FEATURE_SELECT_HPP_
