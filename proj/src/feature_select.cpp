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

#include "fairaudit/feature_select.hpp"

#include <algorithm>
#include <set>

#include "fairaudit/encoding.hpp"
#include "fairaudit/parallel.hpp"
#include "fairaudit/rng.hpp"
#include "fairaudit/sampler.hpp"
#include "fairaudit/tune.hpp"

namespace fairaudit {

std::string_view SelectorName(Selector selector) {
  switch (selector) {
    case Selector::kL1Logistic: return "l1_logistic";
    case Selector::kDecisionTree: return "decision_tree";
    case Selector::kRandomForest: return "random_forest";
    default: return "gradient_boosting";
  }
}

void TallyVotes(SelectionResult& result) {
  const std::set<std::string> known(result.candidates.begin(), result.candidates.end());
  result.votes.clear();
  for (const std::string& c : result.candidates) result.votes[c] = 0;
  for (const SelectorOutcome& s : result.selectors) {
    if (s.abstained) continue;
    const std::set<std::string> unique(s.selected.begin(), s.selected.end());
    for (const std::string& v : unique) {
      if (!known.count(v))
        throw InvalidArgument(std::string(SelectorName(s.selector)) + " selected unknown variable " + v);
      ++result.votes[v];
    }
  }
  result.final_set.clear();
  for (const std::string& c : result.candidates)
    if (result.votes[c] >= static_cast<int>(result.config.min_votes)) result.final_set.push_back(c);
}

namespace {

void Rank(const ImportanceVector& imp, SelectorOutcome& out) {
  for (std::size_t i = 0; i < imp.variables.size(); ++i)
    out.ranked.emplace_back(imp.variables[i], imp.scores[i]);
  std::stable_sort(out.ranked.begin(), out.ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
}

SelectorOutcome RunSelector(Selector selector, const EncodedMatrix& data,
                            std::span<const Label> labels, const SelectorConfig& config) {
  SelectorOutcome out;
  out.selector = selector;
  const std::uint64_t seed = DeriveSeed(config.seed, static_cast<std::uint64_t>(selector));
  if (selector == Selector::kL1Logistic) {
    if (config.l1_lambdas.empty()) throw InvalidArgument("l1 selector needs at least one lambda");
    std::vector<LearnerParams> grid;
    for (double lambda : config.l1_lambdas) {
      L1Params p = config.l1;
      p.lambda1 = lambda;
      grid.emplace_back(p);
    }
    const FoldPlan folds = StratifiedKFold(labels, config.cv_folds, seed);
    const TuneResult tuned = Tune(data, labels, grid, folds, ScoringRule::kNegLogLoss);
    const L1Params best = std::get<L1Params>(tuned.best);
    out.chosen_lambda = best.lambda1;
    const Model model = TrainL1Logistic(data, labels, best);
    const ImportanceVector imp = Importance(model);
    Rank(imp, out);
    for (std::size_t i = 0; i < imp.variables.size(); ++i)
      if (imp.scores[i] != 0.0) out.selected.push_back(imp.variables[i]);
    return out;
  }
  Model model;
  if (selector == Selector::kDecisionTree) {
    TreeParams p = config.tree;
    p.seed = seed;
    model = TrainDecisionTree(data, labels, p);
  } else if (selector == Selector::kRandomForest) {
    ForestParams p = config.forest;
    p.seed = seed;
    model = TrainRandomForest(data, labels, p);
  } else {
    BoostParams p = config.boost;
    p.seed = seed;
    model = TrainGradientBoosting(data, labels, p);
  }
  const ImportanceVector imp = Importance(model);
  Rank(imp, out);
  const double share = 1.0 / static_cast<double>(imp.variables.size());
  for (std::size_t i = 0; i < imp.variables.size(); ++i)
    if (imp.scores[i] >= share) out.selected.push_back(imp.variables[i]);
  return out;
}

}  // namespace

SelectionResult SelectFeatures(const LabeledTable& train, const SelectorConfig& config,
                               Diagnostics* diag) {
  if (train.rows() == 0) throw InvalidArgument("feature selection on an empty table");
  if (train.table.cols() < 2) throw InvalidArgument("feature selection needs two or more variables");
  if (config.min_votes < 1 || config.min_votes > kAllSelectors.size())
    throw InvalidArgument("min_votes must lie in [1, 4]");
  SelectionResult result;
  result.config = config;
  for (const VariableSpec& v : train.table.schema().variables()) result.candidates.push_back(v.name);

  const EncodedMatrix data(train.table);
  result.selectors.resize(kAllSelectors.size());
  ParallelFor(kAllSelectors.size(), [&](std::size_t s) {
    try {
      result.selectors[s] = RunSelector(kAllSelectors[s], data, train.labels, config);
    } catch (const std::exception& e) {
      SelectorOutcome failed;
      failed.selector = kAllSelectors[s];
      failed.abstained = true;
      failed.error = e.what();
      result.selectors[s] = std::move(failed);
    }
  });
  std::size_t failures = 0;
  for (const SelectorOutcome& s : result.selectors) {
    if (!s.abstained) continue;
    ++failures;
    Warn(diag, "feature selector " + std::string(SelectorName(s.selector)) +
                   " abstained: " + s.error);
  }
  if (failures >= 2)
    throw TrainingError("feature selection failed: " + std::to_string(failures) +
                        " selectors abstained");
  TallyVotes(result);
  return result;
}

}  // namespace fairaudit
