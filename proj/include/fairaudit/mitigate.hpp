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

#ifndef FAIRAUDIT_MITIGATE_HPP_
#define FAIRAUDIT_MITIGATE_HPP_

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fairaudit/common.hpp"
#include "fairaudit/schema.hpp"

namespace fairaudit {

// Weight per row so that, under the weights, attribute and label are
// independent: w(a, y) = P(a) P(y) / P(a, y). Throws DataError when an
// (attribute, label) cell of an observed attribute value is empty.
std::vector<double> Reweigh(std::span<const Label> labels, std::span<const int> attribute);
std::vector<double> Reweigh(const LabeledTable& train, const std::string& variable);

enum class FairnessCriterion { kDemographicParity, kEqualizedOdds };
std::string_view CriterionName(FairnessCriterion criterion);
std::optional<FairnessCriterion> ParseCriterion(std::string_view name);

struct ThresholdPolicy {
  FairnessCriterion criterion = FairnessCriterion::kDemographicParity;
  double epsilon = 0.05;
  std::map<int, double> thresholds;
  // Single accuracy-optimal threshold on the fit data; applied to codes
  // missing from `thresholds`.
  double global_threshold = 0.5;
  double achieved_disparity = 0.0;
  double fit_accuracy = 0.0;
  bool feasible = true;
};

inline constexpr std::size_t kMaxThresholdGrid = 101;

// Candidate thresholds for one group: its distinct scores plus 1.0, or the
// 101 points k/100 when there are more distinct scores than that.
std::vector<double> ThresholdGrid(std::span<const double> group_scores);

// Per-group thresholds maximizing fit accuracy subject to the criterion's
// disparity bound. Demographic parity bounds the max pairwise selection-rate
// gap; equalized odds bounds max(FPRD, FNRD), with groups lacking negatives
// (positives) left out of the FPR (FNR) spread. Ties go to smaller
// disparity, then to lexicographically smaller thresholds.
ThresholdPolicy FitGroupThresholds(std::span<const double> scores, std::span<const Label> labels,
                                   std::span<const int> attribute, FairnessCriterion criterion,
                                   double epsilon);

// label = score >= threshold(group).
std::vector<Label> ApplyThresholds(const ThresholdPolicy& policy, std::span<const double> scores,
                                   std::span<const int> attribute,
                                   Diagnostics* diag = nullptr);

}  // namespace fairaudit

#endif  // FAIRAUDIT_MITIGATE_HPP_
