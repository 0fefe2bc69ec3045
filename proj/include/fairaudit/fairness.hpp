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

#ifndef FAIRAUDIT_FAIRNESS_HPP_
#define FAIRAUDIT_FAIRNESS_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fairaudit/eval_metrics.hpp"
#include "fairaudit/schema.hpp"

namespace fairaudit {

struct GroupCell {
  int code = 0;
  std::string label;
  ConfusionCounts counts;
  std::uint64_t n() const { return counts.total(); }
};

// Per-category confusion counts of one protected variable, ordered by code.
// Categories with no rows are omitted.
struct GroupOutcomes {
  std::string variable;
  std::vector<GroupCell> groups;
  ConfusionCounts Total() const;
};

// `spec`, when given, supplies category labels.
GroupOutcomes ComputeGroupOutcomes(std::span<const Label> labels,
                                   std::span<const Label> predictions,
                                   std::span<const int> attribute,
                                   const std::string& variable = {},
                                   const VariableSpec* spec = nullptr);

// (TP + FP) / (TP + FP + TN + FN). Throws InvalidArgument for an empty group.
double SelectionRate(const ConfusionCounts& counts);
double OverallSelectionRate(const ConfusionCounts& counts);

// min SR / max SR over the groups. Throws InvalidArgument when there are no
// groups or every selection rate is zero.
double DemographicParityRatio(const GroupOutcomes& groups);
double DemographicParityRatio(std::span<const double> selection_rates);

struct RateDifferences {
  double fprd = 0.0;
  double fnrd = 0.0;
  double eod = 0.0;
  // Codes left out of FPR (no actual negatives) or FNR (no actual positives).
  std::vector<int> excluded_from_fpr;
  std::vector<int> excluded_from_fnr;
};

// FPRD = max FPR - min FPR, FNRD = max FNR - min FNR, EOD = max(FPRD, FNRD).
// Throws InvalidArgument if fewer than two groups are eligible for either
// rate; exclusions are reported through `diag`.
RateDifferences ComputeRateDifferences(const GroupOutcomes& groups, Diagnostics* diag = nullptr);

// One row of the group-level table. A metric that could not be computed is
// empty and `error` says why.
struct GroupAuditRow {
  std::string variable;
  std::string display_name;
  std::size_t groups = 0;
  std::optional<double> eod;
  std::optional<double> fprd;
  std::optional<double> fnrd;
  std::optional<double> osr;
  std::optional<double> dpr;
  std::string error;
};

std::vector<GroupAuditRow> GroupLevelAudit(std::span<const Label> predictions,
                                           std::span<const Label> labels,
                                           const CodedTable& test,
                                           std::span<const std::string> protected_variables,
                                           Diagnostics* diag = nullptr);

inline constexpr double kDefaultParityThreshold = 0.80;

struct SubgroupRow {
  int code = 0;
  std::string label;
  // One selection rate per audited model; the first is the reference model
  // for the parity ratio and the flag.
  std::vector<double> selection_rates;
  std::uint64_t count = 0;
  double parity_ratio = 0.0;
  bool flagged = false;
};

struct SubgroupAudit {
  std::string variable;
  std::string display_name;
  std::vector<std::string> models;
  double threshold = kDefaultParityThreshold;
  std::vector<SubgroupRow> rows;
};

// Builds rows from precomputed per-category rates: parity ratio = SR / max SR
// of the first model, flagged iff ratio < threshold. Rows with count <
// min_count are dropped before the maximum is taken.
std::vector<SubgroupRow> SubgroupRowsFromRates(std::vector<SubgroupRow> rows, double threshold,
                                               std::uint64_t min_count = 0);

// `model_predictions[m]` are model m's labels for the rows of `test`.
SubgroupAudit AuditSubgroups(std::span<const std::vector<Label>> model_predictions,
                             std::span<const std::string> model_names, const CodedTable& test,
                             const std::string& variable,
                             double threshold = kDefaultParityThreshold,
                             std::uint64_t min_count = 0);

enum class PointKind { kDisadvantaged, kPrivileged, kLowOutlier };
std::string_view PointKindName(PointKind kind);

struct BoxplotPoint {
  std::string label;
  double value = 0.0;
  PointKind kind = PointKind::kDisadvantaged;
};

// Tukey statistics over one variable's subgroup selection rates (first
// model). Quantiles use linear interpolation between order statistics;
// whiskers reach the most extreme rates within 1.5 IQR of the box.
struct BoxplotStats {
  std::string variable;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double lo_whisker = 0.0;
  double hi_whisker = 0.0;
  std::vector<BoxplotPoint> points;
};

// Linear-interpolation quantile of sorted values, q in [0, 1].
double Quantile(std::span<const double> sorted, double q);

BoxplotStats ComputeBoxplot(const SubgroupAudit& audit);
std::vector<BoxplotStats> BoxplotData(std::span<const SubgroupAudit> audits);

}  // namespace fairaudit

#endif  // FAIRAUDIT_FAIRNESS_HPP_
