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

#include "fairaudit/fairness.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace fairaudit {

ConfusionCounts GroupOutcomes::Total() const {
  ConfusionCounts t;
  for (const GroupCell& g : groups) t += g.counts;
  return t;
}

GroupOutcomes ComputeGroupOutcomes(std::span<const Label> labels,
                                   std::span<const Label> predictions,
                                   std::span<const int> attribute, const std::string& variable,
                                   const VariableSpec* spec) {
  if (labels.size() != predictions.size() || labels.size() != attribute.size())
    throw InvalidArgument("labels, predictions and attribute differ in length");
  std::map<int, ConfusionCounts> by_code;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (spec && !spec->IsKnownCode(attribute[i]))
      throw DataError("attribute " + variable + " has unknown code " +
                      std::to_string(attribute[i]));
    ConfusionCounts& c = by_code[attribute[i]];
    const bool y = labels[i] != 0;
    const bool p = predictions[i] != 0;
    if (y && p) ++c.tp;
    else if (!y && p) ++c.fp;
    else if (!y && !p) ++c.tn;
    else ++c.fn;
  }
  GroupOutcomes out;
  out.variable = variable;
  for (const auto& [code, counts] : by_code) {
    GroupCell cell;
    cell.code = code;
    cell.label = spec ? spec->LabelOf(code) : std::to_string(code);
    cell.counts = counts;
    out.groups.push_back(std::move(cell));
  }
  return out;
}

double SelectionRate(const ConfusionCounts& counts) {
  if (counts.total() == 0) throw InvalidArgument("selection rate of an empty group");
  return static_cast<double>(counts.tp + counts.fp) / static_cast<double>(counts.total());
}

double OverallSelectionRate(const ConfusionCounts& counts) { return SelectionRate(counts); }

double DemographicParityRatio(std::span<const double> selection_rates) {
  if (selection_rates.empty()) throw InvalidArgument("demographic parity ratio of no groups");
  const auto [lo, hi] = std::minmax_element(selection_rates.begin(), selection_rates.end());
  if (!(*hi > 0.0))
    throw InvalidArgument("demographic parity ratio undefined: every selection rate is zero");
  return *lo / *hi;
}

double DemographicParityRatio(const GroupOutcomes& groups) {
  std::vector<double> rates;
  for (const GroupCell& g : groups.groups) rates.push_back(SelectionRate(g.counts));
  return DemographicParityRatio(rates);
}

RateDifferences ComputeRateDifferences(const GroupOutcomes& groups, Diagnostics* diag) {
  RateDifferences out;
  std::vector<double> fpr, fnr;
  for (const GroupCell& g : groups.groups) {
    const ConfusionCounts& c = g.counts;
    if (c.negatives() > 0) {
      fpr.push_back(static_cast<double>(c.fp) / static_cast<double>(c.negatives()));
    } else {
      out.excluded_from_fpr.push_back(g.code);
      Warn(diag, groups.variable + ": group '" + g.label +
                     "' has no actual negatives; excluded from FPR difference");
    }
    if (c.positives() > 0) {
      fnr.push_back(static_cast<double>(c.fn) / static_cast<double>(c.positives()));
    } else {
      out.excluded_from_fnr.push_back(g.code);
      Warn(diag, groups.variable + ": group '" + g.label +
                     "' has no actual positives; excluded from FNR difference");
    }
  }
  if (fpr.size() < 2 || fnr.size() < 2)
    throw InvalidArgument(groups.variable +
                          ": fewer than two groups eligible for FPR/FNR differences");
  const auto [fpr_lo, fpr_hi] = std::minmax_element(fpr.begin(), fpr.end());
  const auto [fnr_lo, fnr_hi] = std::minmax_element(fnr.begin(), fnr.end());
  out.fprd = *fpr_hi - *fpr_lo;
  out.fnrd = *fnr_hi - *fnr_lo;
  out.eod = std::max(out.fprd, out.fnrd);
  return out;
}

std::vector<GroupAuditRow> GroupLevelAudit(std::span<const Label> predictions,
                                           std::span<const Label> labels,
                                           const CodedTable& test,
                                           std::span<const std::string> protected_variables,
                                           Diagnostics* diag) {
  if (predictions.size() != test.rows() || labels.size() != test.rows())
    throw InvalidArgument("predictions/labels do not match the audited table");
  std::vector<GroupAuditRow> rows;
  for (const std::string& name : protected_variables) {
    GroupAuditRow row;
    row.variable = name;
    row.display_name = name;
    try {
      const VariableSpec& spec = test.schema().Get(name);
      row.display_name = spec.display_name;
      const GroupOutcomes groups =
          ComputeGroupOutcomes(labels, predictions, test.column(name), name, &spec);
      row.groups = groups.groups.size();
      row.osr = OverallSelectionRate(groups.Total());
      if (groups.groups.size() == 1) {
        row.fprd = row.fnrd = row.eod = 0.0;
        row.dpr = 1.0;
      } else {
        try {
          row.dpr = DemographicParityRatio(groups);
        } catch (const Error& e) {
          row.error = e.what();
        }
        const RateDifferences diff = ComputeRateDifferences(groups, diag);
        row.fprd = diff.fprd;
        row.fnrd = diff.fnrd;
        row.eod = diff.eod;
      }
    } catch (const Error& e) {
      row.error = e.what();
      Warn(diag, "group audit of " + name + ": " + e.what());
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<SubgroupRow> SubgroupRowsFromRates(std::vector<SubgroupRow> rows, double threshold,
                                               std::uint64_t min_count) {
  if (!(threshold > 0.0 && threshold <= 1.0))
    throw InvalidArgument("parity threshold must lie in (0, 1]");
  std::erase_if(rows, [&](const SubgroupRow& r) { return r.count == 0 || r.count < min_count; });
  if (rows.empty()) return rows;
  double max_rate = 0.0;
  for (const SubgroupRow& r : rows) {
    if (r.selection_rates.empty()) throw InvalidArgument("subgroup row without selection rates");
    max_rate = std::max(max_rate, r.selection_rates.front());
  }
  for (SubgroupRow& r : rows) {
    r.parity_ratio = max_rate > 0.0 ? r.selection_rates.front() / max_rate : 1.0;
    r.flagged = r.parity_ratio < threshold;
  }
  return rows;
}

SubgroupAudit AuditSubgroups(std::span<const std::vector<Label>> model_predictions,
                             std::span<const std::string> model_names, const CodedTable& test,
                             const std::string& variable, double threshold,
                             std::uint64_t min_count) {
  if (model_predictions.empty()) throw InvalidArgument("subgroup audit needs at least one model");
  if (model_names.size() != model_predictions.size())
    throw InvalidArgument("one model name per prediction vector");
  const VariableSpec& spec = test.schema().Get(variable);
  const auto attribute = test.column(variable);
  SubgroupAudit audit;
  audit.variable = variable;
  audit.display_name = spec.display_name;
  audit.models.assign(model_names.begin(), model_names.end());
  audit.threshold = threshold;

  // code -> (count, selected per model)
  std::map<int, std::pair<std::uint64_t, std::vector<std::uint64_t>>> tally;
  for (const auto& preds : model_predictions)
    if (preds.size() != test.rows()) throw InvalidArgument("predictions do not match the table");
  for (std::size_t i = 0; i < test.rows(); ++i) {
    auto& [count, selected] = tally[attribute[i]];
    if (selected.empty()) selected.assign(model_predictions.size(), 0);
    ++count;
    for (std::size_t m = 0; m < model_predictions.size(); ++m)
      selected[m] += model_predictions[m][i] ? 1 : 0;
  }
  std::vector<SubgroupRow> rows;
  for (const auto& [code, entry] : tally) {
    SubgroupRow row;
    row.code = code;
    row.label = spec.LabelOf(code);
    row.count = entry.first;
    for (std::uint64_t s : entry.second)
      row.selection_rates.push_back(static_cast<double>(s) / static_cast<double>(entry.first));
    rows.push_back(std::move(row));
  }
  audit.rows = SubgroupRowsFromRates(std::move(rows), threshold, min_count);
  return audit;
}

std::string_view PointKindName(PointKind kind) {
  switch (kind) {
    case PointKind::kDisadvantaged: return "disadvantaged";
    case PointKind::kPrivileged: return "privileged";
    default: return "low_outlier";
  }
}

double Quantile(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw InvalidArgument("quantile of an empty sample");
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

BoxplotStats ComputeBoxplot(const SubgroupAudit& audit) {
  if (audit.rows.empty()) throw InvalidArgument("boxplot of " + audit.variable + ": no subgroups");
  BoxplotStats box;
  box.variable = audit.variable;
  std::vector<double> rates;
  for (const SubgroupRow& r : audit.rows) rates.push_back(r.selection_rates.front());
  std::sort(rates.begin(), rates.end());
  box.q1 = Quantile(rates, 0.25);
  box.median = Quantile(rates, 0.5);
  box.q3 = Quantile(rates, 0.75);
  const double iqr = box.q3 - box.q1;
  const double lo_fence = box.q1 - 1.5 * iqr;
  const double hi_fence = box.q3 + 1.5 * iqr;
  box.lo_whisker = box.q1;
  box.hi_whisker = box.q3;
  for (double r : rates) {
    if (r >= lo_fence) box.lo_whisker = std::min(box.lo_whisker, r);
    if (r <= hi_fence) box.hi_whisker = std::max(box.hi_whisker, r);
  }
  for (const SubgroupRow& r : audit.rows) {
    const double v = r.selection_rates.front();
    if (r.flagged) {
      box.points.push_back({r.label, v, PointKind::kDisadvantaged});
    } else if (v > box.hi_whisker) {
      box.points.push_back({r.label, v, PointKind::kPrivileged});
    } else if (v < box.lo_whisker) {
      box.points.push_back({r.label, v, PointKind::kLowOutlier});
    }
  }
  return box;
}

std::vector<BoxplotStats> BoxplotData(std::span<const SubgroupAudit> audits) {
  std::vector<BoxplotStats> out;
  for (const SubgroupAudit& a : audits) out.push_back(ComputeBoxplot(a));
  return out;
}

}  // namespace fairaudit
