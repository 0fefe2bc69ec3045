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

#ifndef FAIRAUDIT_PIPELINE_HPP_
#define FAIRAUDIT_PIPELINE_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fairaudit/eval_metrics.hpp"
#include "fairaudit/fairness.hpp"
#include "fairaudit/feature_select.hpp"
#include "fairaudit/learners.hpp"
#include "fairaudit/mitigate.hpp"
#include "fairaudit/sampler.hpp"
#include "fairaudit/schema.hpp"
#include "fairaudit/tune.hpp"
#include "json.hpp"

namespace fairaudit {

inline constexpr std::string_view kToolVersion = "1.0.0";

struct ModelSpec {
  std::string name;
  std::vector<LearnerParams> grid;
};

enum class MitigationMethod { kNone, kReweigh, kThresholds };
std::string_view MitigationName(MitigationMethod method);
std::optional<MitigationMethod> ParseMitigation(std::string_view name);

struct MitigationConfig {
  MitigationMethod method = MitigationMethod::kNone;
  FairnessCriterion criterion = FairnessCriterion::kDemographicParity;
  double epsilon = 0.05;
  // Protected variable to mitigate along; empty means the first audited one.
  std::string attribute;
  double validation_fraction = 0.2;
};

enum class SelectionMode { kPerCohort, kPooled, kNone };

struct RunConfig {
  std::filesystem::path data;
  std::filesystem::path codebook;
  std::filesystem::path out = "fairaudit_out";
  std::optional<std::uint64_t> seed;
  std::vector<Cohort> cohorts = {Cohort::kInpatient, Cohort::kOutpatient};
  double test_fraction = 0.2;
  double max_missing_ratio = 0.70;
  bool smote = true;
  std::size_t smote_k = 5;
  SelectionMode selection_mode = SelectionMode::kPerCohort;
  SelectorConfig selector;
  std::size_t cv_folds = 3;
  std::vector<ModelSpec> models;
  // Empty means every protected-role variable that survives ingestion.
  std::vector<std::string> protected_variables;
  double fairness_threshold = kDefaultParityThreshold;
  std::uint64_t min_count = 0;
  MitigationConfig mitigation;
};

// Two audited models: leaf-wise boosting first (the reference model for
// subgroup flags), then a random forest.
std::vector<ModelSpec> DefaultModels();

// Relative paths resolve against `base_dir`. Throws ConfigError.
RunConfig ParseRunConfig(std::string_view json_text, const std::filesystem::path& base_dir);
RunConfig LoadRunConfig(const std::filesystem::path& path);
nlohmann::json RunConfigToJson(const RunConfig& config);
// Seed present, input files readable, numeric ranges sane.
void CheckRunConfig(const RunConfig& config);

// Selector settings with the stage seed for one cohort, or for the pooled
// selection when `cohort` is empty.
SelectorConfig SelectorFor(const RunConfig& config, std::optional<Cohort> cohort);

struct PreparedData {
  std::size_t total_rows = 0;
  std::size_t excluded_rows = 0;
  std::vector<std::string> dropped_sparse;
  std::vector<LabeledTable> cohorts;
};

// ingest -> sparse drop -> missing fold -> cohort split -> target.
PreparedData PrepareData(const RunConfig& config, Diagnostics* diag);

struct CohortData {
  Cohort cohort = Cohort::kInpatient;
  std::size_t rows = 0;
  std::size_t positives = 0;
  // Training rows before and after oversampling.
  std::size_t train_rows = 0;
  std::size_t synthetic_rows = 0;
  LabeledTable train;
  LabeledTable test;
};

CohortData SplitAndBalance(const LabeledTable& cohort, const RunConfig& config);

struct TrainedModel {
  std::string name;
  LearnerParams params;
  TuneResult tuning;
  Model model;
};

// Tunes every model's grid by stratified CV accuracy, then refits the best
// parameters on the full training table.
std::vector<TrainedModel> TrainModels(const LabeledTable& train,
                                      const std::vector<std::string>& features,
                                      const RunConfig& config);

struct EvaluatedModel {
  std::string name;
  ConfusionCounts confusion;
  ClassificationReport report;
  Predictions predictions;
};

EvaluatedModel Evaluate(const TrainedModel& model, const LabeledTable& test);
EvaluatedModel EvaluatePredictions(const std::string& name, const LabeledTable& test,
                                   Predictions predictions);

struct GroupAuditTable {
  std::string model;
  std::vector<GroupAuditRow> rows;
};

struct AuditResult {
  std::vector<GroupAuditTable> group;
  std::vector<SubgroupAudit> subgroups;
  std::vector<BoxplotStats> boxplots;
};

std::vector<std::string> ResolveProtected(const RunConfig& config, const Codebook& schema);

AuditResult RunAudit(const std::vector<EvaluatedModel>& models, const LabeledTable& test,
                     const std::vector<std::string>& protected_variables, double threshold,
                     std::uint64_t min_count, Diagnostics* diag);

struct MitigationOutcome {
  MitigationMethod method = MitigationMethod::kNone;
  std::string model;
  std::string attribute;
  double baseline_accuracy = 0.0;
  double mitigated_accuracy = 0.0;
  double accuracy_drop = 0.0;
  double baseline_rate_gap = 0.0;
  double mitigated_rate_gap = 0.0;
  std::optional<double> baseline_dpr;
  std::optional<double> mitigated_dpr;
  std::optional<double> baseline_eod;
  std::optional<double> mitigated_eod;
  std::optional<ThresholdPolicy> policy;
  // Largest |P_w(a, y) - P_w(a) P_w(y)| under the reweighing weights.
  std::optional<double> weighted_dependence;
  std::vector<GroupAuditRow> mitigated_group_audit;
  std::optional<SubgroupAudit> mitigated_subgroups;
};

// Mitigates the first audited model along `attribute` and re-audits the test
// table. Thresholds are fit on a validation split of the training rows.
MitigationOutcome RunMitigation(const TrainedModel& reference, const CohortData& data,
                                const std::vector<std::string>& features,
                                const std::string& attribute, const RunConfig& config,
                                Diagnostics* diag);

struct CohortReport {
  CohortData data;
  std::vector<std::string> features;
  std::optional<SelectionResult> selection;
  std::vector<TrainedModel> models;
  std::vector<EvaluatedModel> evaluations;
  AuditResult audit;
  std::optional<MitigationOutcome> mitigation;
};

struct AuditReport {
  nlohmann::json config;
  std::size_t total_rows = 0;
  std::size_t excluded_rows = 0;
  std::vector<std::string> dropped_sparse;
  std::optional<SelectionResult> pooled_selection;
  std::vector<CohortReport> cohorts;
  Diagnostics warnings;
  // Wall-clock seconds per stage; written outside the report document.
  std::vector<std::pair<std::string, double>> timings;
};

// Runs every stage; exceptions carry a stage tag in their message.
AuditReport RunPipeline(const RunConfig& config);

// Concatenates labeled tables with identical column names.
LabeledTable ConcatRows(const std::vector<const LabeledTable*>& parts);

// Largest selection-rate difference across the attribute's groups.
double SelectionRateGap(std::span<const Label> predictions, std::span<const int> attribute);

}  // namespace fairaudit

#endif  // FAIRAUDIT_PIPELINE_HPP_
