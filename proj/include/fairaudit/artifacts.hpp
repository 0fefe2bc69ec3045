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

#ifndef FAIRAUDIT_ARTIFACTS_HPP_
#define FAIRAUDIT_ARTIFACTS_HPP_

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fairaudit/pipeline.hpp"

namespace fairaudit {

// Per-cohort intermediate artifacts, so later stages can be rerun alone:
//   <dir>/schema.json          codebook of the ingested cohort tables
//   <dir>/train.csv, test.csv  coded rows with a trailing LABEL column
//   <dir>/cohort.json          counts
//   <dir>/selection.json, selected_features.txt
//   <dir>/models.json          tuned parameters, CV cells and fitted models
//   <dir>/predictions.csv      one score/label column pair per model
std::filesystem::path CohortArtifactDir(const std::filesystem::path& out, Cohort cohort);

void SaveCohortData(const CohortData& data, const std::filesystem::path& dir);
CohortData LoadCohortData(const std::filesystem::path& dir);

void SaveSelection(const SelectionResult& selection, const std::filesystem::path& dir);
// The saved feature list, or every column of `fallback` when none was saved.
std::vector<std::string> LoadFeatures(const std::filesystem::path& dir,
                                      const LabeledTable& fallback);

void SaveModels(const std::vector<TrainedModel>& models, const std::filesystem::path& dir);
std::vector<TrainedModel> LoadModels(const std::filesystem::path& dir);

void SavePredictions(const std::vector<EvaluatedModel>& models, const std::filesystem::path& dir);
std::vector<EvaluatedModel> LoadPredictions(const std::filesystem::path& dir,
                                            const LabeledTable& test);

// Parses CSV written by WriteTableCsv with a trailing label column.
LabeledTable ParseLabeledCsv(std::string_view csv, const CodebookPtr& schema, Cohort cohort,
                             const std::string& source);

}  // namespace fairaudit

#endif  // FAIRAUDIT_ARTIFACTS_HPP_
