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

#ifndef FAIRAUDIT_REPORT_HPP_
#define FAIRAUDIT_REPORT_HPP_

#include <filesystem>
#include <optional>
#include <string>

#include "fairaudit/pipeline.hpp"
#include "json.hpp"

namespace fairaudit {

inline constexpr int kReportSchemaVersion = 1;

// Shortest round-trip decimal form.
std::string FormatNumber(double value);
std::string FormatNumber(const std::optional<double>& value);

nlohmann::json SelectionToJson(const SelectionResult& selection);
nlohmann::json GroupRowToJson(const GroupAuditRow& row);
nlohmann::json SubgroupAuditToJson(const SubgroupAudit& audit);
nlohmann::json BoxplotToJson(const BoxplotStats& box);
nlohmann::json PolicyToJson(const ThresholdPolicy& policy);
nlohmann::json MitigationToJson(const MitigationOutcome& outcome);
nlohmann::json ModelMetricsToJson(const EvaluatedModel& model);

// Keys are sorted, so equal reports serialize to equal bytes.
nlohmann::json ReportToJson(const AuditReport& report);

// CSV renderings.
std::string GroupAuditCsv(const AuditReport& report);
std::string ModelMetricsCsv(const AuditReport& report);
std::string SubgroupCsv(const SubgroupAudit& audit);
std::string BoxplotCsv(const AuditReport& report);
std::string BoxplotPointsCsv(const AuditReport& report);
std::string MitigationCsv(const AuditReport& report);

// Writes report.json, the per-table CSVs, boxplot CSVs and the selected
// feature lists under `outdir`. Timings go to timings.json so the report
// itself stays byte-stable. Throws IoError with the failing path.
void EmitReport(const AuditReport& report, const std::filesystem::path& outdir);

void WriteFile(const std::filesystem::path& path, const std::string& content);

}  // namespace fairaudit

#endif  // FAIRAUDIT_REPORT_HPP_
