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

#ifndef FAIRAUDIT_SCHEMA_HPP_
#define FAIRAUDIT_SCHEMA_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fairaudit/common.hpp"

namespace fairaudit {

enum class Role { kFeature, kProtected, kTargetSource, kCohortSelector, kIdDrop };

std::string_view RoleName(Role role);
std::optional<Role> ParseRole(std::string_view name);

// Inclusive day range covered by one banded LOS code. A negative max_days
// means the band is open-ended.
struct DayRange {
  int min_days = 0;
  int max_days = 0;
};

struct VariableSpec {
  std::string name;
  // Human-readable name used in reports (e.g. "Race" for RACE).
  std::string display_name;
  Role role = Role::kFeature;
  std::map<int, std::string> categories;
  std::set<int> missing_codes;
  // Label of the category that missing codes fold into; empty means
  // kMissingCategoryLabel.
  std::string missing_label;
  // Only populated for the target-source variable.
  std::map<int, DayRange> los_days;

  bool IsKnownCode(int code) const {
    return categories.count(code) > 0 || missing_codes.count(code) > 0;
  }
  bool IsMissingCode(int code) const { return missing_codes.count(code) > 0; }
  // Category label, or "missing(<code>)" for missing codes.
  std::string LabelOf(int code) const;
};

// Ordered variable dictionary. Role-cardinality rules (exactly one cohort
// selector and one target source) are enforced by Validate(), which
// LoadCodebook calls; derived schemas produced by the pipeline (after the
// target column is consumed, say) are not required to satisfy them.
class Codebook {
 public:
  Codebook() = default;
  Codebook(std::string version, std::vector<VariableSpec> variables);

  const std::string& version() const { return version_; }
  const std::vector<VariableSpec>& variables() const { return variables_; }
  std::size_t size() const { return variables_.size(); }
  const VariableSpec& at(std::size_t i) const { return variables_.at(i); }

  std::optional<std::size_t> IndexOf(std::string_view name) const;
  const VariableSpec& Get(std::string_view name) const;
  // Index of the unique variable with the given role, if any.
  std::optional<std::size_t> FindRole(Role role) const;

  // Throws DataError describing the first violated invariant.
  void Validate() const;

 private:
  std::string version_;
  std::vector<VariableSpec> variables_;
  std::map<std::string, std::size_t, std::less<>> index_;
};

using CodebookPtr = std::shared_ptr<const Codebook>;

// Derived schemas (saved cohort tables, say) are parsed with validate=false.
Codebook ParseCodebook(std::string_view text, const std::string& source = "<memory>",
                       bool validate = true);
Codebook LoadCodebook(const std::filesystem::path& path);
std::string SerializeCodebook(const Codebook& codebook);

// Integer-coded categorical table. Column i holds variable i of schema().
// Storage is column-major.
class CodedTable {
 public:
  CodedTable() = default;
  CodedTable(CodebookPtr schema, std::vector<std::vector<int>> columns,
             std::size_t rows);

  const CodebookPtr& schema_ptr() const { return schema_; }
  const Codebook& schema() const { return *schema_; }
  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return columns_.size(); }
  int at(std::size_t row, std::size_t col) const { return columns_[col][row]; }
  std::span<const int> column(std::size_t col) const { return columns_[col]; }
  std::span<const int> column(std::string_view name) const;
  const std::vector<std::vector<int>>& columns() const { return columns_; }

  // Rows in the given order (indices may repeat).
  CodedTable SelectRows(std::span<const std::size_t> rows) const;
  // Keeps the named variables in the given order.
  CodedTable SelectColumns(std::span<const std::string> names) const;
  CodedTable DropColumns(std::span<const std::string> names) const;

 private:
  CodebookPtr schema_;
  std::vector<std::vector<int>> columns_;
  std::size_t rows_ = 0;
};

enum class Cohort { kInpatient, kOutpatient };
std::string_view CohortName(Cohort cohort);
std::optional<Cohort> ParseCohort(std::string_view name);

struct LabeledTable {
  CodedTable table;
  std::vector<Label> labels;
  Cohort cohort = Cohort::kInpatient;

  std::size_t rows() const { return labels.size(); }
  LabeledTable SelectRows(std::span<const std::size_t> rows) const;
};

CodedTable ParseTable(std::string_view csv, const CodebookPtr& codebook,
                      const std::string& source = "<memory>");
// Reads the CSV, validates every cell against the codebook and removes
// id-drop columns.
CodedTable IngestTable(const std::filesystem::path& csv, const CodebookPtr& codebook);

struct SparseDropResult {
  CodedTable table;
  std::vector<std::string> dropped;
};

// Removes columns whose missing-code fraction is strictly greater than
// max_missing_ratio. Cohort-selector and target-source columns are never
// dropped.
SparseDropResult DropSparseColumns(const CodedTable& table,
                                   double max_missing_ratio = 0.70);

inline constexpr std::string_view kMissingCategoryLabel = "Missing/unknown";

// Replaces every missing code with one fresh category per column (code =
// largest category code + 1). The cohort-selector and target-source columns
// are left alone.
CodedTable FoldMissingAsCategory(const CodedTable& table,
                                 Diagnostics* diag = nullptr);

struct CohortSplit {
  CodedTable inpatient;
  CodedTable outpatient;
  std::size_t excluded = 0;
};

// Cohort-selector codes 3-5 are inpatient, 6-8 outpatient, 1-2 excluded. The
// selector column is removed from both outputs.
CohortSplit SplitCohorts(const CodedTable& table);

struct LosThresholds {
  int inpatient_days = 30;
  int outpatient_days = 90;
  int For(Cohort cohort) const {
    return cohort == Cohort::kInpatient ? inpatient_days : outpatient_days;
  }
};

// Label 1 iff the LOS band's minimum day count is strictly greater than the
// cohort threshold. The LOS column is removed from the feature table.
LabeledTable BuildTarget(const CodedTable& table, Cohort cohort,
                         const LosThresholds& thresholds = {});

// Writes the table (plus an optional trailing label column) as integer CSV.
std::string WriteTableCsv(const CodedTable& table,
                          const std::vector<Label>* labels = nullptr,
                          std::string_view label_column = "LABEL");

}  // namespace fairaudit

#endif  // FAIRAUDIT_SCHEMA_HPP_
