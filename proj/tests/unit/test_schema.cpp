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

#include <gtest/gtest.h>

#include <string>
#include <vector>

#include "fairaudit/schema.hpp"
#include "fairaudit/synth.hpp"
#include "test_util.hpp"

namespace fairaudit {
namespace {

using testing::Table;
using testing::Var;

constexpr const char* kCodebook = R"({
  "version": "t1",
  "variables": [
    {"name": "ID", "role": "id-drop"},
    {"name": "RACE", "display": "Race", "role": "protected",
     "categories": {"1": "A", "2": "B"}, "missing": [-9], "missing_label": "Not collected"},
    {"name": "EDUC", "role": "feature", "categories": {"1": "low", "2": "high"}, "missing": [-9]},
    {"name": "SERVICES_D", "role": "cohort-selector", "category_range": [1, 8]},
    {"name": "LOS", "role": "target-source", "categories": {"1": "1 day", "31": "31-45", "33": "61-90", "34": "91-120"},
     "los_days": {"1": [1, 1], "31": [31, 45], "33": [61, 90], "34": [91, 120]}}
  ]
})";

CodebookPtr Load() { return std::make_shared<const Codebook>(ParseCodebook(kCodebook)); }

std::string Replace(std::string text, const std::string& from, const std::string& to) {
  text.replace(text.find(from), from.size(), to);
  return text;
}

TEST(Codebook, ParsesRolesRangesAndMissingLabel) {
  const Codebook cb = ParseCodebook(kCodebook);
  EXPECT_EQ(cb.size(), 5u);
  EXPECT_EQ(cb.Get("RACE").display_name, "Race");
  EXPECT_EQ(cb.Get("RACE").missing_label, "Not collected");
  EXPECT_EQ(cb.Get("SERVICES_D").categories.size(), 8u);
  EXPECT_EQ(*cb.FindRole(Role::kTargetSource), 4u);
  EXPECT_EQ(cb.Get("LOS").los_days.at(31).max_days, 45);
}

TEST(Codebook, SerializationRoundTrips) {
  const Codebook cb = ParseCodebook(kCodebook);
  const Codebook again = ParseCodebook(SerializeCodebook(cb));
  EXPECT_EQ(SerializeCodebook(again), SerializeCodebook(cb));
}

TEST(Codebook, RejectsStructuralViolations) {
  const std::string two_selectors = Replace(kCodebook, R"("name": "EDUC", "role": "feature")",
                                            R"("name": "EDUC", "role": "cohort-selector")");
  EXPECT_THROW(ParseCodebook(two_selectors), Error);
  const std::string los_gap = Replace(kCodebook, R"("34": [91, 120])", R"("35": [91, 120])");
  EXPECT_THROW(ParseCodebook(los_gap), Error);
  const std::string clash = Replace(kCodebook, R"("missing": [-9], "missing_label")",
                                    R"("missing": [2], "missing_label")");
  EXPECT_THROW(ParseCodebook(clash), Error);
  EXPECT_THROW(ParseCodebook(Replace(kCodebook, "\"feature\"", "\"covariate\"")), Error);
  EXPECT_THROW(ParseCodebook("{"), Error);
}

TEST(Ingest, DropsIdColumnAndAcceptsAnyIdValue) {
  const std::string csv =
      "RACE,ID,EDUC,SERVICES_D,LOS\n"
      "1,987654321,2,3,1\n"
      "-9,5,1,7,34\n";
  const CodedTable t = ParseTable(csv, Load());
  ASSERT_EQ(t.rows(), 2u);
  EXPECT_FALSE(t.schema().IndexOf("ID").has_value());
  EXPECT_EQ(t.column("RACE")[1], -9);
  EXPECT_EQ(t.column("LOS")[1], 34);
}

TEST(Ingest, UndeclaredCodeNamesRowAndColumn) {
  const std::string csv = "ID,RACE,EDUC,SERVICES_D,LOS\n1,1,1,3,1\n2,3,1,3,1\n";
  try {
    ParseTable(csv, Load());
    FAIL() << "expected a data error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kData);
    const std::string what = e.what();
    EXPECT_NE(what.find("row 2"), std::string::npos) << what;
    EXPECT_NE(what.find("RACE"), std::string::npos) << what;
  }
}

TEST(Ingest, HeaderMustMatchCodebook) {
  EXPECT_THROW(ParseTable("ID,RACE,EDUC,SERVICES_D\n1,1,1,3\n", Load()), Error);
  EXPECT_THROW(ParseTable("ID,RACE,EDUC,SERVICES_D,LOS,EXTRA\n1,1,1,3,1,0\n", Load()), Error);
  EXPECT_THROW(ParseTable("ID,RACE,EDUC,SERVICES_D,LOS\n1,1,x,3,1\n", Load()), Error);
  EXPECT_THROW(ParseTable("ID,RACE,EDUC,SERVICES_D,LOS\n1,1,1,3\n", Load()), Error);
}

TEST(SparseDrop, RatioIsStrictAndStructuralColumnsStay) {
  // 10 rows: F7 is 70% missing (kept), F8 is 80% missing (dropped).
  std::vector<int> f7(10, 1), f8(10, 1), sel(10, 3), los(10, -9);
  for (int i = 0; i < 7; ++i) f7[i] = -9;
  for (int i = 0; i < 8; ++i) f8[i] = -9;
  auto los_var = Var("LOS", Role::kTargetSource, {1}, {-9});
  auto sel_var = Var("SEL", Role::kCohortSelector, {3}, {-9});
  const CodedTable t = Table({Var("F7", Role::kFeature, {1}, {-9}),
                              Var("F8", Role::kFeature, {1}, {-9}), sel_var, los_var},
                             {f7, f8, sel, los});
  const SparseDropResult r = DropSparseColumns(t, 0.70);
  EXPECT_EQ(r.dropped, std::vector<std::string>{"F8"});
  EXPECT_TRUE(r.table.schema().IndexOf("F7").has_value());
  EXPECT_TRUE(r.table.schema().IndexOf("LOS").has_value());
  EXPECT_THROW(DropSparseColumns(t, 1.5), Error);
}

TEST(FoldMissing, AddsOneFreshCategoryAfterTheLargestCode) {
  auto race = Var("RACE", Role::kProtected, {1, 4}, {-9, -8});
  race.missing_label = "Unknown";
  const CodedTable t = Table({race, Var("EDUC", Role::kFeature, {1, 2}, {-9})},
                             {{1, -9, 4, -8}, {1, 2, 1, 2}});
  const CodedTable folded = FoldMissingAsCategory(t);
  const auto col = folded.column("RACE");
  EXPECT_EQ(std::vector<int>(col.begin(), col.end()), (std::vector<int>{1, 5, 4, 5}));
  EXPECT_EQ(folded.schema().Get("RACE").categories.at(5), "Unknown");
  EXPECT_TRUE(folded.schema().Get("RACE").missing_codes.empty());
  // No missing cells: no extra category.
  EXPECT_EQ(folded.schema().Get("EDUC").categories.size(), 2u);
}

TEST(FoldMissing, WarnsOnEntirelyMissingColumn) {
  const CodedTable t = Table({Var("F", Role::kFeature, {1}, {-9})}, {{-9, -9}});
  Diagnostics diag;
  FoldMissingAsCategory(t, &diag);
  EXPECT_EQ(diag.warnings().size(), 1u);
}

TEST(Cohorts, SplitsByServiceCodeAndDropsSelector) {
  const CodedTable t = Table({Var("F", Role::kFeature, {1, 2}),
                              Var("SEL", Role::kCohortSelector, {1, 2, 3, 4, 5, 6, 7, 8})},
                             {{1, 2, 1, 2, 1, 2, 1, 2}, {1, 2, 3, 4, 5, 6, 7, 8}});
  const CohortSplit s = SplitCohorts(t);
  EXPECT_EQ(s.inpatient.rows(), 3u);
  EXPECT_EQ(s.outpatient.rows(), 3u);
  EXPECT_EQ(s.excluded, 2u);
  EXPECT_FALSE(s.inpatient.schema().IndexOf("SEL").has_value());
  EXPECT_EQ(s.outpatient.column("F")[0], 2);
}

TEST(Target, UsesBandMinimumAgainstCohortThreshold) {
  const CodebookPtr cb = Load();
  const CodedTable t = ParseTable(
      "ID,RACE,EDUC,SERVICES_D,LOS\n1,1,1,3,1\n2,1,1,3,31\n3,1,1,3,33\n4,1,1,3,34\n", cb);
  const LabeledTable in = BuildTarget(t, Cohort::kInpatient);
  EXPECT_EQ(in.labels, (std::vector<Label>{0, 1, 1, 1}));
  const LabeledTable out = BuildTarget(t, Cohort::kOutpatient);
  EXPECT_EQ(out.labels, (std::vector<Label>{0, 0, 0, 1}));
  EXPECT_FALSE(out.table.schema().IndexOf("LOS").has_value());
}

TEST(Ingest, SyntheticCsvRoundTripsThroughTheCodebook) {
  SynthConfig c = TwoGroupConfig(300, 0.3, 0.6, 3, 0.5, 0.2, 11);
  c.missing_rate = 0.1;
  const SynthData d = Generate(c);
  const CodedTable parsed = ParseTable(WriteTableCsv(d.raw), d.codebook);
  // The id column is gone; every other column is untouched.
  ASSERT_EQ(parsed.cols() + 1, d.raw.cols());
  for (std::size_t c2 = 0; c2 < parsed.cols(); ++c2) {
    const auto name = parsed.schema().at(c2).name;
    const auto a = parsed.column(c2);
    const auto b = d.raw.column(name);
    EXPECT_TRUE(std::equal(a.begin(), a.end(), b.begin(), b.end())) << name;
  }
}

TEST(Ingest, ShippedTedsCodebookLoads) {
  const Codebook cb =
      LoadCodebook(std::filesystem::path(FAIRAUDIT_SOURCE_DIR) / "data/teds_d_2019_codebook.json");
  EXPECT_EQ(cb.size(), 76u);
  std::size_t protected_vars = 0;
  for (const auto& v : cb.variables()) protected_vars += v.role == Role::kProtected ? 1 : 0;
  EXPECT_EQ(protected_vars, 13u);
  EXPECT_EQ(cb.Get("SERVICES_D").role, Role::kCohortSelector);
  EXPECT_EQ(cb.Get("LOS").los_days.at(37).max_days, -1);
}

}  // namespace
}  // namespace fairaudit
