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

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "fairaudit/pipeline.hpp"
#include "fairaudit/report.hpp"
#include "fairaudit/synth.hpp"
#include "json.hpp"
#include "test_util.hpp"

namespace fairaudit {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string ReadAll(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// A small synthetic dataset with a fast model grid.
struct Workspace {
  fs::path dir;
  fs::path config;
  json doc;
};

Workspace MakeWorkspace(const std::string& name, json overrides = json::object()) {
  Workspace w;
  w.dir = testing::ScratchDir(name);
  SynthConfig sc = TwoGroupConfig(1200, 0.6, 0.3, 4, 0.5, 0.2, 31);
  sc.missing_rate = 0.05;
  WriteSynth(Generate(sc), w.dir, "data");
  w.doc = {
      {"data", "data.csv"},
      {"codebook", "data_codebook.json"},
      {"out", "out"},
      {"seed", 3},
      {"cohort", "inpatient"},
      {"selection", {{"mode", "none"}}},
      {"cv_folds", 2},
      {"models",
       {{{"name", "Boost"}, {"grid", {{{"learner", "gradient_boosting"}, {"rounds", 20}}}}},
        {{"name", "Forest"}, {"grid", {{{"learner", "random_forest"}, {"n_trees", 15}}}}}}},
      {"mitigation", {{"method", "thresholds"}, {"epsilon", 0.05}}}};
  w.doc.merge_patch(overrides);
  w.config = w.dir / "run.json";
  std::ofstream(w.config) << w.doc.dump(2);
  return w;
}

int Cli(const std::string& args) {
  const std::string cmd = std::string(FAIRAUDIT_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

TEST(RunConfig, ResolvesRelativePathsAndRejectsUnknownKeys) {
  const RunConfig c = ParseRunConfig(R"({"data": "d.csv", "codebook": "/abs/cb.json", "seed": 1})",
                                     "/base");
  EXPECT_EQ(c.data, fs::path("/base/d.csv"));
  EXPECT_EQ(c.codebook, fs::path("/abs/cb.json"));
  EXPECT_EQ(c.models.size(), 2u);
  EXPECT_THROW(ParseRunConfig(R"({"seed": 1, "sed": 2})", "/"), Error);
  EXPECT_THROW(ParseRunConfig(R"({"cohort": "ward"})", "/"), Error);
  EXPECT_THROW(ParseRunConfig(R"({"models": [{"name": "m", "grid": []}]})", "/"), Error);
  EXPECT_THROW(ParseRunConfig(R"({"mitigation": {"method": "magic"}})", "/"), Error);
}

TEST(RunConfig, SnapshotParsesBackToItself) {
  const Workspace w = MakeWorkspace("config_snapshot");
  const RunConfig c = LoadRunConfig(w.config);
  const json snap = RunConfigToJson(c);
  EXPECT_EQ(RunConfigToJson(ParseRunConfig(snap.dump(), "/")), snap);
}

TEST(RunConfig, CheckRequiresSeedAndExistingFiles) {
  const Workspace w = MakeWorkspace("config_check");
  RunConfig c = LoadRunConfig(w.config);
  EXPECT_NO_THROW(CheckRunConfig(c));
  RunConfig no_seed = c;
  no_seed.seed.reset();
  EXPECT_THROW(CheckRunConfig(no_seed), Error);
  RunConfig missing = c;
  missing.data = w.dir / "absent.csv";
  EXPECT_THROW(CheckRunConfig(missing), Error);
  RunConfig bad = c;
  bad.test_fraction = 1.5;
  EXPECT_THROW(CheckRunConfig(bad), Error);
}

TEST(Pipeline, EndToEndOnSyntheticData) {
  const Workspace w = MakeWorkspace("pipeline_e2e");
  const AuditReport r = RunPipeline(LoadRunConfig(w.config));
  ASSERT_EQ(r.cohorts.size(), 1u);
  const CohortReport& cr = r.cohorts[0];
  EXPECT_EQ(cr.data.rows, 1200u);
  EXPECT_EQ(cr.data.train.rows(), cr.data.train_rows + cr.data.synthetic_rows);
  ASSERT_EQ(cr.evaluations.size(), 2u);
  EXPECT_EQ(cr.evaluations[0].name, "Boost");
  EXPECT_GT(cr.evaluations[0].report.accuracy, 0.6);
  ASSERT_EQ(cr.audit.group.size(), 2u);
  EXPECT_EQ(cr.audit.group[0].rows.at(0).variable, "RACE");
  ASSERT_TRUE(cr.mitigation.has_value());
  EXPECT_TRUE(cr.mitigation->policy.has_value());
  EXPECT_EQ(cr.mitigation->model, "Boost");
}

TEST(Pipeline, StageErrorsCarryTheStageName) {
  const Workspace w = MakeWorkspace("pipeline_stage", {{"protected", {"NOPE"}}});
  try {
    RunPipeline(LoadRunConfig(w.config));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(std::string(e.what()).rfind("[", 0), 0u) << e.what();
  }
}

TEST(Pipeline, SelectionRateGapIsMaxMinusMin) {
  const std::vector<Label> p = {1, 0, 1, 1, 0, 0, 0, 1};
  const std::vector<int> a = {1, 1, 2, 2, 3, 3, 3, 3};
  EXPECT_DOUBLE_EQ(SelectionRateGap(p, a), 1.0 - 0.25);
}

TEST(Cli, ExitCodesFollowTheErrorKind) {
  EXPECT_EQ(Cli("run --config /nonexistent/run.json"), 2);
  EXPECT_EQ(Cli("run"), 2);
  EXPECT_EQ(Cli("run --config x --cohort ward"), 2);

  const Workspace missing = MakeWorkspace("cli_missing", {{"data", "absent.csv"}});
  EXPECT_EQ(Cli("run --config " + missing.config.string()), 2);
  EXPECT_FALSE(fs::exists(missing.dir / "out"));

  const Workspace corrupt = MakeWorkspace("cli_corrupt");
  {
    std::string csv = ReadAll(corrupt.dir / "data.csv");
    const auto row = csv.find('\n') + 1;
    const auto cell = csv.find(',', row) + 1;
    csv.replace(cell, csv.find(',', cell) - cell, "97");  // Undeclared RACE code.
    std::ofstream(corrupt.dir / "data.csv") << csv;
  }
  EXPECT_EQ(Cli("run --config " + corrupt.config.string()), 3);
  EXPECT_FALSE(fs::exists(corrupt.dir / "out" / "report.json"));

  const Workspace broken = MakeWorkspace(
      "cli_training",
      {{"models", {{{"name", "T"}, {"grid", {{{"learner", "decision_tree"}, {"max_depth", 0}}}}}}}});
  EXPECT_EQ(Cli("run --config " + broken.config.string()), 4);
}

TEST(Cli, StagedRunReproducesTheFullRun) {
  const Workspace w = MakeWorkspace("cli_staged");
  const std::string cfg = "--config " + w.config.string();
  ASSERT_EQ(Cli("run " + cfg + " --out " + (w.dir / "full").string()), 0);
  const std::string staged = " --out " + (w.dir / "staged").string();
  for (const char* stage : {"ingest", "select", "train", "evaluate", "audit"})
    ASSERT_EQ(Cli(std::string(stage) + " " + cfg + staged), 0) << stage;
  EXPECT_EQ(ReadAll(w.dir / "staged" / "group_audit.csv"), ReadAll(w.dir / "full" / "group_audit.csv"));
  EXPECT_EQ(ReadAll(w.dir / "staged" / "model_metrics.csv"),
            ReadAll(w.dir / "full" / "model_metrics.csv"));
  ASSERT_EQ(Cli("mitigate " + cfg + staged), 0);
  EXPECT_TRUE(fs::exists(w.dir / "staged" / "mitigation.json"));
  ASSERT_EQ(Cli("audit " + cfg + staged + " --fairness-threshold 0.5"), 0);
}

TEST(Cli, SynthSubcommandWritesDataAndCodebook) {
  const fs::path dir = testing::ScratchDir("cli_synth");
  const fs::path cfg = dir / "synth.json";
  std::ofstream(cfg) << SerializeSynthConfig(TwoGroupConfig(50, 0.5, 0.5, 2, 0.3, 0.0, 1));
  ASSERT_EQ(Cli("synth --config " + cfg.string() + " --out " + dir.string() + " --stem s --seed 4"), 0);
  EXPECT_TRUE(fs::exists(dir / "s.csv"));
  EXPECT_TRUE(fs::exists(dir / "s_codebook.json"));
}

}  // namespace
}  // namespace fairaudit
