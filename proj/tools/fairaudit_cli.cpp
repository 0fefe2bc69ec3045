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

// fairaudit command-line interface.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "fairaudit/artifacts.hpp"
#include "fairaudit/pipeline.hpp"
#include "fairaudit/report.hpp"
#include "fairaudit/synth.hpp"

namespace fs = std::filesystem;
using namespace fairaudit;

namespace {

enum ExitCode { kOk = 0, kOther = 1, kConfig = 2, kData = 3, kTraining = 4, kIo = 5 };

int ExitCodeFor(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kConfig: return kConfig;
    case ErrorKind::kData: return kData;
    case ErrorKind::kTraining: return kTraining;
    case ErrorKind::kIo: return kIo;
    default: return kOther;
  }
}

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> cohort;
  std::optional<double> fairness_threshold;
  std::optional<std::uint64_t> min_count;
  std::optional<std::string> mitigate;
  std::optional<double> epsilon;
  std::optional<std::string> out;
};

void AddCommonFlags(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "Run configuration (JSON)")->required();
  cmd->add_option("--seed", o.seed, "Random seed (overrides the config)");
  cmd->add_option("--cohort", o.cohort, "inpatient, outpatient or both")
      ->check(CLI::IsMember({"inpatient", "outpatient", "both"}));
  cmd->add_option("--fairness-threshold", o.fairness_threshold,
                  "Parity-ratio flag threshold (default 0.80)");
  cmd->add_option("--min-count", o.min_count, "Minimum subgroup size in subgroup audits");
  cmd->add_option("--mitigate", o.mitigate, "none, reweigh or thresholds")
      ->check(CLI::IsMember({"none", "reweigh", "thresholds"}));
  cmd->add_option("--epsilon", o.epsilon, "Disparity tolerance for threshold mitigation");
  cmd->add_option("--out", o.out, "Output directory");
}

RunConfig Resolve(const Overrides& o) {
  RunConfig c = LoadRunConfig(o.config);
  if (o.seed) c.seed = *o.seed;
  if (o.cohort) {
    if (*o.cohort == "both") c.cohorts = {Cohort::kInpatient, Cohort::kOutpatient};
    else c.cohorts = {*ParseCohort(*o.cohort)};
  }
  if (o.fairness_threshold) c.fairness_threshold = *o.fairness_threshold;
  if (o.min_count) c.min_count = *o.min_count;
  if (o.mitigate) c.mitigation.method = *ParseMitigation(*o.mitigate);
  if (o.epsilon) c.mitigation.epsilon = *o.epsilon;
  if (o.out) c.out = *o.out;
  CheckRunConfig(c);
  return c;
}

void PrintWarnings(const Diagnostics& diag) {
  for (const std::string& w : diag.warnings()) std::cerr << "warning: " << w << '\n';
}

void SaveRunArtifacts(const AuditReport& report, const fs::path& out) {
  for (const CohortReport& cr : report.cohorts) {
    const fs::path dir = CohortArtifactDir(out, cr.data.cohort);
    SaveCohortData(cr.data, dir);
    if (cr.selection) SaveSelection(*cr.selection, dir);
    else if (report.pooled_selection) SaveSelection(*report.pooled_selection, dir);
    SaveModels(cr.models, dir);
    SavePredictions(cr.evaluations, dir);
  }
}

int CmdRun(const Overrides& o) {
  const RunConfig c = Resolve(o);
  const AuditReport report = RunPipeline(c);
  EmitReport(report, c.out);
  SaveRunArtifacts(report, c.out);
  PrintWarnings(report.warnings);
  std::cout << "report written to " << (c.out / "report.json").string() << '\n';
  return kOk;
}

int CmdIngest(const Overrides& o) {
  const RunConfig c = Resolve(o);
  Diagnostics diag;
  const PreparedData prepared = PrepareData(c, &diag);
  nlohmann::json summary = {{"total_rows", prepared.total_rows},
                            {"excluded_rows", prepared.excluded_rows},
                            {"dropped_sparse", prepared.dropped_sparse}};
  for (const LabeledTable& t : prepared.cohorts) {
    const CohortData d = SplitAndBalance(t, c);
    SaveCohortData(d, CohortArtifactDir(c.out, d.cohort));
    summary["cohorts"][std::string(CohortName(d.cohort))] = {
        {"rows", d.rows}, {"positives", d.positives}, {"negatives", d.rows - d.positives},
        {"train_rows", d.train_rows}, {"synthetic_rows", d.synthetic_rows},
        {"test_rows", d.test.rows()}};
  }
  summary["warnings"] = diag.warnings();
  WriteFile(c.out / "ingest.json", summary.dump(2) + "\n");
  PrintWarnings(diag);
  std::cout << summary.dump(2) << '\n';
  return kOk;
}

int CmdSelect(const Overrides& o) {
  const RunConfig c = Resolve(o);
  Diagnostics diag;
  std::vector<CohortData> data;
  for (Cohort cohort : c.cohorts) data.push_back(LoadCohortData(CohortArtifactDir(c.out, cohort)));
  std::optional<SelectionResult> pooled;
  if (c.selection_mode == SelectionMode::kPooled) {
    std::vector<const LabeledTable*> parts;
    for (const CohortData& d : data) parts.push_back(&d.train);
    pooled = SelectFeatures(ConcatRows(parts), SelectorFor(c, std::nullopt), &diag);
  }
  for (const CohortData& d : data) {
    const fs::path dir = CohortArtifactDir(c.out, d.cohort);
    if (pooled) {
      SaveSelection(*pooled, dir);
    } else if (c.selection_mode == SelectionMode::kPerCohort) {
      const SelectionResult s = SelectFeatures(d.train, SelectorFor(c, d.cohort), &diag);
      SaveSelection(s, dir);
      std::cout << CohortName(d.cohort) << ": " << s.final_set.size() << " variables selected\n";
    }
  }
  PrintWarnings(diag);
  return kOk;
}

int CmdTrain(const Overrides& o) {
  const RunConfig c = Resolve(o);
  for (Cohort cohort : c.cohorts) {
    const fs::path dir = CohortArtifactDir(c.out, cohort);
    const CohortData d = LoadCohortData(dir);
    const std::vector<std::string> features = LoadFeatures(dir, d.train);
    const std::vector<TrainedModel> models = TrainModels(d.train, features, c);
    SaveModels(models, dir);
    for (const TrainedModel& m : models)
      std::cout << CohortName(cohort) << ": " << m.name << " -> " << DescribeParams(m.params) << '\n';
  }
  return kOk;
}

int CmdEvaluate(const Overrides& o) {
  const RunConfig c = Resolve(o);
  nlohmann::json metrics = nlohmann::json::object();
  for (Cohort cohort : c.cohorts) {
    const fs::path dir = CohortArtifactDir(c.out, cohort);
    const CohortData d = LoadCohortData(dir);
    std::vector<EvaluatedModel> evals;
    for (const TrainedModel& m : LoadModels(dir)) evals.push_back(Evaluate(m, d.test));
    SavePredictions(evals, dir);
    for (const EvaluatedModel& e : evals)
      metrics[std::string(CohortName(cohort))].push_back(ModelMetricsToJson(e));
  }
  WriteFile(c.out / "metrics.json", metrics.dump(2) + "\n");
  std::cout << metrics.dump(2) << '\n';
  return kOk;
}

// Rebuilds a report from saved artifacts without retraining.
AuditReport ReportFromArtifacts(const RunConfig& c, bool with_mitigation) {
  AuditReport report;
  report.config = RunConfigToJson(c);
  for (Cohort cohort : c.cohorts) {
    const fs::path dir = CohortArtifactDir(c.out, cohort);
    CohortReport cr;
    cr.data = LoadCohortData(dir);
    cr.features = LoadFeatures(dir, cr.data.train);
    cr.models = LoadModels(dir);
    cr.evaluations = LoadPredictions(dir, cr.data.test);
    const std::vector<std::string> prot = ResolveProtected(c, cr.data.test.table.schema());
    cr.audit = RunAudit(cr.evaluations, cr.data.test, prot, c.fairness_threshold, c.min_count,
                        &report.warnings);
    if (with_mitigation && c.mitigation.method != MitigationMethod::kNone) {
      const std::string attribute = c.mitigation.attribute.empty() ? prot.at(0) : c.mitigation.attribute;
      cr.mitigation = RunMitigation(cr.models.front(), cr.data, cr.features, attribute, c,
                                    &report.warnings);
    }
    report.cohorts.push_back(std::move(cr));
  }
  return report;
}

int CmdAudit(const Overrides& o) {
  const RunConfig c = Resolve(o);
  const AuditReport report = ReportFromArtifacts(c, false);
  EmitReport(report, c.out);
  PrintWarnings(report.warnings);
  std::cout << "audit written to " << c.out.string() << '\n';
  return kOk;
}

int CmdMitigate(const Overrides& o) {
  RunConfig c = Resolve(o);
  if (c.mitigation.method == MitigationMethod::kNone)
    throw ConfigError("mitigate: choose --mitigate reweigh or thresholds");
  const AuditReport report = ReportFromArtifacts(c, true);
  nlohmann::json doc = nlohmann::json::object();
  for (const CohortReport& cr : report.cohorts)
    doc[std::string(CohortName(cr.data.cohort))] = MitigationToJson(*cr.mitigation);
  WriteFile(c.out / "mitigation.json", doc.dump(2) + "\n");
  WriteFile(c.out / "mitigation.csv", MitigationCsv(report));
  PrintWarnings(report.warnings);
  std::cout << MitigationCsv(report);
  return kOk;
}

int CmdSynth(const std::string& config, const std::optional<std::uint64_t>& seed,
             const std::string& out, const std::string& stem) {
  SynthConfig sc = LoadSynthConfig(config);
  if (seed) sc.seed = *seed;
  const SynthData data = Generate(sc);
  WriteSynth(data, out, stem);
  std::cout << "wrote " << data.raw.rows() << " rows to " << (fs::path(out) / (stem + ".csv")).string()
            << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fairness audit of length-of-stay classifiers"};
  app.require_subcommand(1);
  Overrides run_o, ingest_o, select_o, train_o, eval_o, audit_o, mit_o;
  auto* run = app.add_subcommand("run", "Full pipeline: ingest to report");
  auto* ingest = app.add_subcommand("ingest", "Ingest, split and oversample; save cohort tables");
  auto* select = app.add_subcommand("select", "Majority-vote feature selection");
  auto* train = app.add_subcommand("train", "Tune and fit the audited models");
  auto* evaluate = app.add_subcommand("evaluate", "Score the test split");
  auto* audit = app.add_subcommand("audit", "Group and subgroup audits from saved predictions");
  auto* mitigate = app.add_subcommand("mitigate", "Reweighing or per-group thresholds, then re-audit");
  AddCommonFlags(run, run_o);
  AddCommonFlags(ingest, ingest_o);
  AddCommonFlags(select, select_o);
  AddCommonFlags(train, train_o);
  AddCommonFlags(evaluate, eval_o);
  AddCommonFlags(audit, audit_o);
  AddCommonFlags(mitigate, mit_o);

  auto* synth = app.add_subcommand("synth", "Generate a synthetic table and codebook");
  std::string synth_config, synth_out = ".", synth_stem = "synthetic";
  std::optional<std::uint64_t> synth_seed;
  synth->add_option("--config", synth_config, "Synthetic-data configuration (JSON)")->required();
  synth->add_option("--seed", synth_seed, "Random seed (overrides the config)");
  synth->add_option("--out", synth_out, "Output directory");
  synth->add_option("--stem", synth_stem, "File name stem");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }
  try {
    if (run->parsed()) return CmdRun(run_o);
    if (ingest->parsed()) return CmdIngest(ingest_o);
    if (select->parsed()) return CmdSelect(select_o);
    if (train->parsed()) return CmdTrain(train_o);
    if (evaluate->parsed()) return CmdEvaluate(eval_o);
    if (audit->parsed()) return CmdAudit(audit_o);
    if (mitigate->parsed()) return CmdMitigate(mit_o);
    if (synth->parsed()) return CmdSynth(synth_config, synth_seed, synth_out, synth_stem);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return ExitCodeFor(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kOther;
  }
  return kOther;
}
