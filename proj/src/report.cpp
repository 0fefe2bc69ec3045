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

#include "fairaudit/report.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "fairaudit/model_io.hpp"

namespace fairaudit {

using json = nlohmann::json;

std::string FormatNumber(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

std::string FormatNumber(const std::optional<double>& value) {
  return value ? FormatNumber(*value) : std::string();
}

namespace {

json Opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::string CsvCell(std::string_view s) {
  if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

json ConfusionToJson(const ConfusionCounts& c) {
  return {{"tp", c.tp}, {"fp", c.fp}, {"tn", c.tn}, {"fn", c.fn}};
}

}  // namespace

json SelectionToJson(const SelectionResult& s) {
  json selectors = json::array();
  for (const SelectorOutcome& o : s.selectors) {
    json ranked = json::array();
    for (const auto& [name, score] : o.ranked) ranked.push_back({{"variable", name}, {"importance", score}});
    json node = {{"selector", SelectorName(o.selector)},
                 {"abstained", o.abstained},
                 {"error", o.error},
                 {"ranked", ranked},
                 {"selected", o.selected}};
    node["chosen_lambda"] = Opt(o.chosen_lambda);
    selectors.push_back(node);
  }
  json votes = json::object();
  for (const auto& [name, n] : s.votes) votes[name] = n;
  return {{"candidates", s.candidates},
          {"selectors", selectors},
          {"votes", votes},
          {"final", s.final_set},
          {"min_votes", s.config.min_votes},
          {"l1_lambdas", s.config.l1_lambdas}};
}

json GroupRowToJson(const GroupAuditRow& r) {
  return {{"variable", r.variable}, {"display_name", r.display_name}, {"groups", r.groups},
          {"eod", Opt(r.eod)},      {"fprd", Opt(r.fprd)},              {"fnrd", Opt(r.fnrd)},
          {"osr", Opt(r.osr)},      {"dpr", Opt(r.dpr)},                {"error", r.error}};
}

json SubgroupAuditToJson(const SubgroupAudit& a) {
  json rows = json::array();
  for (const SubgroupRow& r : a.rows)
    rows.push_back({{"code", r.code},
                    {"category", r.label},
                    {"count", r.count},
                    {"selection_rates", r.selection_rates},
                    {"parity_ratio", r.parity_ratio},
                    {"flagged", r.flagged}});
  return {{"variable", a.variable}, {"display_name", a.display_name}, {"models", a.models},
          {"threshold", a.threshold}, {"rows", rows}};
}

json BoxplotToJson(const BoxplotStats& b) {
  json points = json::array();
  for (const BoxplotPoint& p : b.points)
    points.push_back({{"category", p.label}, {"selection_rate", p.value}, {"kind", PointKindName(p.kind)}});
  return {{"variable", b.variable}, {"q1", b.q1}, {"median", b.median}, {"q3", b.q3},
          {"lo_whisker", b.lo_whisker}, {"hi_whisker", b.hi_whisker}, {"points", points}};
}

json PolicyToJson(const ThresholdPolicy& p) {
  json thresholds = json::object();
  for (const auto& [code, t] : p.thresholds) thresholds[std::to_string(code)] = t;
  return {{"criterion", CriterionName(p.criterion)},
          {"epsilon", p.epsilon},
          {"thresholds", thresholds},
          {"global_threshold", p.global_threshold},
          {"achieved_disparity", p.achieved_disparity},
          {"fit_accuracy", p.fit_accuracy},
          {"feasible", p.feasible}};
}

json MitigationToJson(const MitigationOutcome& m) {
  json rows = json::array();
  for (const GroupAuditRow& r : m.mitigated_group_audit) rows.push_back(GroupRowToJson(r));
  json node = {{"method", MitigationName(m.method)},
               {"model", m.model},
               {"attribute", m.attribute},
               {"baseline_accuracy", m.baseline_accuracy},
               {"mitigated_accuracy", m.mitigated_accuracy},
               {"accuracy_drop", m.accuracy_drop},
               {"baseline_rate_gap", m.baseline_rate_gap},
               {"mitigated_rate_gap", m.mitigated_rate_gap},
               {"baseline_dpr", Opt(m.baseline_dpr)},
               {"mitigated_dpr", Opt(m.mitigated_dpr)},
               {"baseline_eod", Opt(m.baseline_eod)},
               {"mitigated_eod", Opt(m.mitigated_eod)},
               {"weighted_dependence", Opt(m.weighted_dependence)},
               {"group_audit", rows}};
  node["policy"] = m.policy ? PolicyToJson(*m.policy) : json(nullptr);
  node["subgroups"] = m.mitigated_subgroups ? SubgroupAuditToJson(*m.mitigated_subgroups) : json(nullptr);
  return node;
}

json ModelMetricsToJson(const EvaluatedModel& e) {
  const ClassificationReport& r = e.report;
  return {{"model", e.name},
          {"accuracy", r.accuracy},
          {"precision", r.precision},
          {"recall", r.recall},
          {"f1", r.f1},
          {"class_precision", {r.class_precision[0], r.class_precision[1]}},
          {"class_recall", {r.class_recall[0], r.class_recall[1]}},
          {"class_f1", {r.class_f1[0], r.class_f1[1]}},
          {"zero_division", r.zero_division},
          {"confusion", ConfusionToJson(e.confusion)}};
}

json ReportToJson(const AuditReport& report) {
  json doc;
  doc["schema_version"] = kReportSchemaVersion;
  doc["tool"] = {{"name", "fairaudit"}, {"version", kToolVersion}};
  doc["config"] = report.config;
  doc["ingest"] = {{"total_rows", report.total_rows},
                   {"excluded_rows", report.excluded_rows},
                   {"dropped_sparse", report.dropped_sparse}};
  doc["pooled_selection"] =
      report.pooled_selection ? SelectionToJson(*report.pooled_selection) : json(nullptr);
  doc["cohorts"] = json::array();
  for (const CohortReport& cr : report.cohorts) {
    json c;
    c["cohort"] = CohortName(cr.data.cohort);
    c["rows"] = cr.data.rows;
    c["positives"] = cr.data.positives;
    c["negatives"] = cr.data.rows - cr.data.positives;
    c["split"] = {{"train", cr.data.train_rows},
                  {"test", cr.data.test.rows()},
                  {"synthetic", cr.data.synthetic_rows},
                  {"train_after_oversampling", cr.data.train.rows()}};
    c["features"] = cr.features;
    c["selection"] = cr.selection ? SelectionToJson(*cr.selection) : json(nullptr);
    json models = json::array();
    for (std::size_t m = 0; m < cr.models.size(); ++m) {
      const TrainedModel& tm = cr.models[m];
      json cv = json::array();
      for (const CvCell& cell : tm.tuning.cells)
        cv.push_back({{"params", LearnerParamsToJson(cell.params)},
                      {"fold_scores", cell.fold_scores},
                      {"mean_score", cell.mean_score},
                      {"failed", cell.failed},
                      {"error", cell.error}});
      const ImportanceVector imp = Importance(tm.model);
      json importance = json::object();
      for (std::size_t i = 0; i < imp.variables.size(); ++i) importance[imp.variables[i]] = imp.scores[i];
      json node = {{"name", tm.name},
                   {"kind", ModelKind(tm.model)},
                   {"params", LearnerParamsToJson(tm.params)},
                   {"cv", cv},
                   {"importance", importance},
                   {"importance_method", imp.method}};
      if (m < cr.evaluations.size()) node["metrics"] = ModelMetricsToJson(cr.evaluations[m]);
      models.push_back(node);
    }
    c["models"] = models;
    json groups = json::array();
    for (const GroupAuditTable& t : cr.audit.group) {
      json rows = json::array();
      for (const GroupAuditRow& r : t.rows) rows.push_back(GroupRowToJson(r));
      groups.push_back({{"model", t.model}, {"rows", rows}});
    }
    c["group_audit"] = groups;
    json subs = json::array();
    for (const SubgroupAudit& a : cr.audit.subgroups) subs.push_back(SubgroupAuditToJson(a));
    c["subgroup_audits"] = subs;
    json boxes = json::array();
    for (const BoxplotStats& b : cr.audit.boxplots) boxes.push_back(BoxplotToJson(b));
    c["boxplots"] = boxes;
    c["mitigation"] = cr.mitigation ? MitigationToJson(*cr.mitigation) : json(nullptr);
    doc["cohorts"].push_back(c);
  }
  doc["warnings"] = report.warnings.warnings();
  return doc;
}

std::string ModelMetricsCsv(const AuditReport& report) {
  std::ostringstream os;
  os << "cohort,model,accuracy,precision,recall,f1\n";
  for (const CohortReport& cr : report.cohorts)
    for (const EvaluatedModel& e : cr.evaluations)
      os << CohortName(cr.data.cohort) << ',' << CsvCell(e.name) << ','
         << FormatNumber(e.report.accuracy) << ',' << FormatNumber(e.report.precision) << ','
         << FormatNumber(e.report.recall) << ',' << FormatNumber(e.report.f1) << '\n';
  return os.str();
}

std::string GroupAuditCsv(const AuditReport& report) {
  std::ostringstream os;
  os << "cohort,model,variable,display_name,groups,eod,fprd,fnrd,osr,dpr,error\n";
  for (const CohortReport& cr : report.cohorts)
    for (const GroupAuditTable& t : cr.audit.group)
      for (const GroupAuditRow& r : t.rows)
        os << CohortName(cr.data.cohort) << ',' << CsvCell(t.model) << ',' << CsvCell(r.variable)
           << ',' << CsvCell(r.display_name) << ',' << r.groups << ',' << FormatNumber(r.eod)
           << ',' << FormatNumber(r.fprd) << ',' << FormatNumber(r.fnrd) << ','
           << FormatNumber(r.osr) << ',' << FormatNumber(r.dpr) << ',' << CsvCell(r.error)
           << '\n';
  return os.str();
}

std::string SubgroupCsv(const SubgroupAudit& a) {
  std::ostringstream os;
  os << "code,category,count";
  for (const std::string& m : a.models) os << ',' << CsvCell("selection_rate_" + m);
  os << ",parity_ratio,flagged\n";
  for (const SubgroupRow& r : a.rows) {
    os << r.code << ',' << CsvCell(r.label) << ',' << r.count;
    for (double sr : r.selection_rates) os << ',' << FormatNumber(sr);
    os << ',' << FormatNumber(r.parity_ratio) << ',' << (r.flagged ? "true" : "false") << '\n';
  }
  return os.str();
}

std::string BoxplotCsv(const AuditReport& report) {
  std::ostringstream os;
  os << "cohort,variable,q1,median,q3,lo_whisker,hi_whisker\n";
  for (const CohortReport& cr : report.cohorts)
    for (const BoxplotStats& b : cr.audit.boxplots)
      os << CohortName(cr.data.cohort) << ',' << CsvCell(b.variable) << ',' << FormatNumber(b.q1)
         << ',' << FormatNumber(b.median) << ',' << FormatNumber(b.q3) << ','
         << FormatNumber(b.lo_whisker) << ',' << FormatNumber(b.hi_whisker) << '\n';
  return os.str();
}

std::string BoxplotPointsCsv(const AuditReport& report) {
  std::ostringstream os;
  os << "cohort,variable,category,selection_rate,kind\n";
  for (const CohortReport& cr : report.cohorts)
    for (const BoxplotStats& b : cr.audit.boxplots)
      for (const BoxplotPoint& p : b.points)
        os << CohortName(cr.data.cohort) << ',' << CsvCell(b.variable) << ',' << CsvCell(p.label)
           << ',' << FormatNumber(p.value) << ',' << PointKindName(p.kind) << '\n';
  return os.str();
}

std::string MitigationCsv(const AuditReport& report) {
  std::ostringstream os;
  os << "cohort,method,model,attribute,baseline_accuracy,mitigated_accuracy,accuracy_drop,"
        "baseline_rate_gap,mitigated_rate_gap,baseline_dpr,mitigated_dpr,feasible\n";
  for (const CohortReport& cr : report.cohorts) {
    if (!cr.mitigation) continue;
    const MitigationOutcome& m = *cr.mitigation;
    os << CohortName(cr.data.cohort) << ',' << MitigationName(m.method) << ',' << CsvCell(m.model)
       << ',' << CsvCell(m.attribute) << ',' << FormatNumber(m.baseline_accuracy) << ','
       << FormatNumber(m.mitigated_accuracy) << ',' << FormatNumber(m.accuracy_drop) << ','
       << FormatNumber(m.baseline_rate_gap) << ',' << FormatNumber(m.mitigated_rate_gap) << ','
       << FormatNumber(m.baseline_dpr) << ',' << FormatNumber(m.mitigated_dpr) << ','
       << (m.policy ? (m.policy->feasible ? "true" : "false") : "") << '\n';
  }
  return os.str();
}

void WriteFile(const std::filesystem::path& path, const std::string& content) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) throw IoError("cannot create " + path.parent_path().string() + ": " + ec.message());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << content;
  out.flush();
  if (!out) throw IoError("write failed: " + path.string());
}

void EmitReport(const AuditReport& report, const std::filesystem::path& outdir) {
  WriteFile(outdir / "report.json", ReportToJson(report).dump(2) + "\n");
  WriteFile(outdir / "model_metrics.csv", ModelMetricsCsv(report));
  WriteFile(outdir / "group_audit.csv", GroupAuditCsv(report));
  WriteFile(outdir / "boxplot.csv", BoxplotCsv(report));
  WriteFile(outdir / "boxplot_points.csv", BoxplotPointsCsv(report));
  if (std::any_of(report.cohorts.begin(), report.cohorts.end(),
                  [](const CohortReport& c) { return c.mitigation.has_value(); }))
    WriteFile(outdir / "mitigation.csv", MitigationCsv(report));
  for (const CohortReport& cr : report.cohorts) {
    const std::string cohort(CohortName(cr.data.cohort));
    for (const SubgroupAudit& a : cr.audit.subgroups)
      WriteFile(outdir / "subgroups" / (cohort + "_" + a.variable + ".csv"), SubgroupCsv(a));
    std::string list;
    for (const std::string& f : cr.features) list += f + "\n";
    WriteFile(outdir / ("selected_features_" + cohort + ".txt"), list);
  }
  json timings = json::object();
  for (const auto& [stage, seconds] : report.timings) timings[stage] = seconds;
  WriteFile(outdir / "timings.json", timings.dump(2) + "\n");
}

}  // namespace fairaudit
