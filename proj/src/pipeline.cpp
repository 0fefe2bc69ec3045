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

#include "fairaudit/pipeline.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <fstream>
#include <set>

#include "fairaudit/encoding.hpp"
#include "fairaudit/model_io.hpp"
#include "fairaudit/rng.hpp"

namespace fairaudit {

using json = nlohmann::json;

std::string_view MitigationName(MitigationMethod method) {
  switch (method) {
    case MitigationMethod::kReweigh: return "reweigh";
    case MitigationMethod::kThresholds: return "thresholds";
    default: return "none";
  }
}

std::optional<MitigationMethod> ParseMitigation(std::string_view name) {
  if (name == "none") return MitigationMethod::kNone;
  if (name == "reweigh") return MitigationMethod::kReweigh;
  if (name == "thresholds") return MitigationMethod::kThresholds;
  return std::nullopt;
}

std::vector<ModelSpec> DefaultModels() {
  ModelSpec boost{"LightGBM", {}};
  for (std::size_t leaves : {15, 31}) {
    BoostParams p;
    p.growth = TreeGrowth::kLeafWise;
    p.rounds = 100;
    p.learning_rate = 0.1;
    p.max_depth = 8;
    p.max_leaves = leaves;
    p.min_leaf = 5;
    boost.grid.emplace_back(p);
  }
  ModelSpec forest{"RandomForest", {}};
  for (int depth : {8, 12}) {
    ForestParams p;
    p.n_trees = 100;
    p.max_depth = depth;
    p.feature_fraction = 0.5;
    p.min_leaf = 2;
    forest.grid.emplace_back(p);
  }
  return {boost, forest};
}

namespace {

std::string ReadText(const std::filesystem::path& path, ErrorKind kind) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(kind, "cannot read " + path.string());
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

template <typename T>
T Field(const json& node, const std::string& key, const std::string& ctx) {
  try {
    return node.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(ctx + "." + key + ": missing or of the wrong type");
  }
}

void OnlyKeys(const json& node, std::initializer_list<std::string_view> allowed,
              const std::string& ctx) {
  if (!node.is_object()) throw ConfigError(ctx + ": expected an object");
  for (auto it = node.begin(); it != node.end(); ++it)
    if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end())
      throw ConfigError(ctx + ": unknown key '" + it.key() + "'");
}

LearnerParams ParamsWithKind(json node, const std::string& kind) {
  if (!node.contains("learner")) node["learner"] = kind;
  return LearnerParamsFromJson(node);
}

std::string CohortsName(const std::vector<Cohort>& cohorts) {
  if (cohorts.size() == 2) return "both";
  return std::string(CohortName(cohorts.front()));
}

std::string SelectionModeName(SelectionMode mode) {
  switch (mode) {
    case SelectionMode::kPooled: return "pooled";
    case SelectionMode::kNone: return "none";
    default: return "per_cohort";
  }
}

// Reattaches the stage name to an error without changing its kind.
[[noreturn]] void Rethrow(const std::string& stage, const std::exception& e) {
  if (const auto* err = dynamic_cast<const Error*>(&e))
    throw Error(err->kind(), "[" + stage + "] " + err->what());
  throw Error(ErrorKind::kTraining, "[" + stage + "] " + e.what());
}

std::uint64_t CohortStream(Cohort cohort) { return cohort == Cohort::kInpatient ? 0 : 1; }

}  // namespace

RunConfig ParseRunConfig(std::string_view json_text, const std::filesystem::path& base_dir) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  OnlyKeys(doc,
           {"data", "codebook", "out", "seed", "cohort", "test_fraction", "max_missing_ratio",
            "smote", "selection", "cv_folds", "models", "protected", "fairness_threshold",
            "min_count", "mitigation"},
           "config");
  RunConfig c;
  auto resolve = [&](const std::string& p) {
    const std::filesystem::path path(p);
    return path.is_absolute() ? path : base_dir / path;
  };
  if (doc.contains("data")) c.data = resolve(Field<std::string>(doc, "data", "config"));
  if (doc.contains("codebook")) c.codebook = resolve(Field<std::string>(doc, "codebook", "config"));
  if (doc.contains("out")) c.out = resolve(Field<std::string>(doc, "out", "config"));
  if (doc.contains("seed")) c.seed = Field<std::uint64_t>(doc, "seed", "config");
  if (doc.contains("cohort")) {
    const std::string name = Field<std::string>(doc, "cohort", "config");
    if (name == "both") {
      c.cohorts = {Cohort::kInpatient, Cohort::kOutpatient};
    } else if (const auto cohort = ParseCohort(name)) {
      c.cohorts = {*cohort};
    } else {
      throw ConfigError("config.cohort: expected inpatient, outpatient or both");
    }
  }
  if (doc.contains("test_fraction")) c.test_fraction = Field<double>(doc, "test_fraction", "config");
  if (doc.contains("max_missing_ratio"))
    c.max_missing_ratio = Field<double>(doc, "max_missing_ratio", "config");
  if (doc.contains("smote")) {
    const json& s = doc["smote"];
    OnlyKeys(s, {"enabled", "k"}, "config.smote");
    if (s.contains("enabled")) c.smote = Field<bool>(s, "enabled", "config.smote");
    if (s.contains("k")) c.smote_k = Field<std::size_t>(s, "k", "config.smote");
  }
  if (doc.contains("selection")) {
    const json& s = doc["selection"];
    OnlyKeys(s, {"mode", "lambdas", "cv_folds", "min_votes", "tree", "forest", "boost", "l1"},
             "config.selection");
    if (s.contains("mode")) {
      const std::string mode = Field<std::string>(s, "mode", "config.selection");
      if (mode == "per_cohort") c.selection_mode = SelectionMode::kPerCohort;
      else if (mode == "pooled") c.selection_mode = SelectionMode::kPooled;
      else if (mode == "none") c.selection_mode = SelectionMode::kNone;
      else throw ConfigError("config.selection.mode: expected per_cohort, pooled or none");
    }
    if (s.contains("lambdas"))
      c.selector.l1_lambdas = Field<std::vector<double>>(s, "lambdas", "config.selection");
    if (s.contains("cv_folds"))
      c.selector.cv_folds = Field<std::size_t>(s, "cv_folds", "config.selection");
    if (s.contains("min_votes"))
      c.selector.min_votes = Field<std::size_t>(s, "min_votes", "config.selection");
    if (s.contains("tree"))
      c.selector.tree = std::get<TreeParams>(ParamsWithKind(s["tree"], "decision_tree"));
    if (s.contains("forest"))
      c.selector.forest = std::get<ForestParams>(ParamsWithKind(s["forest"], "random_forest"));
    if (s.contains("boost"))
      c.selector.boost = std::get<BoostParams>(ParamsWithKind(s["boost"], "gradient_boosting"));
    if (s.contains("l1"))
      c.selector.l1 = std::get<L1Params>(ParamsWithKind(s["l1"], "l1_logistic"));
  }
  if (doc.contains("cv_folds")) c.cv_folds = Field<std::size_t>(doc, "cv_folds", "config");
  if (doc.contains("models")) {
    if (!doc["models"].is_array()) throw ConfigError("config.models: expected an array");
    for (std::size_t m = 0; m < doc["models"].size(); ++m) {
      const json& node = doc["models"][m];
      const std::string ctx = "config.models[" + std::to_string(m) + "]";
      OnlyKeys(node, {"name", "grid"}, ctx);
      ModelSpec spec;
      spec.name = Field<std::string>(node, "name", ctx);
      if (!node.contains("grid") || !node["grid"].is_array() || node["grid"].empty())
        throw ConfigError(ctx + ".grid: expected a non-empty array");
      for (const json& p : node["grid"]) spec.grid.push_back(LearnerParamsFromJson(p));
      c.models.push_back(std::move(spec));
    }
  }
  if (c.models.empty()) c.models = DefaultModels();
  if (doc.contains("protected"))
    c.protected_variables = Field<std::vector<std::string>>(doc, "protected", "config");
  if (doc.contains("fairness_threshold"))
    c.fairness_threshold = Field<double>(doc, "fairness_threshold", "config");
  if (doc.contains("min_count")) c.min_count = Field<std::uint64_t>(doc, "min_count", "config");
  if (doc.contains("mitigation")) {
    const json& m = doc["mitigation"];
    OnlyKeys(m, {"method", "criterion", "epsilon", "attribute", "validation_fraction"},
             "config.mitigation");
    if (m.contains("method")) {
      const auto method = ParseMitigation(Field<std::string>(m, "method", "config.mitigation"));
      if (!method) throw ConfigError("config.mitigation.method: expected none, reweigh or thresholds");
      c.mitigation.method = *method;
    }
    if (m.contains("criterion")) {
      const auto crit = ParseCriterion(Field<std::string>(m, "criterion", "config.mitigation"));
      if (!crit)
        throw ConfigError(
            "config.mitigation.criterion: expected demographic_parity or equalized_odds");
      c.mitigation.criterion = *crit;
    }
    if (m.contains("epsilon")) c.mitigation.epsilon = Field<double>(m, "epsilon", "config.mitigation");
    if (m.contains("attribute"))
      c.mitigation.attribute = Field<std::string>(m, "attribute", "config.mitigation");
    if (m.contains("validation_fraction"))
      c.mitigation.validation_fraction =
          Field<double>(m, "validation_fraction", "config.mitigation");
  }
  return c;
}

RunConfig LoadRunConfig(const std::filesystem::path& path) {
  return ParseRunConfig(ReadText(path, ErrorKind::kConfig), path.parent_path());
}

json RunConfigToJson(const RunConfig& c) {
  json doc;
  doc["data"] = c.data.string();
  doc["codebook"] = c.codebook.string();
  doc["out"] = c.out.string();
  doc["seed"] = c.seed ? json(*c.seed) : json(nullptr);
  doc["cohort"] = CohortsName(c.cohorts);
  doc["test_fraction"] = c.test_fraction;
  doc["max_missing_ratio"] = c.max_missing_ratio;
  doc["smote"] = {{"enabled", c.smote}, {"k", c.smote_k}};
  json tree = LearnerParamsToJson(c.selector.tree);
  json forest = LearnerParamsToJson(c.selector.forest);
  json boost = LearnerParamsToJson(c.selector.boost);
  json l1 = LearnerParamsToJson(c.selector.l1);
  doc["selection"] = {{"mode", SelectionModeName(c.selection_mode)},
                      {"lambdas", c.selector.l1_lambdas},
                      {"cv_folds", c.selector.cv_folds},
                      {"min_votes", c.selector.min_votes},
                      {"tree", tree},
                      {"forest", forest},
                      {"boost", boost},
                      {"l1", l1}};
  doc["cv_folds"] = c.cv_folds;
  doc["models"] = json::array();
  for (const ModelSpec& m : c.models) {
    json grid = json::array();
    for (const LearnerParams& p : m.grid) grid.push_back(LearnerParamsToJson(p));
    doc["models"].push_back({{"name", m.name}, {"grid", grid}});
  }
  doc["protected"] = c.protected_variables;
  doc["fairness_threshold"] = c.fairness_threshold;
  doc["min_count"] = c.min_count;
  doc["mitigation"] = {{"method", MitigationName(c.mitigation.method)},
                       {"criterion", CriterionName(c.mitigation.criterion)},
                       {"epsilon", c.mitigation.epsilon},
                       {"attribute", c.mitigation.attribute},
                       {"validation_fraction", c.mitigation.validation_fraction}};
  return doc;
}

void CheckRunConfig(const RunConfig& c) {
  if (!c.seed) throw ConfigError("config: a seed is required");
  if (c.data.empty()) throw ConfigError("config: data path is missing");
  if (c.codebook.empty()) throw ConfigError("config: codebook path is missing");
  for (const auto& [what, path] : {std::pair{"data", c.data}, std::pair{"codebook", c.codebook}}) {
    std::error_code ec;
    if (!std::filesystem::is_regular_file(path, ec))
      throw ConfigError(std::string("config: ") + what + " file not found: " + path.string());
  }
  if (!(c.test_fraction > 0.0 && c.test_fraction < 1.0))
    throw ConfigError("config.test_fraction must lie in (0, 1)");
  if (!(c.max_missing_ratio >= 0.0 && c.max_missing_ratio <= 1.0))
    throw ConfigError("config.max_missing_ratio must lie in [0, 1]");
  if (c.smote && c.smote_k < 1) throw ConfigError("config.smote.k must be at least 1");
  if (c.cv_folds < 2) throw ConfigError("config.cv_folds must be at least 2");
  if (c.models.empty()) throw ConfigError("config.models must not be empty");
  std::set<std::string> names;
  for (const ModelSpec& m : c.models) {
    if (m.name.empty() || !names.insert(m.name).second)
      throw ConfigError("config.models: names must be non-empty and unique");
    if (m.grid.empty()) throw ConfigError("config.models." + m.name + ": empty grid");
  }
  if (!(c.fairness_threshold > 0.0 && c.fairness_threshold <= 1.0))
    throw ConfigError("fairness threshold must lie in (0, 1]");
  if (!(c.mitigation.epsilon >= 0.0)) throw ConfigError("epsilon must be non-negative");
  if (!(c.mitigation.validation_fraction > 0.0 && c.mitigation.validation_fraction < 1.0))
    throw ConfigError("config.mitigation.validation_fraction must lie in (0, 1)");
  if (c.selector.min_votes < 1 || c.selector.min_votes > 4)
    throw ConfigError("config.selection.min_votes must lie in [1, 4]");
}

SelectorConfig SelectorFor(const RunConfig& config, std::optional<Cohort> cohort) {
  SelectorConfig sc = config.selector;
  sc.seed = DeriveSeed(config.seed.value_or(0), cohort ? 61 + CohortStream(*cohort) : 60);
  return sc;
}

PreparedData PrepareData(const RunConfig& config, Diagnostics* diag) {
  auto codebook = std::make_shared<const Codebook>(LoadCodebook(config.codebook));
  const CodedTable raw = IngestTable(config.data, codebook);
  PreparedData out;
  out.total_rows = raw.rows();
  if (raw.rows() == 0) throw DataError(config.data.string() + ": no data rows");
  SparseDropResult sparse = DropSparseColumns(raw, config.max_missing_ratio);
  out.dropped_sparse = sparse.dropped;
  for (const std::string& name : sparse.dropped)
    Warn(diag, "dropped sparse column " + name);
  const CodedTable folded = FoldMissingAsCategory(sparse.table, diag);
  const CohortSplit split = SplitCohorts(folded);
  out.excluded_rows = split.excluded;
  for (Cohort cohort : config.cohorts) {
    const CodedTable& part = cohort == Cohort::kInpatient ? split.inpatient : split.outpatient;
    if (part.rows() == 0)
      throw DataError("cohort " + std::string(CohortName(cohort)) + " has no rows");
    out.cohorts.push_back(BuildTarget(part, cohort));
  }
  return out;
}

CohortData SplitAndBalance(const LabeledTable& cohort, const RunConfig& config) {
  const std::uint64_t seed = config.seed.value_or(0);
  CohortData d;
  d.cohort = cohort.cohort;
  d.rows = cohort.rows();
  d.positives = static_cast<std::size_t>(std::count(cohort.labels.begin(), cohort.labels.end(), 1));
  const SplitIndices split = StratifiedSplit(cohort.labels, 1.0 - config.test_fraction,
                                             DeriveSeed(seed, 10 + CohortStream(cohort.cohort)));
  LabeledTable train = cohort.SelectRows(split.train);
  d.test = cohort.SelectRows(split.test);
  d.train_rows = train.rows();
  if (config.smote) {
    d.train = SmoteNominal(train, config.smote_k,
                           DeriveSeed(seed, 20 + CohortStream(cohort.cohort)));
  } else {
    d.train = std::move(train);
  }
  d.synthetic_rows = d.train.rows() - d.train_rows;
  return d;
}

namespace {

LearnerParams Reseed(LearnerParams params, std::uint64_t seed) {
  std::visit(
      [&](auto& p) {
        if constexpr (requires { p.seed; }) p.seed = seed;
      },
      params);
  return params;
}

}  // namespace

std::vector<TrainedModel> TrainModels(const LabeledTable& train,
                                      const std::vector<std::string>& features,
                                      const RunConfig& config) {
  const std::uint64_t seed = config.seed.value_or(0);
  const CodedTable inputs = train.table.SelectColumns(features);
  const EncodedMatrix data(inputs);
  const FoldPlan folds =
      StratifiedKFold(train.labels, config.cv_folds,
                      DeriveSeed(seed, 30 + CohortStream(train.cohort)));
  std::vector<TrainedModel> out;
  for (std::size_t m = 0; m < config.models.size(); ++m) {
    const ModelSpec& spec = config.models[m];
    const std::uint64_t model_seed = DeriveSeed(seed, 100 + 10 * m + CohortStream(train.cohort));
    std::vector<LearnerParams> grid;
    for (const LearnerParams& p : spec.grid) grid.push_back(Reseed(p, model_seed));
    TrainedModel tm;
    tm.name = spec.name;
    tm.tuning = Tune(data, train.labels, grid, folds, ScoringRule::kAccuracy);
    tm.params = tm.tuning.best;
    tm.model = Train(data, train.labels, tm.params);
    out.push_back(std::move(tm));
  }
  return out;
}

EvaluatedModel EvaluatePredictions(const std::string& name, const LabeledTable& test,
                                   Predictions predictions) {
  EvaluatedModel e;
  e.name = name;
  e.confusion = Confusion(test.labels, predictions.labels);
  e.report = MakeClassificationReport(e.confusion);
  e.predictions = std::move(predictions);
  return e;
}

EvaluatedModel Evaluate(const TrainedModel& model, const LabeledTable& test) {
  const EncodedMatrix data(ModelEncoding(model.model), test.table);
  return EvaluatePredictions(model.name, test, Predict(model.model, data));
}

std::vector<std::string> ResolveProtected(const RunConfig& config, const Codebook& schema) {
  if (!config.protected_variables.empty()) {
    for (const std::string& name : config.protected_variables)
      if (!schema.IndexOf(name))
        throw ConfigError("protected variable '" + name + "' is not in the ingested table");
    return config.protected_variables;
  }
  std::vector<std::string> out;
  for (const VariableSpec& v : schema.variables())
    if (v.role == Role::kProtected) out.push_back(v.name);
  return out;
}

AuditResult RunAudit(const std::vector<EvaluatedModel>& models, const LabeledTable& test,
                     const std::vector<std::string>& protected_variables, double threshold,
                     std::uint64_t min_count, Diagnostics* diag) {
  AuditResult audit;
  std::vector<std::vector<Label>> preds;
  std::vector<std::string> names;
  for (const EvaluatedModel& m : models) {
    audit.group.push_back(
        {m.name, GroupLevelAudit(m.predictions.labels, test.labels, test.table,
                                 protected_variables, diag)});
    preds.push_back(m.predictions.labels);
    names.push_back(m.name);
  }
  if (models.empty()) return audit;
  for (const std::string& variable : protected_variables) {
    SubgroupAudit sub =
        AuditSubgroups(preds, names, test.table, variable, threshold, min_count);
    if (sub.rows.empty()) {
      Warn(diag, "subgroup audit of " + variable + ": no subgroup meets the minimum count");
    } else {
      audit.boxplots.push_back(ComputeBoxplot(sub));
    }
    audit.subgroups.push_back(std::move(sub));
  }
  return audit;
}

double SelectionRateGap(std::span<const Label> predictions, std::span<const int> attribute) {
  std::map<int, std::pair<std::uint64_t, std::uint64_t>> tally;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    auto& [n, s] = tally[attribute[i]];
    ++n;
    s += predictions[i] ? 1 : 0;
  }
  if (tally.empty()) return 0.0;
  double lo = 1.0, hi = 0.0;
  for (const auto& [code, ns] : tally) {
    const double r = static_cast<double>(ns.second) / static_cast<double>(ns.first);
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  }
  return hi - lo;
}

namespace {

double Accuracy(std::span<const Label> labels, std::span<const Label> preds) {
  std::size_t correct = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) correct += labels[i] == preds[i] ? 1 : 0;
  return static_cast<double>(correct) / static_cast<double>(labels.size());
}

void Summarize(std::span<const Label> labels, std::span<const Label> preds,
               std::span<const int> attribute, double& accuracy, double& gap,
               std::optional<double>& dpr, std::optional<double>& eod) {
  accuracy = Accuracy(labels, preds);
  gap = SelectionRateGap(preds, attribute);
  const GroupOutcomes groups = ComputeGroupOutcomes(labels, preds, attribute);
  try {
    dpr = DemographicParityRatio(groups);
  } catch (const Error&) {
  }
  try {
    eod = ComputeRateDifferences(groups).eod;
  } catch (const Error&) {
  }
}

double WeightedDependence(std::span<const Label> labels, std::span<const int> attribute,
                          std::span<const double> w) {
  std::map<int, std::array<double, 2>> joint;
  std::array<double, 2> by_label{0.0, 0.0};
  double total = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    joint[attribute[i]][labels[i] ? 1 : 0] += w[i];
    by_label[labels[i] ? 1 : 0] += w[i];
    total += w[i];
  }
  double worst = 0.0;
  for (const auto& [code, cell] : joint) {
    const double pa = (cell[0] + cell[1]) / total;
    for (int y = 0; y < 2; ++y)
      worst = std::max(worst, std::abs(cell[y] / total - pa * by_label[y] / total));
  }
  return worst;
}

}  // namespace

MitigationOutcome RunMitigation(const TrainedModel& reference, const CohortData& data,
                                const std::vector<std::string>& features,
                                const std::string& attribute, const RunConfig& config,
                                Diagnostics* diag) {
  MitigationOutcome out;
  out.method = config.mitigation.method;
  out.model = reference.name;
  out.attribute = attribute;
  const std::uint64_t seed = config.seed.value_or(0);
  const auto test_attr = data.test.table.column(attribute);
  std::vector<Label> baseline, mitigated;

  if (config.mitigation.method == MitigationMethod::kReweigh) {
    const std::vector<double> w = Reweigh(data.train, attribute);
    out.weighted_dependence = WeightedDependence(data.train.labels, data.train.table.column(attribute), w);
    const EncodedMatrix train(data.train.table.SelectColumns(features));
    const Model model = Train(train, data.train.labels, reference.params, w);
    const EncodedMatrix test(ModelEncoding(reference.model), data.test.table);
    baseline = Predict(reference.model, test).labels;
    mitigated = Predict(model, EncodedMatrix(ModelEncoding(model), data.test.table)).labels;
  } else if (config.mitigation.method == MitigationMethod::kThresholds) {
    // Original (non-synthetic) training rows come first.
    std::vector<std::size_t> original(data.train_rows);
    for (std::size_t i = 0; i < original.size(); ++i) original[i] = i;
    const LabeledTable pool = data.train.SelectRows(original);
    const SplitIndices split =
        StratifiedSplit(pool.labels, 1.0 - config.mitigation.validation_fraction,
                        DeriveSeed(seed, 40 + CohortStream(data.cohort)));
    LabeledTable fit = pool.SelectRows(split.train);
    const LabeledTable validation = pool.SelectRows(split.test);
    if (config.smote)
      fit = SmoteNominal(fit, config.smote_k, DeriveSeed(seed, 50 + CohortStream(data.cohort)));
    const Model model =
        Train(EncodedMatrix(fit.table.SelectColumns(features)), fit.labels, reference.params);
    const EncodingPtr& enc = ModelEncoding(model);
    const std::vector<double> val_scores =
        PredictScores(model, EncodedMatrix(enc, validation.table));
    out.policy = FitGroupThresholds(val_scores, validation.labels,
                                    validation.table.column(attribute),
                                    config.mitigation.criterion, config.mitigation.epsilon);
    if (!out.policy->feasible)
      Warn(diag, "threshold mitigation on " + attribute + ": epsilon " +
                     std::to_string(config.mitigation.epsilon) +
                     " is infeasible on the validation split");
    const Predictions test_pred = Predict(model, EncodedMatrix(enc, data.test.table));
    baseline = test_pred.labels;
    mitigated = ApplyThresholds(*out.policy, test_pred.scores, test_attr, diag);
  } else {
    throw InvalidArgument("mitigation method is none");
  }

  Summarize(data.test.labels, baseline, test_attr, out.baseline_accuracy, out.baseline_rate_gap,
            out.baseline_dpr, out.baseline_eod);
  Summarize(data.test.labels, mitigated, test_attr, out.mitigated_accuracy,
            out.mitigated_rate_gap, out.mitigated_dpr, out.mitigated_eod);
  out.accuracy_drop = out.baseline_accuracy - out.mitigated_accuracy;
  const std::vector<std::string> attrs = {attribute};
  out.mitigated_group_audit =
      GroupLevelAudit(mitigated, data.test.labels, data.test.table, attrs, diag);
  const std::vector<std::vector<Label>> preds = {mitigated};
  const std::vector<std::string> names = {reference.name + "+" +
                                          std::string(MitigationName(out.method))};
  out.mitigated_subgroups = AuditSubgroups(preds, names, data.test.table, attribute,
                                           config.fairness_threshold, config.min_count);
  return out;
}

LabeledTable ConcatRows(const std::vector<const LabeledTable*>& parts) {
  if (parts.empty()) throw InvalidArgument("nothing to concatenate");
  const CodedTable& first = parts.front()->table;
  std::vector<std::vector<int>> cols(first.cols());
  std::vector<Label> labels;
  std::size_t rows = 0;
  for (const LabeledTable* p : parts) {
    if (p->table.cols() != first.cols())
      throw DataError("cannot concatenate tables with different columns");
    for (std::size_t c = 0; c < first.cols(); ++c) {
      if (p->table.schema().at(c).name != first.schema().at(c).name)
        throw DataError("cannot concatenate tables with different columns");
      const auto col = p->table.column(c);
      cols[c].insert(cols[c].end(), col.begin(), col.end());
    }
    labels.insert(labels.end(), p->labels.begin(), p->labels.end());
    rows += p->rows();
  }
  return LabeledTable{CodedTable(first.schema_ptr(), std::move(cols), rows), std::move(labels),
                      parts.front()->cohort};
}

AuditReport RunPipeline(const RunConfig& config) {
  AuditReport report;
  try {
    CheckRunConfig(config);
  } catch (const std::exception& e) {
    Rethrow("config", e);
  }
  report.config = RunConfigToJson(config);
  Diagnostics* diag = &report.warnings;
  using Clock = std::chrono::steady_clock;
  auto timed = [&](const std::string& stage, auto&& fn) {
    const auto start = Clock::now();
    try {
      fn();
    } catch (const std::exception& e) {
      Rethrow(stage, e);
    }
    report.timings.emplace_back(stage,
                                std::chrono::duration<double>(Clock::now() - start).count());
  };

  PreparedData prepared;
  timed("ingest", [&] { prepared = PrepareData(config, diag); });
  report.total_rows = prepared.total_rows;
  report.excluded_rows = prepared.excluded_rows;
  report.dropped_sparse = prepared.dropped_sparse;

  for (const LabeledTable& cohort : prepared.cohorts) {
    CohortReport cr;
    timed(std::string("split:") + std::string(CohortName(cohort.cohort)),
          [&] { cr.data = SplitAndBalance(cohort, config); });
    report.cohorts.push_back(std::move(cr));
  }
  prepared.cohorts.clear();

  auto all_columns = [](const LabeledTable& t) {
    std::vector<std::string> names;
    for (const VariableSpec& v : t.table.schema().variables()) names.push_back(v.name);
    return names;
  };
  if (config.selection_mode == SelectionMode::kPooled) {
    timed("select:pooled", [&] {
      std::vector<const LabeledTable*> parts;
      for (const CohortReport& cr : report.cohorts) parts.push_back(&cr.data.train);
      report.pooled_selection =
          SelectFeatures(ConcatRows(parts), SelectorFor(config, std::nullopt), diag);
    });
  }
  for (CohortReport& cr : report.cohorts) {
    const std::string tag(CohortName(cr.data.cohort));
    if (config.selection_mode == SelectionMode::kPerCohort) {
      timed("select:" + tag, [&] {
        cr.selection = SelectFeatures(cr.data.train, SelectorFor(config, cr.data.cohort), diag);
      });
      cr.features = cr.selection->final_set;
    } else if (config.selection_mode == SelectionMode::kPooled) {
      cr.features = report.pooled_selection->final_set;
    } else {
      cr.features = all_columns(cr.data.train);
    }
    if (cr.features.empty())
      throw TrainingError("[select:" + tag + "] feature selection produced an empty set");

    timed("train:" + tag, [&] { cr.models = TrainModels(cr.data.train, cr.features, config); });
    timed("evaluate:" + tag, [&] {
      for (const TrainedModel& m : cr.models) cr.evaluations.push_back(Evaluate(m, cr.data.test));
    });
    std::vector<std::string> protected_vars;
    timed("audit:" + tag, [&] {
      protected_vars = ResolveProtected(config, cr.data.test.table.schema());
      cr.audit = RunAudit(cr.evaluations, cr.data.test, protected_vars,
                          config.fairness_threshold, config.min_count, diag);
    });
    if (config.mitigation.method != MitigationMethod::kNone) {
      timed("mitigate:" + tag, [&] {
        std::string attribute = config.mitigation.attribute;
        if (attribute.empty()) {
          if (protected_vars.empty()) throw ConfigError("no protected variable to mitigate along");
          attribute = protected_vars.front();
        }
        cr.mitigation =
            RunMitigation(cr.models.front(), cr.data, cr.features, attribute, config, diag);
      });
    }
  }
  return report;
}

}  // namespace fairaudit
