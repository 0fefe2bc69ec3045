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

#include "fairaudit/artifacts.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "fairaudit/model_io.hpp"
#include "fairaudit/report.hpp"

namespace fairaudit {

using json = nlohmann::json;

namespace {

std::string Slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read artifact " + path.string());
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

json ReadJson(const std::filesystem::path& path) {
  try {
    return json::parse(Slurp(path));
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

}  // namespace

std::filesystem::path CohortArtifactDir(const std::filesystem::path& out, Cohort cohort) {
  return out / "artifacts" / std::string(CohortName(cohort));
}

LabeledTable ParseLabeledCsv(std::string_view csv, const CodebookPtr& schema, Cohort cohort,
                             const std::string& source) {
  std::string stripped;
  std::vector<Label> labels;
  std::size_t pos = 0;
  bool header = true;
  while (pos < csv.size()) {
    std::size_t end = csv.find('\n', pos);
    if (end == std::string_view::npos) end = csv.size();
    std::string_view line = csv.substr(pos, end - pos);
    pos = end + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    const std::size_t comma = line.rfind(',');
    if (comma == std::string_view::npos) throw DataError(source + ": missing label column");
    const std::string_view last = line.substr(comma + 1);
    if (header) {
      header = false;
    } else {
      int v = -1;
      const auto res = std::from_chars(last.data(), last.data() + last.size(), v);
      if (res.ec != std::errc() || (v != 0 && v != 1))
        throw DataError(source + ": label must be 0 or 1, found '" + std::string(last) + "'");
      labels.push_back(static_cast<Label>(v));
    }
    stripped.append(line.substr(0, comma));
    stripped.push_back('\n');
  }
  LabeledTable t{ParseTable(stripped, schema, source), std::move(labels), cohort};
  return t;
}

void SaveCohortData(const CohortData& d, const std::filesystem::path& dir) {
  WriteFile(dir / "schema.json", SerializeCodebook(d.train.table.schema()));
  WriteFile(dir / "train.csv", WriteTableCsv(d.train.table, &d.train.labels));
  WriteFile(dir / "test.csv", WriteTableCsv(d.test.table, &d.test.labels));
  const json meta = {{"cohort", CohortName(d.cohort)},
                     {"rows", d.rows},
                     {"positives", d.positives},
                     {"train_rows", d.train_rows},
                     {"synthetic_rows", d.synthetic_rows}};
  WriteFile(dir / "cohort.json", meta.dump(2) + "\n");
}

CohortData LoadCohortData(const std::filesystem::path& dir) {
  const json meta = ReadJson(dir / "cohort.json");
  CohortData d;
  try {
    const auto cohort = ParseCohort(meta.at("cohort").get<std::string>());
    if (!cohort) throw DataError("unknown cohort");
    d.cohort = *cohort;
    d.rows = meta.at("rows").get<std::size_t>();
    d.positives = meta.at("positives").get<std::size_t>();
    d.train_rows = meta.at("train_rows").get<std::size_t>();
    d.synthetic_rows = meta.at("synthetic_rows").get<std::size_t>();
  } catch (const json::exception& e) {
    throw DataError((dir / "cohort.json").string() + ": " + e.what());
  }
  auto schema = std::make_shared<const Codebook>(
      ParseCodebook(Slurp(dir / "schema.json"), (dir / "schema.json").string(), false));
  d.train = ParseLabeledCsv(Slurp(dir / "train.csv"), schema, d.cohort, (dir / "train.csv").string());
  d.test = ParseLabeledCsv(Slurp(dir / "test.csv"), schema, d.cohort, (dir / "test.csv").string());
  return d;
}

void SaveSelection(const SelectionResult& selection, const std::filesystem::path& dir) {
  WriteFile(dir / "selection.json", SelectionToJson(selection).dump(2) + "\n");
  std::string list;
  for (const std::string& f : selection.final_set) list += f + "\n";
  WriteFile(dir / "selected_features.txt", list);
}

std::vector<std::string> LoadFeatures(const std::filesystem::path& dir,
                                      const LabeledTable& fallback) {
  const auto path = dir / "selected_features.txt";
  std::vector<std::string> out;
  if (!std::filesystem::exists(path)) {
    for (const VariableSpec& v : fallback.table.schema().variables()) out.push_back(v.name);
    return out;
  }
  std::istringstream in(Slurp(path));
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) out.push_back(line);
  return out;
}

void SaveModels(const std::vector<TrainedModel>& models, const std::filesystem::path& dir) {
  json doc = json::array();
  for (const TrainedModel& m : models) {
    json cells = json::array();
    for (const CvCell& c : m.tuning.cells)
      cells.push_back({{"params", LearnerParamsToJson(c.params)},
                       {"fold_scores", c.fold_scores},
                       {"mean_score", c.mean_score},
                       {"failed", c.failed},
                       {"error", c.error}});
    doc.push_back({{"name", m.name},
                   {"params", LearnerParamsToJson(m.params)},
                   {"best_index", m.tuning.best_index},
                   {"cv", cells},
                   {"model", ModelToJson(m.model)}});
  }
  WriteFile(dir / "models.json", doc.dump() + "\n");
}

std::vector<TrainedModel> LoadModels(const std::filesystem::path& dir) {
  const json doc = ReadJson(dir / "models.json");
  std::vector<TrainedModel> out;
  try {
    for (const json& node : doc) {
      TrainedModel m;
      m.name = node.at("name").get<std::string>();
      m.params = LearnerParamsFromJson(node.at("params"));
      m.tuning.best = m.params;
      m.tuning.best_index = node.at("best_index").get<std::size_t>();
      for (const json& c : node.at("cv")) {
        CvCell cell;
        cell.params = LearnerParamsFromJson(c.at("params"));
        cell.fold_scores = c.at("fold_scores").get<std::vector<double>>();
        cell.mean_score = c.at("mean_score").get<double>();
        cell.failed = c.at("failed").get<bool>();
        cell.error = c.at("error").get<std::string>();
        m.tuning.cells.push_back(std::move(cell));
      }
      m.model = ModelFromJson(node.at("model"));
      out.push_back(std::move(m));
    }
  } catch (const json::exception& e) {
    throw DataError((dir / "models.json").string() + ": " + e.what());
  } catch (const Error& e) {
    throw DataError((dir / "models.json").string() + ": " + e.what());
  }
  if (out.empty()) throw DataError((dir / "models.json").string() + ": no models");
  return out;
}

void SavePredictions(const std::vector<EvaluatedModel>& models, const std::filesystem::path& dir) {
  std::ostringstream os;
  for (std::size_t m = 0; m < models.size(); ++m)
    os << (m ? "," : "") << "score:" << models[m].name << ",label:" << models[m].name;
  os << '\n';
  const std::size_t n = models.empty() ? 0 : models.front().predictions.labels.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t m = 0; m < models.size(); ++m)
      os << (m ? "," : "") << FormatNumber(models[m].predictions.scores[i]) << ','
         << int(models[m].predictions.labels[i]);
    os << '\n';
  }
  WriteFile(dir / "predictions.csv", os.str());
}

std::vector<EvaluatedModel> LoadPredictions(const std::filesystem::path& dir,
                                            const LabeledTable& test) {
  const auto path = dir / "predictions.csv";
  std::istringstream in(Slurp(path));
  std::string line;
  if (!std::getline(in, line)) throw DataError(path.string() + ": empty file");
  std::vector<std::string> header;
  {
    std::istringstream hs(line);
    std::string cell;
    while (std::getline(hs, cell, ',')) header.push_back(cell);
  }
  if (header.empty() || header.size() % 2 != 0) throw DataError(path.string() + ": bad header");
  const std::size_t k = header.size() / 2;
  std::vector<Predictions> preds(k);
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    ++row;
    std::istringstream ls(line);
    std::string cell;
    for (std::size_t m = 0; m < k; ++m) {
      double s = 0.0;
      int l = 0;
      if (!std::getline(ls, cell, ',')) throw DataError(path.string() + ": short row " + std::to_string(row));
      if (std::from_chars(cell.data(), cell.data() + cell.size(), s).ec != std::errc())
        throw DataError(path.string() + ": bad score in row " + std::to_string(row));
      if (!std::getline(ls, cell, ',')) throw DataError(path.string() + ": short row " + std::to_string(row));
      if (std::from_chars(cell.data(), cell.data() + cell.size(), l).ec != std::errc() || (l != 0 && l != 1))
        throw DataError(path.string() + ": bad label in row " + std::to_string(row));
      preds[m].scores.push_back(s);
      preds[m].labels.push_back(static_cast<Label>(l));
    }
  }
  if (row != test.rows())
    throw DataError(path.string() + ": " + std::to_string(row) + " rows, test table has " +
                    std::to_string(test.rows()));
  std::vector<EvaluatedModel> out;
  for (std::size_t m = 0; m < k; ++m)
    out.push_back(EvaluatePredictions(header[2 * m].substr(6), test, std::move(preds[m])));
  return out;
}

}  // namespace fairaudit
