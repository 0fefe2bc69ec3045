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

#include "fairaudit/synth.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "json.hpp"

#include "fairaudit/rng.hpp"

namespace fairaudit {

using json = nlohmann::json;

void SynthConfig::Validate() const {
  if (n < 1) throw ConfigError("synth.n must be at least 1");
  if (groups.empty()) throw ConfigError("synth.groups must not be empty");
  double total = 0.0;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const SynthGroup& grp = groups[g];
    const std::string ctx = "synth.groups[" + std::to_string(g) + "]";
    if (!(grp.probability >= 0.0)) throw ConfigError(ctx + ".probability must be >= 0");
    if (!(grp.base_rate >= 0.0 && grp.base_rate <= 1.0))
      throw ConfigError(ctx + ".base_rate must lie in [0, 1]");
    if (grp.label.empty()) throw ConfigError(ctx + ".label must not be empty");
    total += grp.probability;
  }
  if (std::abs(total - 1.0) > 1e-9) throw ConfigError("synth.groups probabilities must sum to 1");
  std::set<std::string> names = {protected_name, std::string(kSynthIdColumn),
                                 std::string(kSynthCohortColumn), std::string(kSynthLosColumn)};
  if (names.size() != 4) throw ConfigError("synth.protected_name clashes with a reserved column");
  for (std::size_t f = 0; f < features.size(); ++f) {
    const SynthFeature& feat = features[f];
    const std::string ctx = "synth.features[" + std::to_string(f) + "]";
    if (feat.name.empty() || !names.insert(feat.name).second)
      throw ConfigError(ctx + ".name must be non-empty and unique");
    if (feat.cardinality < 2) throw ConfigError(ctx + ".cardinality must be at least 2");
    if (!(feat.signal >= 0.0) || !(feat.correlation >= 0.0) ||
        feat.signal + feat.correlation > 1.0 + 1e-12)
      throw ConfigError(ctx + ": signal and correlation must be >= 0 with sum <= 1");
  }
  if (!(missing_rate >= 0.0 && missing_rate < 1.0))
    throw ConfigError("synth.missing_rate must lie in [0, 1)");
}

SynthConfig ParseSynthConfig(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("synth config: ") + e.what());
  }
  SynthConfig c;
  try {
    c.n = doc.at("n").get<std::size_t>();
    c.seed = doc.at("seed").get<std::uint64_t>();
    c.protected_name = doc.value("protected_name", c.protected_name);
    for (const json& g : doc.at("groups"))
      c.groups.push_back({g.at("label").get<std::string>(), g.at("probability").get<double>(),
                          g.at("base_rate").get<double>()});
    for (const json& f : doc.value("features", json::array()))
      c.features.push_back({f.at("name").get<std::string>(), f.value("cardinality", 2),
                            f.value("signal", 0.0), f.value("correlation", 0.0)});
    c.missing_rate = doc.value("missing_rate", 0.0);
    const std::string cohort = doc.value("cohort", std::string("inpatient"));
    const auto parsed = ParseCohort(cohort);
    if (!parsed) throw ConfigError("synth.cohort: unknown cohort '" + cohort + "'");
    c.cohort = *parsed;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("synth config: ") + e.what());
  }
  c.Validate();
  return c;
}

SynthConfig LoadSynthConfig(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open synth config " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return ParseSynthConfig(text);
}

std::string SerializeSynthConfig(const SynthConfig& c) {
  json doc;
  doc["n"] = c.n;
  doc["seed"] = c.seed;
  doc["protected_name"] = c.protected_name;
  doc["groups"] = json::array();
  for (const SynthGroup& g : c.groups)
    doc["groups"].push_back(
        {{"label", g.label}, {"probability", g.probability}, {"base_rate", g.base_rate}});
  doc["features"] = json::array();
  for (const SynthFeature& f : c.features)
    doc["features"].push_back({{"name", f.name},
                               {"cardinality", f.cardinality},
                               {"signal", f.signal},
                               {"correlation", f.correlation}});
  doc["missing_rate"] = c.missing_rate;
  doc["cohort"] = std::string(CohortName(c.cohort));
  return doc.dump(2) + "\n";
}

SynthConfig TwoGroupConfig(std::size_t n, double rate_a, double rate_b, std::size_t n_features,
                           double signal, double correlation, std::uint64_t seed) {
  SynthConfig c;
  c.n = n;
  c.seed = seed;
  c.groups = {{"Group A", 0.5, rate_a}, {"Group B", 0.5, rate_b}};
  for (std::size_t f = 0; f < n_features; ++f)
    c.features.push_back({"F" + std::to_string(f + 1), 3, signal, correlation});
  c.Validate();
  return c;
}

namespace {

// Banded LOS codes: 1-30 are single days, then the long-stay bands.
std::map<int, DayRange> LosBands() {
  std::map<int, DayRange> los;
  for (int d = 1; d <= 30; ++d) los[d] = {d, d};
  los[31] = {31, 45};
  los[32] = {46, 60};
  los[33] = {61, 90};
  los[34] = {91, 120};
  los[35] = {121, 180};
  los[36] = {181, 365};
  los[37] = {366, -1};
  return los;
}

CodebookPtr SynthCodebook(const SynthConfig& c) {
  std::vector<VariableSpec> vars;
  VariableSpec id;
  id.name = std::string(kSynthIdColumn);
  id.display_name = "Case identifier";
  id.role = Role::kIdDrop;
  vars.push_back(std::move(id));

  VariableSpec prot;
  prot.name = c.protected_name;
  prot.display_name = c.protected_name;
  prot.role = Role::kProtected;
  for (std::size_t g = 0; g < c.groups.size(); ++g)
    prot.categories[static_cast<int>(g + 1)] = c.groups[g].label;
  vars.push_back(std::move(prot));

  for (const SynthFeature& f : c.features) {
    VariableSpec v;
    v.name = f.name;
    v.display_name = f.name;
    v.role = Role::kFeature;
    for (int k = 1; k <= f.cardinality; ++k) v.categories[k] = "Level " + std::to_string(k);
    if (c.missing_rate > 0.0) v.missing_codes.insert(kSynthMissingCode);
    vars.push_back(std::move(v));
  }

  VariableSpec services;
  services.name = std::string(kSynthCohortColumn);
  services.display_name = "Type of treatment service";
  services.role = Role::kCohortSelector;
  services.categories = {{1, "Detox, 24-hour, hospital inpatient"},
                         {2, "Detox, 24-hour, free-standing residential"},
                         {3, "Rehab/residential, hospital"},
                         {4, "Rehab/residential, short term"},
                         {5, "Rehab/residential, long term"},
                         {6, "Ambulatory, intensive outpatient"},
                         {7, "Ambulatory, non-intensive outpatient"},
                         {8, "Ambulatory, detoxification"}};
  vars.push_back(std::move(services));

  VariableSpec los;
  los.name = std::string(kSynthLosColumn);
  los.display_name = "Length of stay";
  los.role = Role::kTargetSource;
  los.los_days = LosBands();
  for (const auto& [code, r] : los.los_days)
    los.categories[code] = r.max_days < 0 ? "More than " + std::to_string(r.min_days - 1) + " days"
                           : r.min_days == r.max_days
                               ? std::to_string(r.min_days) + " days"
                               : std::to_string(r.min_days) + "-" + std::to_string(r.max_days) +
                                     " days";
  vars.push_back(std::move(los));

  auto book = std::make_shared<const Codebook>("synthetic-1", std::move(vars));
  book->Validate();
  return book;
}

}  // namespace

SynthData Generate(const SynthConfig& config) {
  config.Validate();
  SynthData out;
  out.codebook = SynthCodebook(config);

  const LosThresholds thresholds;
  const int cutoff = thresholds.For(config.cohort);
  std::vector<int> long_codes, short_codes;
  for (const auto& [code, r] : LosBands()) (r.min_days > cutoff ? long_codes : short_codes).push_back(code);
  const int first_service = config.cohort == Cohort::kInpatient ? 3 : 6;

  const std::size_t n = config.n;
  const std::size_t n_features = config.features.size();
  std::vector<std::vector<int>> cols(out.codebook->size(), std::vector<int>(n));
  std::vector<double> probs;
  for (const SynthGroup& g : config.groups) probs.push_back(g.probability);

  out.truth.codes.resize(config.groups.size());
  out.truth.counts.assign(config.groups.size(), 0);
  out.truth.positives.assign(config.groups.size(), 0);
  for (std::size_t g = 0; g < config.groups.size(); ++g) {
    out.truth.codes[g] = static_cast<int>(g + 1);
    out.truth.probabilities.push_back(config.groups[g].probability);
    out.truth.base_rates.push_back(config.groups[g].base_rate);
  }

  Rng rng(config.seed);
  out.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t a = rng.Categorical(probs);
    const bool y = rng.Bernoulli(config.groups[a].base_rate);
    out.labels[i] = y ? 1 : 0;
    ++out.truth.counts[a];
    out.truth.positives[a] += y ? 1 : 0;
    cols[0][i] = static_cast<int>(i + 1);
    cols[1][i] = static_cast<int>(a + 1);
    for (std::size_t f = 0; f < n_features; ++f) {
      const SynthFeature& feat = config.features[f];
      const double u = rng.Uniform01();
      int code;
      if (u < feat.signal) {
        code = y ? 1 : 2;
      } else if (u < feat.signal + feat.correlation) {
        code = 1 + static_cast<int>(a % static_cast<std::size_t>(feat.cardinality));
      } else {
        code = 1 + static_cast<int>(rng.UniformIndex(static_cast<std::size_t>(feat.cardinality)));
      }
      if (config.missing_rate > 0.0 && rng.Bernoulli(config.missing_rate)) code = kSynthMissingCode;
      cols[2 + f][i] = code;
    }
    cols[2 + n_features][i] = first_service + static_cast<int>(rng.UniformIndex(3));
    const std::vector<int>& pool = y ? long_codes : short_codes;
    cols[3 + n_features][i] = pool[rng.UniformIndex(pool.size())];
  }
  out.raw = CodedTable(out.codebook, std::move(cols), n);
  return out;
}

LabeledTable SynthData::Labeled() const {
  const std::vector<std::string> id = {std::string(kSynthIdColumn)};
  const CodedTable table = raw.DropColumns(id);
  const CohortSplit split = SplitCohorts(table);
  const bool inpatient = split.inpatient.rows() > 0;
  return BuildTarget(inpatient ? split.inpatient : split.outpatient,
                     inpatient ? Cohort::kInpatient : Cohort::kOutpatient);
}

void WriteSynth(const SynthData& data, const std::filesystem::path& dir, const std::string& stem) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  const auto csv_path = dir / (stem + ".csv");
  const auto book_path = dir / (stem + "_codebook.json");
  std::ofstream csv(csv_path, std::ios::binary);
  if (!csv) throw IoError("cannot write " + csv_path.string());
  csv << WriteTableCsv(data.raw);
  std::ofstream book(book_path, std::ios::binary);
  if (!book) throw IoError("cannot write " + book_path.string());
  book << SerializeCodebook(*data.codebook);
  if (!csv || !book) throw IoError("write failed under " + dir.string());
}

// Deliberately written with its own loops and no calls into the metric
// modules, so the two can be checked against each other.
OracleResult OracleMetrics(std::span<const Label> labels, std::span<const Label> predictions,
                           std::span<const int> attribute) {
  OracleResult r;
  const std::size_t n = labels.size();
  for (std::size_t i = 0; i < n; ++i) {
    OracleGroup& g = r.groups[attribute[i]];
    ++g.n;
    const int y = labels[i] ? 1 : 0;
    const int p = predictions[i] ? 1 : 0;
    if (p == 1) ++g.selected;
    if (y == 1 && p == 1) { ++r.tp; ++g.tp; }
    if (y == 0 && p == 1) { ++r.fp; ++g.fp; }
    if (y == 0 && p == 0) { ++r.tn; ++g.tn; }
    if (y == 1 && p == 0) { ++r.fn; ++g.fn; }
  }
  if (n == 0) return r;
  const double total = static_cast<double>(n);
  r.accuracy = static_cast<double>(r.tp + r.tn) / total;
  r.overall_selection_rate = static_cast<double>(r.tp + r.fp) / total;
  if (r.tp + r.fp > 0) r.precision_pos = static_cast<double>(r.tp) / static_cast<double>(r.tp + r.fp);
  if (r.tn + r.fn > 0) r.precision_neg = static_cast<double>(r.tn) / static_cast<double>(r.tn + r.fn);
  if (r.tp + r.fn > 0) r.recall_pos = static_cast<double>(r.tp) / static_cast<double>(r.tp + r.fn);
  if (r.tn + r.fp > 0) r.recall_neg = static_cast<double>(r.tn) / static_cast<double>(r.tn + r.fp);
  if (r.precision_pos && r.precision_neg && r.recall_pos && r.recall_neg) {
    const double share_neg = static_cast<double>(r.tn + r.fp) / total;
    const double share_pos = static_cast<double>(r.tp + r.fn) / total;
    r.weighted_precision = share_neg * *r.precision_neg + share_pos * *r.precision_pos;
    r.weighted_recall = share_neg * *r.recall_neg + share_pos * *r.recall_pos;
    double f1_neg = 0.0, f1_pos = 0.0;
    if (*r.precision_neg + *r.recall_neg > 0)
      f1_neg = 2.0 * *r.precision_neg * *r.recall_neg / (*r.precision_neg + *r.recall_neg);
    if (*r.precision_pos + *r.recall_pos > 0)
      f1_pos = 2.0 * *r.precision_pos * *r.recall_pos / (*r.precision_pos + *r.recall_pos);
    r.weighted_f1 = share_neg * f1_neg + share_pos * f1_pos;
  }

  double max_sr = -1.0, min_sr = 2.0;
  double max_fpr = -1.0, min_fpr = 2.0, max_fnr = -1.0, min_fnr = 2.0;
  int fpr_groups = 0, fnr_groups = 0;
  for (auto& [code, g] : r.groups) {
    g.selection_rate = static_cast<double>(g.selected) / static_cast<double>(g.n);
    if (g.selection_rate > max_sr) max_sr = g.selection_rate;
    if (g.selection_rate < min_sr) min_sr = g.selection_rate;
    if (g.tn + g.fp > 0) {
      g.fpr = static_cast<double>(g.fp) / static_cast<double>(g.tn + g.fp);
      ++fpr_groups;
      if (*g.fpr > max_fpr) max_fpr = *g.fpr;
      if (*g.fpr < min_fpr) min_fpr = *g.fpr;
    }
    if (g.tp + g.fn > 0) {
      g.fnr = static_cast<double>(g.fn) / static_cast<double>(g.tp + g.fn);
      ++fnr_groups;
      if (*g.fnr > max_fnr) max_fnr = *g.fnr;
      if (*g.fnr < min_fnr) min_fnr = *g.fnr;
    }
  }
  if (max_sr > 0.0) r.dpr = min_sr / max_sr;
  if (fpr_groups >= 2 && fnr_groups >= 2) {
    r.fprd = max_fpr - min_fpr;
    r.fnrd = max_fnr - min_fnr;
    r.eod = *r.fprd > *r.fnrd ? *r.fprd : *r.fnrd;
  }
  return r;
}

}  // namespace fairaudit
