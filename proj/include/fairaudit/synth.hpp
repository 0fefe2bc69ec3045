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

#ifndef FAIRAUDIT_SYNTH_HPP_
#define FAIRAUDIT_SYNTH_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fairaudit/schema.hpp"

namespace fairaudit {

struct SynthGroup {
  std::string label;
  double probability = 0.0;
  double base_rate = 0.0;
};

struct SynthFeature {
  std::string name;
  int cardinality = 2;
  // Probability that the value encodes the label.
  double signal = 0.0;
  // Probability that the value encodes the protected group.
  double correlation = 0.0;
};

// Generative process, per row:
//   group a ~ Categorical(group probabilities)
//   label y ~ Bernoulli(base_rate[a])
//   each feature: with probability `signal` code 1 if y else 2; otherwise
//   with probability `correlation` code 1 + (a mod cardinality); otherwise
//   uniform over 1..cardinality; then replaced by -9 with probability
//   missing_rate.
// The cohort selector is uniform over the cohort's service codes and the LOS
// code is uniform over the codes consistent with y.
struct SynthConfig {
  std::size_t n = 5000;
  std::uint64_t seed = 0;
  std::string protected_name = "RACE";
  std::vector<SynthGroup> groups;
  std::vector<SynthFeature> features;
  double missing_rate = 0.0;
  Cohort cohort = Cohort::kInpatient;

  // Throws ConfigError naming the first invalid field.
  void Validate() const;
};

SynthConfig ParseSynthConfig(std::string_view json_text);
SynthConfig LoadSynthConfig(const std::filesystem::path& path);
std::string SerializeSynthConfig(const SynthConfig& config);

// Two groups with the given positive rates plus `n_features` informative
// features; a common test fixture.
SynthConfig TwoGroupConfig(std::size_t n, double rate_a, double rate_b, std::size_t n_features,
                           double signal, double correlation, std::uint64_t seed);

struct SynthTruth {
  std::vector<int> codes;
  std::vector<double> probabilities;
  std::vector<double> base_rates;
  std::vector<std::uint64_t> counts;
  std::vector<std::uint64_t> positives;
};

inline constexpr std::string_view kSynthIdColumn = "CASEID";
inline constexpr std::string_view kSynthCohortColumn = "SERVICES";
inline constexpr std::string_view kSynthLosColumn = "LOS";
inline constexpr int kSynthMissingCode = -9;

struct SynthData {
  CodebookPtr codebook;
  // Every codebook column, id included, in codebook order.
  CodedTable raw;
  std::vector<Label> labels;
  SynthTruth truth;

  // Runs the ingest-side transforms (id drop, cohort split, target) on raw.
  LabeledTable Labeled() const;
};

SynthData Generate(const SynthConfig& config);

// Writes <stem>.csv and <stem>_codebook.json.
void WriteSynth(const SynthData& data, const std::filesystem::path& dir, const std::string& stem);

// Metrics computed by direct counting. Undefined values are empty.
struct OracleGroup {
  std::uint64_t n = 0;
  std::uint64_t selected = 0;
  std::uint64_t tp = 0, fp = 0, tn = 0, fn = 0;
  double selection_rate = 0.0;
  std::optional<double> fpr;
  std::optional<double> fnr;
};

struct OracleResult {
  std::uint64_t tp = 0, fp = 0, tn = 0, fn = 0;
  std::optional<double> accuracy;
  std::optional<double> precision_pos, precision_neg;
  std::optional<double> recall_pos, recall_neg;
  std::optional<double> weighted_precision, weighted_recall, weighted_f1;
  std::optional<double> overall_selection_rate;
  std::map<int, OracleGroup> groups;
  std::optional<double> dpr;
  std::optional<double> fprd;
  std::optional<double> fnrd;
  std::optional<double> eod;
};

OracleResult OracleMetrics(std::span<const Label> labels, std::span<const Label> predictions,
                           std::span<const int> attribute);

}  // namespace fairaudit

#endif  // FAIRAUDIT_SYNTH_HPP_
