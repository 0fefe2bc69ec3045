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

#ifndef FAIRAUDIT_EVAL_METRICS_HPP_
#define FAIRAUDIT_EVAL_METRICS_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fairaudit/common.hpp"

namespace fairaudit {

struct ConfusionCounts {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t tn = 0;
  std::uint64_t fn = 0;

  std::uint64_t positives() const { return tp + fn; }
  std::uint64_t negatives() const { return fp + tn; }
  std::uint64_t total() const { return tp + fp + tn + fn; }
  ConfusionCounts& operator+=(const ConfusionCounts& o) {
    tp += o.tp;
    fp += o.fp;
    tn += o.tn;
    fn += o.fn;
    return *this;
  }
  bool operator==(const ConfusionCounts&) const = default;
};

// Throws InvalidArgument on length mismatch or empty input.
ConfusionCounts Confusion(std::span<const Label> labels, std::span<const Label> predictions);

// Support-weighted averages over both classes. With that weighting, recall
// equals accuracy.
struct ClassificationReport {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  // Per-class figures, index 0 = negative class, 1 = positive class.
  double class_precision[2] = {0.0, 0.0};
  double class_recall[2] = {0.0, 0.0};
  double class_f1[2] = {0.0, 0.0};
  // Zero-denominator cases resolved to 0 (e.g. "precision[1]").
  std::vector<std::string> zero_division;
};

ClassificationReport MakeClassificationReport(const ConfusionCounts& counts);

}  // namespace fairaudit

#endif  // FAIRAUDIT_EVAL_METRICS_HPP_
