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

#include "fairaudit/eval_metrics.hpp"

namespace fairaudit {

ConfusionCounts Confusion(std::span<const Label> labels, std::span<const Label> predictions) {
  if (labels.size() != predictions.size())
    throw InvalidArgument("labels and predictions differ in length");
  if (labels.empty()) throw InvalidArgument("confusion of an empty set");
  ConfusionCounts c;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const bool y = labels[i] != 0;
    const bool p = predictions[i] != 0;
    if (y && p) ++c.tp;
    else if (!y && p) ++c.fp;
    else if (!y && !p) ++c.tn;
    else ++c.fn;
  }
  return c;
}

ClassificationReport MakeClassificationReport(const ConfusionCounts& counts) {
  if (counts.total() == 0) throw InvalidArgument("classification report of an empty set");
  ClassificationReport r;
  const double total = static_cast<double>(counts.total());
  r.accuracy = static_cast<double>(counts.tp + counts.tn) / total;

  // Class 1 treats positives as positive; class 0 swaps the roles.
  const std::uint64_t tp[2] = {counts.tn, counts.tp};
  const std::uint64_t fp[2] = {counts.fn, counts.fp};
  const std::uint64_t fn[2] = {counts.fp, counts.fn};
  const std::uint64_t support[2] = {counts.negatives(), counts.positives()};
  for (int c = 0; c < 2; ++c) {
    const std::uint64_t pred = tp[c] + fp[c];
    const std::uint64_t actual = tp[c] + fn[c];
    if (pred == 0) {
      r.class_precision[c] = 0.0;
      r.zero_division.push_back("precision[" + std::to_string(c) + "]");
    } else {
      r.class_precision[c] = static_cast<double>(tp[c]) / static_cast<double>(pred);
    }
    if (actual == 0) {
      r.class_recall[c] = 0.0;
      r.zero_division.push_back("recall[" + std::to_string(c) + "]");
    } else {
      r.class_recall[c] = static_cast<double>(tp[c]) / static_cast<double>(actual);
    }
    const double denom = r.class_precision[c] + r.class_recall[c];
    r.class_f1[c] = denom > 0 ? 2.0 * r.class_precision[c] * r.class_recall[c] / denom : 0.0;
  }
  const double w0 = static_cast<double>(support[0]) / total;
  const double w1 = static_cast<double>(support[1]) / total;
  r.precision = w0 * r.class_precision[0] + w1 * r.class_precision[1];
  r.recall = w0 * r.class_recall[0] + w1 * r.class_recall[1];
  r.f1 = w0 * r.class_f1[0] + w1 * r.class_f1[1];
  return r;
}

}  // namespace fairaudit
