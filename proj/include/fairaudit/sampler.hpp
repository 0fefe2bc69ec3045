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

#ifndef FAIRAUDIT_SAMPLER_HPP_
#define FAIRAUDIT_SAMPLER_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "fairaudit/schema.hpp"

namespace fairaudit {

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
  std::uint64_t seed = 0;
};

struct FoldPlan {
  std::size_t k = 0;
  std::vector<std::size_t> fold_of_row;
  std::uint64_t seed = 0;

  std::vector<std::size_t> TrainRows(std::size_t fold) const;
  std::vector<std::size_t> TestRows(std::size_t fold) const;
};

// Stratified train/test split. The train side has round(n * train_fraction)
// rows, apportioned across classes by largest remainder. Index lists are
// sorted ascending.
SplitIndices StratifiedSplit(std::span<const Label> labels, double train_fraction,
                             std::uint64_t seed);

FoldPlan StratifiedKFold(std::span<const Label> labels, std::size_t k, std::uint64_t seed);

// SMOTE-N: oversamples the minority class up to the majority count. A
// synthetic row copies, column by column, the most frequent category among a
// seed minority row and its k nearest minority neighbours (Hamming distance,
// ties on distance broken by lower row index, ties on the vote broken by a
// seeded uniform choice). Seed rows are taken round-robin over the minority
// rows in input order. Original rows come first, unchanged; synthetic rows are
// appended. If origins is non-null it receives, per synthetic row, the input
// index of its seed row.
LabeledTable SmoteNominal(const LabeledTable& train, std::size_t k_neighbors,
                          std::uint64_t seed,
                          std::vector<std::size_t>* origins = nullptr);

// The k nearest rows to `row` among candidates (excluding itself) under Hamming
// distance over all columns; exposed for verification.
std::vector<std::size_t> NominalNeighbors(const CodedTable& table,
                                          std::span<const std::size_t> candidates,
                                          std::size_t row, std::size_t k);

}  // namespace fairaudit

#endif  // FAIRAUDIT_SAMPLER_HPP_
