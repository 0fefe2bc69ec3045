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

#include "fairaudit/sampler.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numeric>

#include "fairaudit/parallel.hpp"
#include "fairaudit/rng.hpp"

namespace fairaudit {
namespace {

std::array<std::vector<std::size_t>, 2> RowsByClass(std::span<const Label> labels) {
  std::array<std::vector<std::size_t>, 2> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] > 1) throw DataError("labels must be 0 or 1");
    by_class[labels[i]].push_back(i);
  }
  return by_class;
}

}  // namespace

std::vector<std::size_t> FoldPlan::TrainRows(std::size_t fold) const {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < fold_of_row.size(); ++i)
    if (fold_of_row[i] != fold) rows.push_back(i);
  return rows;
}

std::vector<std::size_t> FoldPlan::TestRows(std::size_t fold) const {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < fold_of_row.size(); ++i)
    if (fold_of_row[i] == fold) rows.push_back(i);
  return rows;
}

SplitIndices StratifiedSplit(std::span<const Label> labels, double train_fraction,
                             std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw InvalidArgument("train_fraction must lie in (0, 1)");
  auto by_class = RowsByClass(labels);
  for (int c = 0; c < 2; ++c) {
    if (by_class[c].size() < 2)
      throw DataError("stratified split needs at least 2 rows of class " + std::to_string(c) +
                      ", found " + std::to_string(by_class[c].size()));
  }
  const double n = static_cast<double>(labels.size());
  const auto total_train = static_cast<std::size_t>(std::llround(n * train_fraction));

  // Largest-remainder apportionment of total_train across the two classes.
  std::array<std::size_t, 2> take{};
  std::array<double, 2> remainder{};
  std::size_t assigned = 0;
  for (int c = 0; c < 2; ++c) {
    const double exact = static_cast<double>(by_class[c].size()) * train_fraction;
    take[c] = static_cast<std::size_t>(std::floor(exact));
    remainder[c] = exact - std::floor(exact);
    assigned += take[c];
  }
  while (assigned < total_train) {
    const int c = remainder[1] > remainder[0] ? 1 : 0;
    ++take[c];
    remainder[c] = -1.0;
    ++assigned;
  }

  SplitIndices split;
  split.seed = seed;
  Rng rng(seed);
  for (int c = 0; c < 2; ++c) {
    std::vector<std::size_t> rows = by_class[c];
    rng.Shuffle(std::span<std::size_t>(rows));
    split.train.insert(split.train.end(), rows.begin(), rows.begin() + take[c]);
    split.test.insert(split.test.end(), rows.begin() + take[c], rows.end());
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

FoldPlan StratifiedKFold(std::span<const Label> labels, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw InvalidArgument("k must be at least 2");
  auto by_class = RowsByClass(labels);
  for (int c = 0; c < 2; ++c) {
    if (by_class[c].size() < k)
      throw DataError("class " + std::to_string(c) + " has " +
                      std::to_string(by_class[c].size()) + " rows, fewer than k = " +
                      std::to_string(k));
  }
  FoldPlan plan;
  plan.k = k;
  plan.seed = seed;
  plan.fold_of_row.assign(labels.size(), 0);
  Rng rng(seed);
  // Deal each class round-robin; the second class continues where the first
  // stopped so fold sizes stay within one row of each other.
  std::size_t next = 0;
  for (int c = 0; c < 2; ++c) {
    std::vector<std::size_t> rows = by_class[c];
    rng.Shuffle(std::span<std::size_t>(rows));
    for (std::size_t r : rows) {
      plan.fold_of_row[r] = next;
      next = (next + 1) % k;
    }
  }
  return plan;
}

std::vector<std::size_t> NominalNeighbors(const CodedTable& table,
                                          std::span<const std::size_t> candidates,
                                          std::size_t row, std::size_t k) {
  std::vector<std::pair<std::size_t, std::size_t>> dist;  // (distance, row)
  dist.reserve(candidates.size());
  for (std::size_t other : candidates) {
    if (other == row) continue;
    std::size_t d = 0;
    for (std::size_t c = 0; c < table.cols(); ++c) d += table.at(row, c) != table.at(other, c);
    dist.emplace_back(d, other);
  }
  const std::size_t take = std::min(k, dist.size());
  std::partial_sort(dist.begin(), dist.begin() + take, dist.end());
  std::vector<std::size_t> out;
  out.reserve(take);
  for (std::size_t i = 0; i < take; ++i) out.push_back(dist[i].second);
  return out;
}

LabeledTable SmoteNominal(const LabeledTable& train, std::size_t k_neighbors,
                          std::uint64_t seed, std::vector<std::size_t>* origins) {
  if (origins) origins->clear();
  auto by_class = RowsByClass(train.labels);
  if (by_class[0].empty() || by_class[1].empty())
    throw DataError("SMOTE needs both classes present");
  const int minority = by_class[1].size() < by_class[0].size() ? 1 : 0;
  const std::vector<std::size_t>& pool = by_class[minority];
  const std::size_t majority_count = by_class[1 - minority].size();
  if (pool.size() == majority_count) return train;
  if (k_neighbors < 1) throw InvalidArgument("k_neighbors must be at least 1");
  if (pool.size() < k_neighbors + 1)
    throw DataError("minority class has " + std::to_string(pool.size()) +
                    " rows; SMOTE with k = " + std::to_string(k_neighbors) +
                    " needs at least " + std::to_string(k_neighbors + 1));

  const std::size_t needed = majority_count - pool.size();
  const std::size_t seeds_used = std::min(needed, pool.size());
  const CodedTable& table = train.table;

  std::vector<std::vector<std::size_t>> neighbors(seeds_used);
  ParallelFor(seeds_used, [&](std::size_t i) {
    neighbors[i] = NominalNeighbors(table, pool, pool[i], k_neighbors);
  });

  std::vector<std::vector<int>> cols(table.cols());
  for (std::size_t c = 0; c < table.cols(); ++c) {
    cols[c].assign(table.column(c).begin(), table.column(c).end());
    cols[c].reserve(majority_count * 2);
  }
  std::vector<Label> labels = train.labels;
  labels.reserve(majority_count * 2);

  std::vector<std::pair<int, std::size_t>> votes;
  for (std::size_t s = 0; s < needed; ++s) {
    const std::size_t slot = s % pool.size();
    const std::size_t seed_row = pool[slot];
    Rng rng(DeriveSeed(seed, s));
    for (std::size_t c = 0; c < table.cols(); ++c) {
      votes.clear();
      auto tally = [&](int code) {
        for (auto& [v, n] : votes) {
          if (v == code) {
            ++n;
            return;
          }
        }
        votes.emplace_back(code, 1);
      };
      tally(table.at(seed_row, c));
      for (std::size_t nb : neighbors[slot]) tally(table.at(nb, c));
      std::sort(votes.begin(), votes.end());
      std::size_t best = 0;
      for (const auto& [v, n] : votes) best = std::max(best, n);
      std::vector<int> tied;
      for (const auto& [v, n] : votes)
        if (n == best) tied.push_back(v);
      cols[c].push_back(tied.size() == 1 ? tied[0] : tied[rng.UniformIndex(tied.size())]);
    }
    labels.push_back(static_cast<Label>(minority));
    if (origins) origins->push_back(seed_row);
  }
  const std::size_t rows = labels.size();
  return LabeledTable{CodedTable(table.schema_ptr(), std::move(cols), rows), std::move(labels),
                      train.cohort};
}

}  // namespace fairaudit
