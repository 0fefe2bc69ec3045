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

#include "fairaudit/mitigate.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <limits>
#include <optional>
#include <set>

namespace fairaudit {

std::vector<double> Reweigh(std::span<const Label> labels, std::span<const int> attribute) {
  if (labels.size() != attribute.size())
    throw InvalidArgument("labels and attribute differ in length");
  if (labels.empty()) throw InvalidArgument("reweighing an empty table");
  std::map<int, std::array<std::uint64_t, 2>> cells;
  std::array<std::uint64_t, 2> by_label{0, 0};
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int y = labels[i] ? 1 : 0;
    ++cells[attribute[i]][y];
    ++by_label[y];
  }
  const double n = static_cast<double>(labels.size());
  std::map<int, std::array<double, 2>> weight;
  for (const auto& [code, counts] : cells) {
    for (int y = 0; y < 2; ++y) {
      if (counts[y] == 0)
        throw DataError("reweighing: cell (attribute=" + std::to_string(code) +
                        ", label=" + std::to_string(y) + ") is empty");
      const double n_a = static_cast<double>(counts[0] + counts[1]);
      // P(a) P(y) / P(a, y) = n_a n_y / (n n_ay)
      weight[code][y] = (n_a * static_cast<double>(by_label[y])) /
                        (n * static_cast<double>(counts[y]));
    }
  }
  std::vector<double> w(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) w[i] = weight[attribute[i]][labels[i] ? 1 : 0];
  return w;
}

std::vector<double> Reweigh(const LabeledTable& train, const std::string& variable) {
  return Reweigh(train.labels, train.table.column(variable));
}

std::string_view CriterionName(FairnessCriterion criterion) {
  return criterion == FairnessCriterion::kDemographicParity ? "demographic_parity"
                                                            : "equalized_odds";
}

std::optional<FairnessCriterion> ParseCriterion(std::string_view name) {
  if (name == "demographic_parity") return FairnessCriterion::kDemographicParity;
  if (name == "equalized_odds") return FairnessCriterion::kEqualizedOdds;
  return std::nullopt;
}

std::vector<double> ThresholdGrid(std::span<const double> group_scores) {
  std::vector<double> grid(group_scores.begin(), group_scores.end());
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  if (grid.empty() || grid.back() < 1.0) grid.push_back(1.0);
  if (grid.size() > kMaxThresholdGrid) {
    grid.clear();
    for (std::size_t k = 0; k < kMaxThresholdGrid; ++k)
      grid.push_back(static_cast<double>(k) / static_cast<double>(kMaxThresholdGrid - 1));
  }
  return grid;
}

namespace {

// Outcome of one candidate threshold within one group.
struct Cut {
  double threshold = 0.0;
  std::uint64_t correct = 0;
  double sr = 0.0;
  double fpr = 0.0;
  double fnr = 0.0;
};

struct GroupTable {
  int code = 0;
  bool has_neg = false;
  bool has_pos = false;
  std::vector<Cut> cuts;  // ascending threshold
};

GroupTable Tabulate(int code, std::vector<std::pair<double, Label>> rows) {
  GroupTable g;
  g.code = code;
  std::sort(rows.begin(), rows.end());
  std::vector<double> scores;
  std::uint64_t pos = 0;
  for (const auto& [s, y] : rows) {
    scores.push_back(s);
    pos += y ? 1 : 0;
  }
  const std::uint64_t n = rows.size();
  const std::uint64_t neg = n - pos;
  g.has_neg = neg > 0;
  g.has_pos = pos > 0;
  // Suffix counts of positives from each sorted position.
  std::vector<std::uint64_t> pos_from(n + 1, 0);
  for (std::size_t i = n; i-- > 0;) pos_from[i] = pos_from[i + 1] + (rows[i].second ? 1 : 0);
  for (double t : ThresholdGrid(scores)) {
    const auto first = static_cast<std::size_t>(
        std::lower_bound(scores.begin(), scores.end(), t) - scores.begin());
    const std::uint64_t selected = n - first;
    const std::uint64_t tp = pos_from[first];
    const std::uint64_t fp = selected - tp;
    Cut c;
    c.threshold = t;
    c.correct = tp + (neg - fp);
    c.sr = static_cast<double>(selected) / static_cast<double>(n);
    c.fpr = neg ? static_cast<double>(fp) / static_cast<double>(neg) : 0.0;
    c.fnr = pos ? static_cast<double>(pos - tp) / static_cast<double>(pos) : 0.0;
    g.cuts.push_back(c);
  }
  return g;
}

// Range query for the most accurate cut; ties go to the lower index.
class BestCut {
 public:
  explicit BestCut(const std::vector<Cut>& cuts) : cuts_(cuts) {
    const std::size_t n = cuts.size();
    table_.push_back(std::vector<std::size_t>(n));
    for (std::size_t i = 0; i < n; ++i) table_[0][i] = i;
    for (std::size_t k = 1; (std::size_t{1} << k) <= n; ++k) {
      const std::size_t half = std::size_t{1} << (k - 1);
      std::vector<std::size_t> level(n - (std::size_t{1} << k) + 1);
      for (std::size_t i = 0; i < level.size(); ++i)
        level[i] = Pick(table_[k - 1][i], table_[k - 1][i + half]);
      table_.push_back(std::move(level));
    }
  }

  // Inclusive range [lo, hi].
  std::size_t Query(std::size_t lo, std::size_t hi) const {
    const std::size_t k = std::bit_width(hi - lo + 1) - 1;
    return Pick(table_[k][lo], table_[k][hi - (std::size_t{1} << k) + 1]);
  }

 private:
  std::size_t Pick(std::size_t a, std::size_t b) const {
    if (cuts_[b].correct > cuts_[a].correct) return b;
    if (cuts_[a].correct > cuts_[b].correct) return a;
    return std::min(a, b);
  }
  const std::vector<Cut>& cuts_;
  std::vector<std::vector<std::size_t>> table_;
};

// Index range whose nonincreasing `value` lies in [lo, hi].
template <typename Get>
std::optional<std::pair<std::size_t, std::size_t>> DecreasingRange(const std::vector<Cut>& cuts,
                                                                   Get get, double lo,
                                                                   double hi) {
  std::size_t a = 0;
  while (a < cuts.size() && get(cuts[a]) > hi) ++a;
  std::size_t b = a;
  if (a == cuts.size() || get(cuts[a]) < lo) return std::nullopt;
  while (b + 1 < cuts.size() && get(cuts[b + 1]) >= lo) ++b;
  return std::make_pair(a, b);
}

template <typename Get>
std::optional<std::pair<std::size_t, std::size_t>> IncreasingRange(const std::vector<Cut>& cuts,
                                                                   Get get, double lo,
                                                                   double hi) {
  std::size_t a = 0;
  while (a < cuts.size() && get(cuts[a]) < lo) ++a;
  if (a == cuts.size() || get(cuts[a]) > hi) return std::nullopt;
  std::size_t b = a;
  while (b + 1 < cuts.size() && get(cuts[b + 1]) <= hi) ++b;
  return std::make_pair(a, b);
}

double Spread(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  return *hi - *lo;
}

double Disparity(const std::vector<GroupTable>& groups, const std::vector<std::size_t>& choice,
                 FairnessCriterion criterion) {
  std::vector<double> sr, fpr, fnr;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const Cut& c = groups[g].cuts[choice[g]];
    sr.push_back(c.sr);
    if (groups[g].has_neg) fpr.push_back(c.fpr);
    if (groups[g].has_pos) fnr.push_back(c.fnr);
  }
  if (criterion == FairnessCriterion::kDemographicParity) return Spread(sr);
  return std::max(Spread(fpr), Spread(fnr));
}

struct Candidate {
  std::uint64_t correct = 0;
  double disparity = 0.0;
  std::vector<double> thresholds;
  std::vector<std::size_t> choice;
};

bool Better(const Candidate& a, const Candidate& b) {
  if (a.correct != b.correct) return a.correct > b.correct;
  if (a.disparity != b.disparity) return a.disparity < b.disparity;
  return a.thresholds < b.thresholds;
}

// Absorbs rounding in rate comparisons against the band edge.
constexpr double kBandSlack = 1e-12;

}  // namespace

ThresholdPolicy FitGroupThresholds(std::span<const double> scores, std::span<const Label> labels,
                                   std::span<const int> attribute, FairnessCriterion criterion,
                                   double epsilon) {
  if (scores.size() != labels.size() || scores.size() != attribute.size())
    throw InvalidArgument("scores, labels and attribute differ in length");
  if (!(epsilon >= 0.0)) throw InvalidArgument("epsilon must be non-negative");
  for (double s : scores)
    if (!(s >= 0.0 && s <= 1.0)) throw InvalidArgument("scores must lie in [0, 1]");

  std::map<int, std::vector<std::pair<double, Label>>> by_group;
  for (std::size_t i = 0; i < scores.size(); ++i)
    by_group[attribute[i]].emplace_back(scores[i], labels[i] ? 1 : 0);
  if (by_group.size() < 2) throw InvalidArgument("threshold fitting needs at least two groups");

  std::vector<GroupTable> groups;
  for (auto& [code, rows] : by_group) groups.push_back(Tabulate(code, std::move(rows)));
  std::vector<BestCut> best;
  best.reserve(groups.size());
  for (const GroupTable& g : groups) best.emplace_back(g.cuts);

  ThresholdPolicy policy;
  policy.criterion = criterion;
  policy.epsilon = epsilon;

  {
    std::vector<std::pair<double, Label>> all;
    for (std::size_t i = 0; i < scores.size(); ++i) all.emplace_back(scores[i], labels[i] ? 1 : 0);
    const GroupTable pooled = Tabulate(0, std::move(all));
    policy.global_threshold = pooled.cuts[BestCut(pooled.cuts).Query(0, pooled.cuts.size() - 1)]
                                  .threshold;
  }

  auto make_candidate = [&](std::vector<std::size_t> choice) {
    Candidate c;
    for (std::size_t g = 0; g < groups.size(); ++g) {
      c.correct += groups[g].cuts[choice[g]].correct;
      c.thresholds.push_back(groups[g].cuts[choice[g]].threshold);
    }
    c.disparity = Disparity(groups, choice, criterion);
    c.choice = std::move(choice);
    return c;
  };

  std::optional<Candidate> winner;
  auto offer = [&](Candidate c) {
    if (!winner || Better(c, *winner)) winner = std::move(c);
  };

  const double hi_slack = epsilon + kBandSlack;
  if (criterion == FairnessCriterion::kDemographicParity) {
    std::vector<double> lows;
    for (const GroupTable& g : groups)
      for (const Cut& c : g.cuts) lows.push_back(c.sr);
    std::sort(lows.begin(), lows.end());
    lows.erase(std::unique(lows.begin(), lows.end()), lows.end());
    for (double low : lows) {
      std::vector<std::size_t> choice;
      for (std::size_t g = 0; g < groups.size(); ++g) {
        const auto range = DecreasingRange(
            groups[g].cuts, [](const Cut& c) { return c.sr; }, low, low + hi_slack);
        if (!range) break;
        choice.push_back(best[g].Query(range->first, range->second));
      }
      if (choice.size() == groups.size()) offer(make_candidate(std::move(choice)));
    }
  } else {
    std::vector<double> fpr_lows, fnr_lows;
    for (const GroupTable& g : groups)
      for (const Cut& c : g.cuts) {
        if (g.has_neg) fpr_lows.push_back(c.fpr);
        if (g.has_pos) fnr_lows.push_back(c.fnr);
      }
    for (auto* v : {&fpr_lows, &fnr_lows}) {
      std::sort(v->begin(), v->end());
      v->erase(std::unique(v->begin(), v->end()), v->end());
      if (v->empty()) v->push_back(0.0);
    }
    for (double fpr_low : fpr_lows) {
      for (double fnr_low : fnr_lows) {
        std::vector<std::size_t> choice;
        for (std::size_t g = 0; g < groups.size(); ++g) {
          const std::vector<Cut>& cuts = groups[g].cuts;
          std::size_t lo = 0, hi = cuts.size() - 1;
          if (groups[g].has_neg) {
            const auto r = DecreasingRange(
                cuts, [](const Cut& c) { return c.fpr; }, fpr_low, fpr_low + hi_slack);
            if (!r) break;
            lo = std::max(lo, r->first);
            hi = std::min(hi, r->second);
          }
          if (groups[g].has_pos) {
            const auto r = IncreasingRange(
                cuts, [](const Cut& c) { return c.fnr; }, fnr_low, fnr_low + hi_slack);
            if (!r) break;
            lo = std::max(lo, r->first);
            hi = std::min(hi, r->second);
          }
          if (lo > hi) break;
          choice.push_back(best[g].Query(lo, hi));
        }
        if (choice.size() == groups.size()) offer(make_candidate(std::move(choice)));
      }
    }
  }

  if (!winner) {
    std::vector<std::size_t> choice;
    for (std::size_t g = 0; g < groups.size(); ++g)
      choice.push_back(best[g].Query(0, groups[g].cuts.size() - 1));
    winner = make_candidate(std::move(choice));
    policy.feasible = false;
  }
  for (std::size_t g = 0; g < groups.size(); ++g)
    policy.thresholds[groups[g].code] = winner->thresholds[g];
  policy.achieved_disparity = winner->disparity;
  policy.fit_accuracy = static_cast<double>(winner->correct) / static_cast<double>(scores.size());
  if (policy.achieved_disparity > hi_slack) policy.feasible = false;
  return policy;
}

std::vector<Label> ApplyThresholds(const ThresholdPolicy& policy, std::span<const double> scores,
                                   std::span<const int> attribute, Diagnostics* diag) {
  if (scores.size() != attribute.size())
    throw InvalidArgument("scores and attribute differ in length");
  std::vector<Label> out(scores.size());
  std::set<int> unknown;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const auto it = policy.thresholds.find(attribute[i]);
    double t = policy.global_threshold;
    if (it != policy.thresholds.end()) t = it->second;
    else unknown.insert(attribute[i]);
    out[i] = scores[i] >= t ? 1 : 0;
  }
  for (int code : unknown)
    Warn(diag, "no fitted threshold for attribute code " + std::to_string(code) +
                   "; using the global threshold");
  return out;
}

}  // namespace fairaudit
