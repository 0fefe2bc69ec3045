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

#include "fairaudit/learners.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>

#include "fairaudit/parallel.hpp"
#include "fairaudit/rng.hpp"

namespace fairaudit {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Sufficient statistics of a node: (negative weight, positive weight) for
// Gini trees, (gradient sum, hessian sum) for Newton trees.
struct Stats {
  double a = 0.0;
  double b = 0.0;
  std::size_t n = 0;

  void Add(double da, double db) {
    a += da;
    b += db;
    ++n;
  }
  Stats Minus(const Stats& o) const { return {a - o.a, b - o.b, n - o.n}; }
};

enum class Criterion { kGini, kNewton };

struct BuildOptions {
  Criterion criterion = Criterion::kGini;
  int max_depth = 6;
  std::size_t min_leaf = 1;
  double min_gain = 0.0;  // absolute
  double lambda = 0.0;
  double feature_fraction = 1.0;
  TreeGrowth growth = TreeGrowth::kDepthWise;
  std::size_t max_leaves = 0;  // 0 = unlimited
};

double Sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double LogLoss(double margin, Label y) {
  // log(1 + exp(m)) - y * m, computed stably
  const double softplus = std::max(margin, 0.0) + std::log1p(std::exp(-std::abs(margin)));
  return softplus - (y ? margin : 0.0);
}

void CheckInputs(const EncodedMatrix& data, std::span<const Label> labels,
                 std::span<const double> weights) {
  if (data.rows() == 0) throw TrainingError("cannot train on empty data");
  if (labels.size() != data.rows())
    throw InvalidArgument("labels length does not match data rows");
  if (!weights.empty() && weights.size() != data.rows())
    throw InvalidArgument("weights length does not match data rows");
  for (Label y : labels)
    if (y > 1) throw InvalidArgument("labels must be 0 or 1");
  for (double w : weights)
    if (!(w > 0.0) || !std::isfinite(w)) throw InvalidArgument("weights must be positive");
}

std::vector<double> UnitOr(std::span<const double> weights, std::size_t n) {
  if (weights.empty()) return std::vector<double>(n, 1.0);
  return {weights.begin(), weights.end()};
}

class TreeBuilder {
 public:
  TreeBuilder(const EncodedMatrix& data, std::span<const double> row_a,
              std::span<const double> row_b, const BuildOptions& options, std::uint64_t seed)
      : data_(data),
        row_a_(row_a),
        row_b_(row_b),
        options_(options),
        rng_(seed),
        scratch_(data.encoding().num_columns()) {}

  TreeModel Build(std::vector<std::uint32_t> rows) {
    TreeModel tree;
    tree.encoding = data_.encoding_ptr();
    Stats root = Accumulate(rows);
    if (options_.growth == TreeGrowth::kDepthWise) {
      GrowDepthWise(tree, std::move(rows), root, 0);
    } else {
      GrowLeafWise(tree, std::move(rows), root);
    }
    for (const TreeNode& n : tree.nodes) tree.depth = std::max(tree.depth, n.depth);
    return tree;
  }

 private:
  struct Split {
    std::int32_t column = -1;
    std::int32_t variable = -1;
    double gain = kNegInf;
    Stats match;
  };

  Stats Accumulate(std::span<const std::uint32_t> rows) const {
    Stats s;
    for (std::uint32_t r : rows) s.Add(row_a_[r], row_b_[r]);
    return s;
  }

  double Gain(const Stats& parent, const Stats& left, const Stats& right) const {
    if (options_.criterion == Criterion::kGini) {
      // Weighted sums taken by subtraction can round slightly below zero.
      auto weighted = [](const Stats& s) {
        const double a = std::max(0.0, s.a);
        const double b = std::max(0.0, s.b);
        const double w = a + b;
        return w > 0 ? w * GiniImpurity(a, b) : 0.0;
      };
      return weighted(parent) - weighted(left) - weighted(right);
    }
    auto score = [&](const Stats& s) {
      const double d = s.b + options_.lambda;
      return d > 0 ? s.a * s.a / d : 0.0;
    };
    return 0.5 * (score(left) + score(right) - score(parent));
  }

  double LeafValue(const Stats& s) const {
    if (options_.criterion == Criterion::kGini) {
      const double w = s.a + s.b;
      return w > 0 ? s.b / w : 0.0;
    }
    const double d = s.b + options_.lambda;
    return d > 0 ? -s.a / d : 0.0;
  }

  double NodeWeight(const Stats& s) const {
    return options_.criterion == Criterion::kGini ? s.a + s.b : s.b;
  }

  std::vector<std::size_t> CandidateVariables() {
    const std::size_t nv = data_.num_variables();
    std::vector<std::size_t> vars(nv);
    std::iota(vars.begin(), vars.end(), 0);
    if (options_.feature_fraction >= 1.0 || nv <= 1) return vars;
    const auto m = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::llround(options_.feature_fraction * nv)));
    for (std::size_t i = 0; i < m; ++i) {
      const std::size_t j = i + rng_.UniformIndex(nv - i);
      std::swap(vars[i], vars[j]);
    }
    vars.resize(m);
    std::sort(vars.begin(), vars.end());
    return vars;
  }

  Split FindSplit(std::span<const std::uint32_t> rows, const Stats& total, int depth) {
    Split best;
    if (depth >= options_.max_depth || rows.size() < 2 * options_.min_leaf) return best;
    const auto vars = CandidateVariables();
    const Encoding& enc = data_.encoding();
    for (std::size_t v : vars)
      for (std::size_t c = enc.begin_of(v); c < enc.end_of(v); ++c) scratch_[c] = Stats{};
    for (std::uint32_t r : rows) {
      const double a = row_a_[r];
      const double b = row_b_[r];
      for (std::size_t v : vars) scratch_[data_.active(r, v)].Add(a, b);
    }
    const double floor =
        std::max(options_.min_gain, 1e-12 * std::max(1.0, std::abs(NodeWeight(total))));
    for (std::size_t v : vars) {
      for (std::size_t c = enc.begin_of(v); c < enc.end_of(v); ++c) {
        const Stats& left = scratch_[c];
        if (left.n < options_.min_leaf || total.n - left.n < options_.min_leaf) continue;
        if (left.n == 0 || left.n == total.n) continue;
        const double gain = Gain(total, left, total.Minus(left));
        if (gain > floor && gain > best.gain) {
          best.column = static_cast<std::int32_t>(c);
          best.variable = static_cast<std::int32_t>(v);
          best.gain = gain;
          best.match = left;
        }
      }
    }
    return best;
  }

  std::int32_t AddLeaf(TreeModel& tree, const Stats& s, int depth) {
    TreeNode node;
    node.value = LeafValue(s);
    node.weight = NodeWeight(s);
    node.depth = depth;
    tree.nodes.push_back(node);
    return static_cast<std::int32_t>(tree.nodes.size() - 1);
  }

  void Partition(std::span<const std::uint32_t> rows, const Split& split,
                 std::vector<std::uint32_t>& match, std::vector<std::uint32_t>& other) const {
    match.reserve(split.match.n);
    other.reserve(rows.size() - split.match.n);
    for (std::uint32_t r : rows) {
      if (data_.active(r, split.variable) == static_cast<std::uint32_t>(split.column)) {
        match.push_back(r);
      } else {
        other.push_back(r);
      }
    }
  }

  void MakeInternal(TreeModel& tree, std::int32_t id, const Split& split) {
    TreeNode& node = tree.nodes[id];
    node.column = split.column;
    node.variable = split.variable;
    node.gain = split.gain;
  }

  std::int32_t GrowDepthWise(TreeModel& tree, std::vector<std::uint32_t> rows,
                             const Stats& total, int depth) {
    const std::int32_t id = AddLeaf(tree, total, depth);
    const Split split = FindSplit(rows, total, depth);
    if (split.column < 0) return id;
    std::vector<std::uint32_t> match, other;
    Partition(rows, split, match, other);
    rows.clear();
    rows.shrink_to_fit();
    MakeInternal(tree, id, split);
    const Stats rest = total.Minus(split.match);
    const std::int32_t m = GrowDepthWise(tree, std::move(match), split.match, depth + 1);
    const std::int32_t o = GrowDepthWise(tree, std::move(other), rest, depth + 1);
    tree.nodes[id].match = m;
    tree.nodes[id].other = o;
    return id;
  }

  void GrowLeafWise(TreeModel& tree, std::vector<std::uint32_t> rows, const Stats& total) {
    struct Pending {
      std::int32_t id;
      std::vector<std::uint32_t> rows;
      Stats stats;
      Split split;
    };
    std::vector<Pending> open;
    auto push = [&](std::vector<std::uint32_t> r, const Stats& s, int depth) {
      const std::int32_t id = AddLeaf(tree, s, depth);
      Split split = FindSplit(r, s, depth);
      if (split.column >= 0) open.push_back({id, std::move(r), s, split});
    };
    push(std::move(rows), total, 0);
    std::size_t leaves = 1;
    const std::size_t cap =
        options_.max_leaves == 0 ? std::numeric_limits<std::size_t>::max() : options_.max_leaves;
    while (!open.empty() && leaves < cap) {
      // Highest gain first; earlier node id wins ties.
      auto best = std::max_element(open.begin(), open.end(), [](const Pending& x, const Pending& y) {
        if (x.split.gain != y.split.gain) return x.split.gain < y.split.gain;
        return x.id > y.id;
      });
      Pending p = std::move(*best);
      open.erase(best);
      std::vector<std::uint32_t> match, other;
      Partition(p.rows, p.split, match, other);
      MakeInternal(tree, p.id, p.split);
      const int depth = tree.nodes[p.id].depth + 1;
      const Stats rest = p.stats.Minus(p.split.match);
      const auto m_id = static_cast<std::int32_t>(tree.nodes.size());
      push(std::move(match), p.split.match, depth);
      const auto o_id = static_cast<std::int32_t>(tree.nodes.size());
      push(std::move(other), rest, depth);
      tree.nodes[p.id].match = m_id;
      tree.nodes[p.id].other = o_id;
      ++leaves;
    }
  }

  const EncodedMatrix& data_;
  std::span<const double> row_a_;
  std::span<const double> row_b_;
  BuildOptions options_;
  Rng rng_;
  std::vector<Stats> scratch_;
};

std::vector<std::uint32_t> AllRows(std::size_t n) {
  std::vector<std::uint32_t> rows(n);
  std::iota(rows.begin(), rows.end(), 0u);
  return rows;
}

void CheckEncoding(const EncodingPtr& model, const EncodedMatrix& data) {
  if (!model || !data.encoding_ptr())
    throw DataError("column mismatch: missing encoding");
  if (model != data.encoding_ptr() && !(*model == data.encoding()))
    throw DataError("column mismatch: data was encoded with a different dictionary");
}

template <typename T>
std::vector<double> NormalizedOrZero(std::vector<T> v) {
  double total = 0.0;
  for (double x : v) total += x;
  if (total > 0.0)
    for (auto& x : v) x /= total;
  return v;
}

void AddTreeGains(const TreeModel& tree, std::vector<double>& acc) {
  for (const TreeNode& n : tree.nodes)
    if (!n.is_leaf()) acc[n.variable] += std::max(0.0, n.gain);
}

}  // namespace

double GiniImpurity(double negatives, double positives) {
  if (negatives < 0 || positives < 0) throw InvalidArgument("class counts must be non-negative");
  const double total = negatives + positives;
  if (total <= 0) throw InvalidArgument("gini impurity of an empty node is undefined");
  const double p0 = negatives / total;
  const double p1 = positives / total;
  return 1.0 - p0 * p0 - p1 * p1;
}

double TreeModel::Score(const EncodedMatrix& data, std::size_t row) const {
  std::size_t id = 0;
  while (!nodes[id].is_leaf()) {
    const TreeNode& n = nodes[id];
    id = data.active(row, n.variable) == static_cast<std::uint32_t>(n.column) ? n.match : n.other;
  }
  return nodes[id].value;
}

std::size_t TreeModel::num_leaves() const {
  return static_cast<std::size_t>(
      std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

std::vector<std::size_t> SparseLinearModel::Support() const {
  std::vector<std::size_t> s;
  for (std::size_t j = 0; j < weights.size(); ++j)
    if (weights[j] != 0.0) s.push_back(j);
  return s;
}

std::string ModelKind(const Model& model) {
  switch (model.index()) {
    case 0: return "decision_tree";
    case 1: return "random_forest";
    case 2: return "gradient_boosting";
    default: return "l1_logistic";
  }
}

const EncodingPtr& ModelEncoding(const Model& model) {
  return std::visit([](const auto& m) -> const EncodingPtr& { return m.encoding; }, model);
}

TreeModel TrainDecisionTree(const EncodedMatrix& data, std::span<const Label> labels,
                            const TreeParams& params, std::span<const double> weights) {
  CheckInputs(data, labels, weights);
  if (params.max_depth < 1) throw InvalidArgument("max_depth must be at least 1");
  if (params.min_leaf < 1) throw InvalidArgument("min_leaf must be at least 1");
  if (!(params.feature_fraction > 0.0 && params.feature_fraction <= 1.0))
    throw InvalidArgument("feature_fraction must lie in (0, 1]");
  if (data.rows() < params.min_leaf) throw TrainingError("fewer rows than min_leaf");
  const std::vector<double> w = UnitOr(weights, data.rows());
  std::vector<double> neg(data.rows()), pos(data.rows());
  double total = 0.0;
  for (std::size_t i = 0; i < data.rows(); ++i) {
    (labels[i] ? pos[i] : neg[i]) = w[i];
    total += w[i];
  }
  BuildOptions opt;
  opt.criterion = Criterion::kGini;
  opt.max_depth = params.max_depth;
  opt.min_leaf = params.min_leaf;
  opt.min_gain = params.min_gain * total;
  opt.feature_fraction = params.feature_fraction;
  TreeBuilder builder(data, neg, pos, opt, params.seed);
  TreeModel tree = builder.Build(AllRows(data.rows()));
  tree.params = params;
  return tree;
}

ForestModel TrainRandomForest(const EncodedMatrix& data, std::span<const Label> labels,
                              const ForestParams& params, std::span<const double> weights) {
  CheckInputs(data, labels, weights);
  if (params.n_trees < 1) throw InvalidArgument("n_trees must be at least 1");
  if (params.max_depth < 1) throw InvalidArgument("max_depth must be at least 1");
  const std::vector<double> w = UnitOr(weights, data.rows());
  ForestModel forest;
  forest.params = params;
  forest.encoding = data.encoding_ptr();
  forest.trees.resize(params.n_trees);
  ParallelFor(params.n_trees, [&](std::size_t t) {
    const std::uint64_t tree_seed = DeriveSeed(params.seed, t);
    TreeParams tp;
    tp.max_depth = params.max_depth;
    tp.min_leaf = params.min_leaf;
    tp.feature_fraction = params.feature_fraction;
    tp.seed = tree_seed;
    if (!params.bootstrap) {
      forest.trees[t] = TrainDecisionTree(data, labels, tp, w);
      return;
    }
    Rng rng(DeriveSeed(tree_seed, 0x5eed));
    std::vector<std::size_t> counts(data.rows(), 0);
    for (std::size_t i = 0; i < data.rows(); ++i) ++counts[rng.UniformIndex(data.rows())];
    std::vector<std::size_t> rows;
    std::vector<double> bw;
    std::vector<Label> bl;
    for (std::size_t i = 0; i < data.rows(); ++i) {
      if (counts[i] == 0) continue;
      rows.push_back(i);
      bw.push_back(w[i] * static_cast<double>(counts[i]));
      bl.push_back(labels[i]);
    }
    const EncodedMatrix sample = data.SelectRows(rows);
    forest.trees[t] = TrainDecisionTree(sample, bl, tp, bw);
  });
  return forest;
}

BoostedModel TrainGradientBoosting(const EncodedMatrix& data, std::span<const Label> labels,
                                   const BoostParams& params, std::span<const double> weights) {
  CheckInputs(data, labels, weights);
  if (params.rounds < 1) throw InvalidArgument("rounds must be at least 1");
  if (!(params.learning_rate > 0.0 && params.learning_rate <= 1.0))
    throw InvalidArgument("learning rate must lie in (0, 1]");
  if (!(params.lambda >= 0.0)) throw InvalidArgument("lambda must be non-negative");
  if (params.max_depth < 1) throw InvalidArgument("max_depth must be at least 1");

  const std::size_t n = data.rows();
  const std::vector<double> w = UnitOr(weights, n);
  double wsum = 0.0, wpos = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    wsum += w[i];
    if (labels[i]) wpos += w[i];
  }
  const double rate = std::clamp(wpos / wsum, 1e-6, 1.0 - 1e-6);

  BoostedModel model;
  model.params = params;
  model.encoding = data.encoding_ptr();
  model.base_score = std::log(rate / (1.0 - rate));

  std::vector<double> margin(n, model.base_score);
  auto mean_loss = [&](const std::vector<double>& m) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += w[i] * LogLoss(m[i], labels[i]);
    return s / wsum;
  };
  double loss = mean_loss(margin);
  model.loss_history.push_back(loss);

  BuildOptions opt;
  opt.criterion = Criterion::kNewton;
  opt.max_depth = params.max_depth;
  opt.min_leaf = params.min_leaf;
  opt.lambda = params.lambda;
  opt.growth = params.growth;
  opt.max_leaves = params.growth == TreeGrowth::kLeafWise ? params.max_leaves : 0;

  std::vector<double> grad(n), hess(n), step(n), candidate(n);
  const auto rows = AllRows(n);
  for (std::size_t round = 0; round < params.rounds; ++round) {
    for (std::size_t i = 0; i < n; ++i) {
      const double p = Sigmoid(margin[i]);
      grad[i] = w[i] * (p - labels[i]);
      hess[i] = w[i] * p * (1.0 - p);
    }
    TreeBuilder builder(data, grad, hess, opt, DeriveSeed(params.seed, round));
    TreeModel tree = builder.Build(rows);
    for (std::size_t i = 0; i < n; ++i) step[i] = tree.Score(data, i);

    // Newton leaves can overshoot on the logistic loss; halve the step until
    // the training loss does not rise.
    double scale = params.learning_rate;
    double next = loss;
    bool accepted = false;
    for (int attempt = 0; attempt < 40; ++attempt) {
      for (std::size_t i = 0; i < n; ++i) candidate[i] = margin[i] + scale * step[i];
      next = mean_loss(candidate);
      if (!std::isfinite(next))
        throw TrainingError("non-finite training loss at boosting round " + std::to_string(round + 1));
      if (next <= loss) {
        accepted = true;
        break;
      }
      scale *= 0.5;
    }
    if (scale != params.learning_rate) ++model.damped_rounds;
    if (!accepted) {
      scale = 0.0;
      next = loss;
    } else {
      margin.swap(candidate);
    }
    for (TreeNode& node : tree.nodes) node.value *= scale;
    tree.params.max_depth = params.max_depth;
    tree.params.min_leaf = params.min_leaf;
    tree.params.seed = DeriveSeed(params.seed, round);
    model.trees.push_back(std::move(tree));
    loss = next;
    model.loss_history.push_back(loss);
  }
  return model;
}

SparseLinearModel TrainL1Logistic(const EncodedMatrix& data, std::span<const Label> labels,
                                  const L1Params& params, std::span<const double> weights) {
  CheckInputs(data, labels, weights);
  if (!(params.lambda1 >= 0.0)) throw InvalidArgument("lambda1 must be non-negative");
  if (!(params.tol > 0.0)) throw InvalidArgument("tol must be positive");
  const std::size_t n = data.rows();
  const std::size_t p = data.encoding().num_columns();
  const std::vector<double> w = UnitOr(weights, n);
  double wsum = 0.0, wpos = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    wsum += w[i];
    if (labels[i]) wpos += w[i];
  }

  // Column -> rows with that indicator set.
  std::vector<std::vector<std::uint32_t>> rows_of(p);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t v = 0; v < data.num_variables(); ++v)
      rows_of[data.active(i, v)].push_back(static_cast<std::uint32_t>(i));

  // Quadratic upper bound of the logistic loss: curvature <= 1/4 per row.
  std::vector<double> curvature(p, 0.0);
  for (std::size_t j = 0; j < p; ++j) {
    double s = 0.0;
    for (std::uint32_t i : rows_of[j]) s += w[i];
    curvature[j] = 0.25 * s / wsum;
  }

  SparseLinearModel model;
  model.params = params;
  model.encoding = data.encoding_ptr();
  model.weights.assign(p, 0.0);
  const double rate = std::clamp(wpos / wsum, 1e-12, 1.0 - 1e-12);
  model.intercept = std::log(rate / (1.0 - rate));

  std::vector<double> eta(n, model.intercept);
  std::vector<double> prob(n);
  for (std::size_t i = 0; i < n; ++i) prob[i] = Sigmoid(eta[i]);

  auto shift = [&](std::span<const std::uint32_t> rows, double delta) {
    for (std::uint32_t i : rows) {
      eta[i] += delta;
      prob[i] = Sigmoid(eta[i]);
    }
  };

  for (std::size_t iter = 0; iter < params.max_iters; ++iter) {
    double max_change = 0.0;
    {
      double g = 0.0;
      for (std::size_t i = 0; i < n; ++i) g += w[i] * (prob[i] - labels[i]);
      g /= wsum;
      const double delta = -g / 0.25;
      if (delta != 0.0) {
        model.intercept += delta;
        for (std::size_t i = 0; i < n; ++i) {
          eta[i] += delta;
          prob[i] = Sigmoid(eta[i]);
        }
      }
      max_change = std::max(max_change, std::abs(delta));
    }
    for (std::size_t j = 0; j < p; ++j) {
      const double h = curvature[j];
      if (h <= 0.0) continue;
      double g = 0.0;
      for (std::uint32_t i : rows_of[j]) g += w[i] * (prob[i] - labels[i]);
      g /= wsum;
      const double z = h * model.weights[j] - g;
      const double shrunk = std::copysign(std::max(std::abs(z) - params.lambda1, 0.0), z) / h;
      const double delta = shrunk - model.weights[j];
      if (delta != 0.0) {
        model.weights[j] = shrunk;
        shift(rows_of[j], delta);
      }
      max_change = std::max(max_change, std::abs(delta));
    }
    model.iterations = iter + 1;
    if (max_change < params.tol) {
      model.converged = true;
      break;
    }
  }
  return model;
}

double LogisticLoss(const SparseLinearModel& model, const EncodedMatrix& data,
                    std::span<const Label> labels, std::span<const double> weights) {
  CheckEncoding(model.encoding, data);
  const std::vector<double> w = UnitOr(weights, data.rows());
  double s = 0.0, wsum = 0.0;
  for (std::size_t i = 0; i < data.rows(); ++i) {
    double m = model.intercept;
    for (std::size_t v = 0; v < data.num_variables(); ++v) m += model.weights[data.active(i, v)];
    s += w[i] * LogLoss(m, labels[i]);
    wsum += w[i];
  }
  return s / wsum;
}

std::vector<double> LogisticGradient(const SparseLinearModel& model, const EncodedMatrix& data,
                                     std::span<const Label> labels,
                                     std::span<const double> weights) {
  CheckEncoding(model.encoding, data);
  const std::vector<double> w = UnitOr(weights, data.rows());
  std::vector<double> g(model.weights.size() + 1, 0.0);
  double wsum = 0.0;
  for (std::size_t i = 0; i < data.rows(); ++i) {
    double m = model.intercept;
    for (std::size_t v = 0; v < data.num_variables(); ++v) m += model.weights[data.active(i, v)];
    const double r = w[i] * (Sigmoid(m) - labels[i]);
    g[0] += r;
    for (std::size_t v = 0; v < data.num_variables(); ++v) g[1 + data.active(i, v)] += r;
    wsum += w[i];
  }
  for (double& x : g) x /= wsum;
  return g;
}

std::vector<double> PredictScores(const Model& model, const EncodedMatrix& data) {
  CheckEncoding(ModelEncoding(model), data);
  std::vector<double> scores(data.rows());
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        for (std::size_t r = 0; r < data.rows(); ++r) {
          if constexpr (std::is_same_v<T, TreeModel>) {
            scores[r] = m.Score(data, r);
          } else if constexpr (std::is_same_v<T, ForestModel>) {
            double s = 0.0;
            for (const TreeModel& t : m.trees) s += t.Score(data, r);
            scores[r] = s / static_cast<double>(m.trees.size());
          } else if constexpr (std::is_same_v<T, BoostedModel>) {
            double s = m.base_score;
            for (const TreeModel& t : m.trees) s += t.Score(data, r);
            scores[r] = Sigmoid(s);
          } else {
            double s = m.intercept;
            for (std::size_t v = 0; v < data.num_variables(); ++v)
              s += m.weights[data.active(r, v)];
            scores[r] = Sigmoid(s);
          }
        }
      },
      model);
  for (double& s : scores) s = std::clamp(s, 0.0, 1.0);
  return scores;
}

Predictions Predict(const Model& model, const EncodedMatrix& data, double threshold) {
  Predictions out;
  out.scores = PredictScores(model, data);
  out.labels.reserve(out.scores.size());
  for (double s : out.scores) out.labels.push_back(s >= threshold ? 1 : 0);
  return out;
}

ImportanceVector Importance(const Model& model) {
  ImportanceVector out;
  const Encoding& enc = *ModelEncoding(model);
  out.variables = enc.variables();
  std::vector<double> acc(enc.num_variables(), 0.0);
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, TreeModel>) {
          AddTreeGains(m, acc);
          out.method = "gini_decrease";
        } else if constexpr (std::is_same_v<T, ForestModel>) {
          for (const TreeModel& t : m.trees) AddTreeGains(t, acc);
          out.method = "gini_decrease";
        } else if constexpr (std::is_same_v<T, BoostedModel>) {
          for (const TreeModel& t : m.trees) AddTreeGains(t, acc);
          out.method = "loss_reduction";
        } else {
          for (std::size_t j = 0; j < m.weights.size(); ++j) {
            const auto v = enc.columns()[j].variable;
            acc[v] = std::max(acc[v], std::abs(m.weights[j]));
          }
          out.method = "max_abs_weight";
        }
      },
      model);
  out.scores = NormalizedOrZero(std::move(acc));
  return out;
}

}  // namespace fairaudit
