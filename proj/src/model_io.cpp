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

#include "fairaudit/model_io.hpp"

#include <set>
#include <string>

namespace fairaudit {
namespace {

using nlohmann::json;

json TreeToJson(const TreeModel& tree) {
  json nodes = json::array();
  for (const TreeNode& n : tree.nodes) {
    if (n.is_leaf()) {
      nodes.push_back({{"leaf", n.value}, {"weight", n.weight}, {"depth", n.depth}});
    } else {
      nodes.push_back({{"column", n.column},
                       {"variable", n.variable},
                       {"match", n.match},
                       {"other", n.other},
                       {"value", n.value},
                       {"gain", n.gain},
                       {"weight", n.weight},
                       {"depth", n.depth}});
    }
  }
  return {{"depth", tree.depth},
          {"params",
           {{"max_depth", tree.params.max_depth},
            {"min_leaf", tree.params.min_leaf},
            {"min_gain", tree.params.min_gain},
            {"feature_fraction", tree.params.feature_fraction},
            {"seed", tree.params.seed}}},
          {"nodes", nodes}};
}

TreeModel TreeFromJson(const json& doc, const EncodingPtr& enc) {
  TreeModel tree;
  tree.encoding = enc;
  tree.depth = doc.at("depth").get<int>();
  const json& p = doc.at("params");
  tree.params.max_depth = p.at("max_depth").get<int>();
  tree.params.min_leaf = p.at("min_leaf").get<std::size_t>();
  tree.params.min_gain = p.at("min_gain").get<double>();
  tree.params.feature_fraction = p.at("feature_fraction").get<double>();
  tree.params.seed = p.at("seed").get<std::uint64_t>();
  for (const json& n : doc.at("nodes")) {
    TreeNode node;
    node.weight = n.at("weight").get<double>();
    node.depth = n.at("depth").get<std::int32_t>();
    if (n.contains("leaf")) {
      node.value = n.at("leaf").get<double>();
    } else {
      node.column = n.at("column").get<std::int32_t>();
      node.variable = n.at("variable").get<std::int32_t>();
      node.match = n.at("match").get<std::int32_t>();
      node.other = n.at("other").get<std::int32_t>();
      node.value = n.at("value").get<double>();
      node.gain = n.at("gain").get<double>();
    }
    tree.nodes.push_back(node);
  }
  const auto count = static_cast<std::int32_t>(tree.nodes.size());
  for (const TreeNode& n : tree.nodes) {
    if (n.is_leaf()) continue;
    if (n.match <= 0 || n.match >= count || n.other <= 0 || n.other >= count ||
        n.column >= static_cast<std::int32_t>(enc->num_columns()))
      throw DataError("model: tree node references are out of range");
  }
  return tree;
}

const char* GrowthName(TreeGrowth g) {
  return g == TreeGrowth::kDepthWise ? "depth_wise" : "leaf_wise";
}

}  // namespace

json EncodingToJson(const Encoding& encoding) {
  json vars = json::array();
  for (std::size_t v = 0; v < encoding.num_variables(); ++v) {
    json codes = json::array();
    for (std::size_t c = encoding.begin_of(v); c < encoding.end_of(v); ++c)
      codes.push_back(encoding.columns()[c].code);
    vars.push_back({{"name", encoding.variables()[v]}, {"codes", codes}});
  }
  return vars;
}

EncodingPtr EncodingFromJson(const json& doc) {
  std::vector<std::string> names;
  std::vector<IndicatorColumn> cols;
  for (const json& v : doc) {
    const auto idx = static_cast<std::uint32_t>(names.size());
    names.push_back(v.at("name").get<std::string>());
    for (const json& c : v.at("codes")) cols.push_back({idx, c.get<int>()});
  }
  return std::make_shared<const Encoding>(std::move(names), std::move(cols));
}

json ModelToJson(const Model& model) {
  json doc;
  doc["kind"] = ModelKind(model);
  doc["encoding"] = EncodingToJson(*ModelEncoding(model));
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, TreeModel>) {
          doc["tree"] = TreeToJson(m);
        } else if constexpr (std::is_same_v<T, ForestModel>) {
          doc["params"] = {{"n_trees", m.params.n_trees},
                           {"max_depth", m.params.max_depth},
                           {"min_leaf", m.params.min_leaf},
                           {"feature_fraction", m.params.feature_fraction},
                           {"bootstrap", m.params.bootstrap},
                           {"seed", m.params.seed}};
          json trees = json::array();
          for (const TreeModel& t : m.trees) trees.push_back(TreeToJson(t));
          doc["trees"] = trees;
        } else if constexpr (std::is_same_v<T, BoostedModel>) {
          doc["params"] = {{"rounds", m.params.rounds},
                           {"learning_rate", m.params.learning_rate},
                           {"max_depth", m.params.max_depth},
                           {"lambda", m.params.lambda},
                           {"min_leaf", m.params.min_leaf},
                           {"growth", GrowthName(m.params.growth)},
                           {"max_leaves", m.params.max_leaves},
                           {"seed", m.params.seed}};
          doc["base_score"] = m.base_score;
          doc["loss_history"] = m.loss_history;
          doc["damped_rounds"] = m.damped_rounds;
          json trees = json::array();
          for (const TreeModel& t : m.trees) trees.push_back(TreeToJson(t));
          doc["trees"] = trees;
        } else {
          doc["params"] = {{"lambda1", m.params.lambda1},
                           {"max_iters", m.params.max_iters},
                           {"tol", m.params.tol}};
          doc["intercept"] = m.intercept;
          doc["weights"] = m.weights;
          doc["iterations"] = m.iterations;
          doc["converged"] = m.converged;
        }
      },
      model);
  return doc;
}

Model ModelFromJson(const json& doc) {
  try {
    const std::string kind = doc.at("kind").get<std::string>();
    const EncodingPtr enc = EncodingFromJson(doc.at("encoding"));
    if (kind == "decision_tree") return TreeFromJson(doc.at("tree"), enc);
    if (kind == "random_forest") {
      ForestModel m;
      m.encoding = enc;
      const json& p = doc.at("params");
      m.params.n_trees = p.at("n_trees").get<std::size_t>();
      m.params.max_depth = p.at("max_depth").get<int>();
      m.params.min_leaf = p.at("min_leaf").get<std::size_t>();
      m.params.feature_fraction = p.at("feature_fraction").get<double>();
      m.params.bootstrap = p.at("bootstrap").get<bool>();
      m.params.seed = p.at("seed").get<std::uint64_t>();
      for (const json& t : doc.at("trees")) m.trees.push_back(TreeFromJson(t, enc));
      if (m.trees.empty()) throw DataError("model: forest has no trees");
      return m;
    }
    if (kind == "gradient_boosting") {
      BoostedModel m;
      m.encoding = enc;
      const json& p = doc.at("params");
      m.params.rounds = p.at("rounds").get<std::size_t>();
      m.params.learning_rate = p.at("learning_rate").get<double>();
      m.params.max_depth = p.at("max_depth").get<int>();
      m.params.lambda = p.at("lambda").get<double>();
      m.params.min_leaf = p.at("min_leaf").get<std::size_t>();
      m.params.growth = p.at("growth").get<std::string>() == "leaf_wise" ? TreeGrowth::kLeafWise
                                                                         : TreeGrowth::kDepthWise;
      m.params.max_leaves = p.at("max_leaves").get<std::size_t>();
      m.params.seed = p.at("seed").get<std::uint64_t>();
      m.base_score = doc.at("base_score").get<double>();
      m.loss_history = doc.at("loss_history").get<std::vector<double>>();
      m.damped_rounds = doc.at("damped_rounds").get<std::size_t>();
      for (const json& t : doc.at("trees")) m.trees.push_back(TreeFromJson(t, enc));
      return m;
    }
    if (kind == "l1_logistic") {
      SparseLinearModel m;
      m.encoding = enc;
      const json& p = doc.at("params");
      m.params.lambda1 = p.at("lambda1").get<double>();
      m.params.max_iters = p.at("max_iters").get<std::size_t>();
      m.params.tol = p.at("tol").get<double>();
      m.intercept = doc.at("intercept").get<double>();
      m.weights = doc.at("weights").get<std::vector<double>>();
      m.iterations = doc.at("iterations").get<std::size_t>();
      m.converged = doc.at("converged").get<bool>();
      if (m.weights.size() != enc->num_columns())
        throw DataError("model: weight count does not match the encoding");
      return m;
    }
    throw DataError("model: unknown kind '" + kind + "'");
  } catch (const json::exception& e) {
    throw DataError(std::string("model: malformed document: ") + e.what());
  }
}

}  // namespace fairaudit

namespace fairaudit {
namespace {

using nlohmann::json;

template <typename T>
void Take(const json& doc, const char* key, T& field, std::set<std::string>& seen) {
  if (!doc.contains(key)) return;
  seen.insert(key);
  try {
    field = doc.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("learner parameter '") + key + "' has the wrong type");
  }
}

void RejectUnknown(const json& doc, const std::set<std::string>& seen) {
  for (auto it = doc.begin(); it != doc.end(); ++it)
    if (it.key() != "learner" && !seen.count(it.key()))
      throw ConfigError("unknown learner parameter '" + it.key() + "'");
}

}  // namespace

json LearnerParamsToJson(const LearnerParams& params) {
  return std::visit(
      [](const auto& p) -> json {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, TreeParams>) {
          return {{"learner", "decision_tree"}, {"max_depth", p.max_depth},
                  {"min_leaf", p.min_leaf},     {"min_gain", p.min_gain},
                  {"feature_fraction", p.feature_fraction}, {"seed", p.seed}};
        } else if constexpr (std::is_same_v<T, ForestParams>) {
          return {{"learner", "random_forest"}, {"n_trees", p.n_trees},
                  {"max_depth", p.max_depth},   {"min_leaf", p.min_leaf},
                  {"feature_fraction", p.feature_fraction}, {"bootstrap", p.bootstrap},
                  {"seed", p.seed}};
        } else if constexpr (std::is_same_v<T, BoostParams>) {
          return {{"learner", "gradient_boosting"}, {"rounds", p.rounds},
                  {"learning_rate", p.learning_rate}, {"max_depth", p.max_depth},
                  {"lambda", p.lambda}, {"min_leaf", p.min_leaf},
                  {"growth", GrowthName(p.growth)}, {"max_leaves", p.max_leaves},
                  {"seed", p.seed}};
        } else {
          return {{"learner", "l1_logistic"}, {"lambda1", p.lambda1},
                  {"max_iters", p.max_iters}, {"tol", p.tol}};
        }
      },
      params);
}

LearnerParams LearnerParamsFromJson(const json& doc) {
  if (!doc.is_object() || !doc.contains("learner") || !doc["learner"].is_string())
    throw ConfigError("learner parameters need a string field 'learner'");
  const std::string kind = doc["learner"].get<std::string>();
  std::set<std::string> seen;
  if (kind == "decision_tree") {
    TreeParams p;
    Take(doc, "max_depth", p.max_depth, seen);
    Take(doc, "min_leaf", p.min_leaf, seen);
    Take(doc, "min_gain", p.min_gain, seen);
    Take(doc, "feature_fraction", p.feature_fraction, seen);
    Take(doc, "seed", p.seed, seen);
    RejectUnknown(doc, seen);
    return p;
  }
  if (kind == "random_forest") {
    ForestParams p;
    Take(doc, "n_trees", p.n_trees, seen);
    Take(doc, "max_depth", p.max_depth, seen);
    Take(doc, "min_leaf", p.min_leaf, seen);
    Take(doc, "feature_fraction", p.feature_fraction, seen);
    Take(doc, "bootstrap", p.bootstrap, seen);
    Take(doc, "seed", p.seed, seen);
    RejectUnknown(doc, seen);
    return p;
  }
  if (kind == "gradient_boosting") {
    BoostParams p;
    std::string growth = GrowthName(p.growth);
    Take(doc, "rounds", p.rounds, seen);
    Take(doc, "learning_rate", p.learning_rate, seen);
    Take(doc, "max_depth", p.max_depth, seen);
    Take(doc, "lambda", p.lambda, seen);
    Take(doc, "min_leaf", p.min_leaf, seen);
    Take(doc, "growth", growth, seen);
    Take(doc, "max_leaves", p.max_leaves, seen);
    Take(doc, "seed", p.seed, seen);
    RejectUnknown(doc, seen);
    if (growth == "depth_wise") p.growth = TreeGrowth::kDepthWise;
    else if (growth == "leaf_wise") p.growth = TreeGrowth::kLeafWise;
    else throw ConfigError("unknown growth '" + growth + "'");
    return p;
  }
  if (kind == "l1_logistic") {
    L1Params p;
    Take(doc, "lambda1", p.lambda1, seen);
    Take(doc, "max_iters", p.max_iters, seen);
    Take(doc, "tol", p.tol, seen);
    RejectUnknown(doc, seen);
    return p;
  }
  throw ConfigError("unknown learner '" + kind + "'");
}

}  // namespace fairaudit
