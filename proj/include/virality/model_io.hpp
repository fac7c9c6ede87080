#pragma once

#include <fstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "virality/booster.hpp"

namespace virality {

namespace detail {

inline nlohmann::ordered_json node_to_json(const RegressionTree& tree, int id) {
  const TreeNode& nd = tree.nodes()[static_cast<std::size_t>(id)];
  nlohmann::ordered_json j;
  if (nd.is_leaf()) {
    j["value"] = nd.value;
    return j;
  }
  j["feature"] = nd.feature;
  if (nd.categorical_split) {
    j["categories"] = nd.left_categories;
  } else {
    j["threshold"] = nd.threshold;
  }
  j["left"] = node_to_json(tree, nd.left);
  j["right"] = node_to_json(tree, nd.right);
  return j;
}

inline int node_from_json(const nlohmann::json& j, RegressionTree& tree, int id) {
  if (j.contains("value")) {
    tree.nodes()[static_cast<std::size_t>(id)].value = j.at("value").get<double>();
    return id;
  }
  TreeNode split;
  split.feature = j.at("feature").get<int>();
  if (split.feature < 0) throw std::runtime_error("model: invalid feature index");
  if (j.contains("categories")) {
    split.categorical_split = true;
    split.left_categories = j.at("categories").get<std::vector<std::uint32_t>>();
  } else {
    split.threshold = j.at("threshold").get<double>();
  }
  const auto [left, right] = tree.split_leaf(id, std::move(split));
  node_from_json(j.at("left"), tree, left);
  node_from_json(j.at("right"), tree, right);
  return id;
}

inline nlohmann::ordered_json config_to_json(const TrainConfig& c) {
  nlohmann::ordered_json j;
  j["num_trees"] = c.num_trees;
  j["learning_rate"] = c.learning_rate;
  j["max_leaves"] = c.max_leaves;
  j["max_bins"] = c.max_bins;
  j["min_samples_leaf"] = c.min_samples_leaf;
  j["min_sum_hessian_leaf"] = c.min_sum_hessian_leaf;
  j["leaf_cap"] = c.leaf_cap;
  j["goss_enabled"] = c.goss_enabled;
  j["goss_top_rate"] = c.goss_top_rate;
  j["goss_other_rate"] = c.goss_other_rate;
  j["seed"] = c.seed;
  j["early_stopping_rounds"] = c.early_stopping_rounds;
  return j;
}

inline TrainConfig config_from_json(const nlohmann::json& j) {
  TrainConfig c;
  c.num_trees = j.at("num_trees").get<int>();
  c.learning_rate = j.at("learning_rate").get<double>();
  c.max_leaves = j.at("max_leaves").get<int>();
  c.max_bins = j.at("max_bins").get<int>();
  c.min_samples_leaf = j.at("min_samples_leaf").get<int>();
  c.min_sum_hessian_leaf = j.at("min_sum_hessian_leaf").get<double>();
  c.leaf_cap = j.at("leaf_cap").get<double>();
  c.goss_enabled = j.at("goss_enabled").get<bool>();
  c.goss_top_rate = j.at("goss_top_rate").get<double>();
  c.goss_other_rate = j.at("goss_other_rate").get<double>();
  c.seed = j.at("seed").get<std::int64_t>();
  c.early_stopping_rounds = j.value("early_stopping_rounds", 0);
  return c;
}

}  // namespace detail

// Versioned JSON model document: embedded config, feature schema with hash,
// trees as nested nodes. Doubles round-trip bit-exactly through nlohmann's
// shortest-representation serializer.
inline nlohmann::ordered_json ensemble_to_json(const Ensemble& model,
                                               const std::string& command = "",
                                               const std::string& config_hash = "") {
  nlohmann::ordered_json j;
  j["format_version"] = 1;
  j["kind"] = "gbrt-poisson";
  if (!command.empty()) j["command"] = command;
  if (!config_hash.empty()) j["config_hash"] = config_hash;
  j["config"] = detail::config_to_json(model.config);
  auto schema = nlohmann::ordered_json::array();
  for (const auto& e : model.schema) {
    schema.push_back({{"name", e.name},
                      {"kind", column_kind_name(e.kind)},
                      {"num_categories", e.num_categories}});
  }
  j["schema"] = std::move(schema);
  j["schema_hash"] = model.schema_hash();
  j["base_score"] = model.base_score;
  j["num_trees"] = model.trees.size();
  auto trees = nlohmann::ordered_json::array();
  for (const auto& tree : model.trees) trees.push_back(detail::node_to_json(tree, 0));
  j["trees"] = std::move(trees);
  return j;
}

inline Ensemble ensemble_from_json(const nlohmann::json& j) {
  if (j.value("format_version", -1) != 1 || j.value("kind", "") != "gbrt-poisson") {
    throw std::runtime_error("model: unsupported format");
  }
  Ensemble model;
  model.config = detail::config_from_json(j.at("config"));
  for (const auto& e : j.at("schema")) {
    model.schema.push_back({e.at("name").get<std::string>(),
                            column_kind_from_name(e.at("kind").get<std::string>()),
                            e.at("num_categories").get<int>()});
  }
  model.base_score = j.at("base_score").get<double>();
  for (const auto& t : j.at("trees")) {
    RegressionTree tree;
    detail::node_from_json(t, tree, 0);
    model.trees.push_back(std::move(tree));
  }
  if (j.contains("schema_hash") &&
      j.at("schema_hash").get<std::string>() != model.schema_hash()) {
    throw std::runtime_error("model: schema hash mismatch");
  }
  return model;
}

inline void save_ensemble(const Ensemble& model, const std::string& path,
                          const std::string& command = "",
                          const std::string& config_hash = "") {
  std::ofstream out(path, std::ios::trunc | std::ios::binary);
  if (!out) throw std::runtime_error("cannot write model file: " + path);
  out << ensemble_to_json(model, command, config_hash).dump(2) << "\n";
}

inline Ensemble load_ensemble(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open model file: " + path);
  return ensemble_from_json(nlohmann::json::parse(in));
}

}  // namespace virality
