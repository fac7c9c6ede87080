#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "virality/features.hpp"

namespace virality {

constexpr double kDenomEpsilon = 1e-9;  // used in every G/H denominator

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  bool categorical_split = false;
  double threshold = 0.0;                      // numeric: left iff value <= threshold
  std::vector<std::uint32_t> left_categories;  // categorical: left iff code in set
  int left = -1;
  int right = -1;
  double value = 0.0;  // leaf value, |value| <= leaf_cap

  bool is_leaf() const { return feature < 0; }
};

class RegressionTree {
 public:
  RegressionTree() { nodes_.push_back(TreeNode{}); }

  const std::vector<TreeNode>& nodes() const { return nodes_; }
  std::vector<TreeNode>& nodes() { return nodes_; }

  int num_leaves() const {
    int n = 0;
    for (const auto& nd : nodes_) n += nd.is_leaf();
    return n;
  }

  // Turns leaf `node` into an internal node and returns {left, right} ids.
  std::pair<int, int> split_leaf(int node, TreeNode split) {
    const int left = static_cast<int>(nodes_.size());
    const int right = left + 1;
    nodes_.emplace_back();
    nodes_.emplace_back();
    split.left = left;
    split.right = right;
    nodes_[static_cast<std::size_t>(node)] = std::move(split);
    return {left, right};
  }

  void set_leaf_value(int node, double value) {
    nodes_[static_cast<std::size_t>(node)].value = value;
  }

  template <typename Fn>
  void for_each_leaf(Fn&& fn) const {
    for (const auto& nd : nodes_) {
      if (nd.is_leaf()) fn(nd);
    }
  }

 private:
  std::vector<TreeNode> nodes_;
};

}  // namespace virality
