#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "virality/binning.hpp"
#include "virality/goss.hpp"
#include "virality/hash.hpp"
#include "virality/histogram.hpp"
#include "virality/parallel.hpp"
#include "virality/poisson.hpp"
#include "virality/splitter.hpp"
#include "virality/tree.hpp"

namespace virality {

struct TrainConfig {
  int num_trees = 500;
  double learning_rate = 0.05;
  int max_leaves = 63;
  int max_bins = 255;
  int min_samples_leaf = 20;
  double min_sum_hessian_leaf = 1e-3;
  double leaf_cap = 1.5;
  bool goss_enabled = false;
  double goss_top_rate = 0.2;
  double goss_other_rate = 0.1;
  std::int64_t seed = 0;
  int early_stopping_rounds = 0;  // 0 disables; applies only with a validation set
  int threads = 0;                // 0 = hardware concurrency

  void validate() const {
    if (num_trees < 0) throw std::invalid_argument("num_trees must be >= 0");
    if (!(learning_rate > 0.0) || learning_rate > 1.0) {
      throw std::invalid_argument("learning_rate must be in (0, 1]");
    }
    if (max_leaves < 2) throw std::invalid_argument("max_leaves must be >= 2");
    if (max_bins < 2 || max_bins > 256) {
      throw std::invalid_argument("max_bins must be in [2, 256]");
    }
    if (min_samples_leaf < 1) throw std::invalid_argument("min_samples_leaf must be >= 1");
    if (min_sum_hessian_leaf < 0.0) {
      throw std::invalid_argument("min_sum_hessian_leaf must be >= 0");
    }
    if (!(leaf_cap > 0.0)) throw std::invalid_argument("leaf_cap must be > 0");
    if (goss_enabled) {
      if (!(goss_top_rate > 0.0) || goss_top_rate >= 1.0 ||
          !(goss_other_rate > 0.0) || goss_other_rate >= 1.0 ||
          goss_top_rate + goss_other_rate > 1.0) {
        throw std::invalid_argument("GOSS rates must satisfy 0 < a, 0 < b, a + b <= 1");
      }
    }
    if (early_stopping_rounds < 0) {
      throw std::invalid_argument("early_stopping_rounds must be >= 0");
    }
  }
};

struct SchemaEntry {
  std::string name;
  ColumnKind kind = ColumnKind::ordinal;
  int num_categories = 0;
};

// Trained boosting model: raw score F(t) = base_score + sum_m lr * f_m(t),
// predicted rate lambda = exp(F). Immutable once trained.
struct Ensemble {
  std::vector<SchemaEntry> schema;
  double base_score = 0.0;
  std::vector<RegressionTree> trees;
  TrainConfig config;

  std::string schema_hash() const {
    std::ostringstream os;
    for (const auto& e : schema) {
      os << e.name << '|' << column_kind_name(e.kind) << '|' << e.num_categories << ';';
    }
    return fingerprint_hex(os.str());
  }
};

struct TrainDiagnostics {
  std::vector<double> train_loss;  // mean Poisson loss; [0] is the constant model
  std::vector<double> valid_rmse;  // per kept round, when a validation set is given
  int best_iteration = 0;          // trees kept after early stopping
};

struct Predictions {
  std::vector<double> raw;   // F
  std::vector<double> rate;  // exp(F)
};

namespace detail {

using ColumnView = std::vector<const std::vector<double>*>;

inline double route_row(const RegressionTree& tree, const ColumnView& cols,
                        std::size_t row) {
  const auto& nodes = tree.nodes();
  int node = 0;
  while (!nodes[static_cast<std::size_t>(node)].is_leaf()) {
    const TreeNode& nd = nodes[static_cast<std::size_t>(node)];
    const double v = (*cols[static_cast<std::size_t>(nd.feature)])[row];
    bool go_left;
    if (nd.categorical_split) {
      go_left = std::binary_search(nd.left_categories.begin(),
                                   nd.left_categories.end(),
                                   static_cast<std::uint32_t>(v));
    } else {
      go_left = v <= nd.threshold;
    }
    node = go_left ? nd.left : nd.right;
  }
  return nodes[static_cast<std::size_t>(node)].value;
}

struct LeafRange {
  int node = 0;
  std::size_t begin = 0;
  std::size_t end = 0;
};

struct GrownTree {
  RegressionTree tree;
  std::vector<std::uint32_t> index;   // training rows, partitioned by leaf
  std::vector<LeafRange> leaf_ranges;  // ranges into `index`
};

struct LeafState {
  int node = 0;
  std::size_t begin = 0;
  std::size_t end = 0;
  double sum_grad = 0.0;
  double sum_hess = 0.0;
  NodeHistogram hist;
  std::optional<SplitCandidate> split;
};

// Bitmask over <=256 bins for categorical routing during partitioning.
struct BinSet {
  std::array<std::uint64_t, 4> words{};
  void insert(std::uint8_t b) { words[b >> 6] |= 1ULL << (b & 63); }
  bool contains(std::uint8_t b) const { return (words[b >> 6] >> (b & 63)) & 1ULL; }
};

// Leaf-wise (best-first) growth: repeatedly split the leaf with the largest
// gain until max_leaves is reached or no leaf has a positive-gain split.
// Histograms for the smaller child are built directly; the larger child uses
// parent-minus-sibling subtraction.
inline GrownTree grow_tree(const BinnedMatrix& binned,
                           const std::vector<bool>& categorical_feature,
                           const std::vector<std::uint32_t>& rows,
                           const std::vector<double>& gradients,
                           const std::vector<double>& hessians,
                           const TrainConfig& cfg) {
  GrownTree grown;
  grown.index = rows;
  const SplitConstraints limits{static_cast<std::uint32_t>(cfg.min_samples_leaf),
                                cfg.min_sum_hessian_leaf};

  std::vector<LeafState> leaves;
  {
    LeafState root;
    root.node = 0;
    root.begin = 0;
    root.end = grown.index.size();
    for (const std::uint32_t r : rows) {
      root.sum_grad += gradients[r];
      root.sum_hess += hessians[r];
    }
    root.hist = build_histograms(grown.index, gradients, hessians, binned, cfg.threads);
    root.split = best_split(root.hist, categorical_feature, limits);
    leaves.push_back(std::move(root));
  }

  while (static_cast<int>(leaves.size()) < cfg.max_leaves) {
    int pick = -1;
    double best_gain = 0.0;
    for (std::size_t i = 0; i < leaves.size(); ++i) {
      if (leaves[i].split && leaves[i].split->gain > best_gain) {
        best_gain = leaves[i].split->gain;
        pick = static_cast<int>(i);
      }
    }
    if (pick < 0) break;

    LeafState parent = std::move(leaves[static_cast<std::size_t>(pick)]);
    const SplitCandidate& sc = *parent.split;

    TreeNode split_node;
    split_node.feature = sc.feature;
    if (sc.categorical) {
      split_node.categorical_split = true;
      split_node.left_categories.assign(sc.left_bins.begin(), sc.left_bins.end());
    } else {
      split_node.threshold =
          binned.mappers[static_cast<std::size_t>(sc.feature)].upper_edge(sc.bin);
    }
    const auto [left_id, right_id] = grown.tree.split_leaf(parent.node, split_node);

    const auto& fbins = binned.bins[static_cast<std::size_t>(sc.feature)];
    auto mid = grown.index.begin();
    if (sc.categorical) {
      BinSet set;
      for (const std::uint8_t b : sc.left_bins) set.insert(b);
      mid = std::stable_partition(
          grown.index.begin() + static_cast<std::ptrdiff_t>(parent.begin),
          grown.index.begin() + static_cast<std::ptrdiff_t>(parent.end),
          [&](std::uint32_t r) { return set.contains(fbins[r]); });
    } else {
      const auto cut = static_cast<std::uint8_t>(sc.bin);
      mid = std::stable_partition(
          grown.index.begin() + static_cast<std::ptrdiff_t>(parent.begin),
          grown.index.begin() + static_cast<std::ptrdiff_t>(parent.end),
          [&](std::uint32_t r) { return fbins[r] <= cut; });
    }
    const std::size_t split_at = static_cast<std::size_t>(mid - grown.index.begin());

    LeafState left, right;
    left.node = left_id;
    left.begin = parent.begin;
    left.end = split_at;
    left.sum_grad = sc.left_grad;
    left.sum_hess = sc.left_hess;
    right.node = right_id;
    right.begin = split_at;
    right.end = parent.end;
    right.sum_grad = sc.right_grad;
    right.sum_hess = sc.right_hess;

    const bool left_smaller = (left.end - left.begin) <= (right.end - right.begin);
    LeafState& small = left_smaller ? left : right;
    LeafState& large = left_smaller ? right : left;
    small.hist = build_histograms(
        std::span<const std::uint32_t>(grown.index.data() + small.begin,
                                       small.end - small.begin),
        gradients, hessians, binned, cfg.threads);
    large.hist = subtract_histograms(parent.hist, small.hist);
    parent.hist.clear();

    left.split = best_split(left.hist, categorical_feature, limits);
    right.split = best_split(right.hist, categorical_feature, limits);

    leaves[static_cast<std::size_t>(pick)] = std::move(left);
    leaves.push_back(std::move(right));
  }

  for (const auto& leaf : leaves) {
    grown.tree.set_leaf_value(leaf.node,
                              leaf_value(leaf.sum_grad, leaf.sum_hess, cfg.leaf_cap));
    grown.leaf_ranges.push_back({leaf.node, leaf.begin, leaf.end});
  }
  return grown;
}

inline ColumnView identity_view(const FeatureMatrix& m) {
  ColumnView view;
  view.reserve(m.columns.size());
  for (const auto& col : m.columns) view.push_back(&col.values);
  return view;
}

// Compact tree layout for batch prediction: POD nodes plus a bitmask pool for
// categorical splits. Routing decisions are identical to TreeNode routing.
struct FlatTree {
  struct Node {
    double scalar = 0.0;  // threshold for numeric splits, value for leaves
    std::int32_t feature = -1;
    std::int32_t left = -1;
    std::int32_t right = -1;
    std::int32_t mask = -1;  // index into masks for categorical splits
  };
  std::vector<Node> nodes;
  std::vector<std::array<std::uint64_t, 4>> masks;

  static FlatTree build(const RegressionTree& tree) {
    FlatTree flat;
    flat.nodes.resize(tree.nodes().size());
    for (std::size_t i = 0; i < tree.nodes().size(); ++i) {
      const TreeNode& src = tree.nodes()[i];
      Node& dst = flat.nodes[i];
      if (src.is_leaf()) {
        dst.scalar = src.value;
        continue;
      }
      dst.feature = src.feature;
      dst.left = src.left;
      dst.right = src.right;
      if (src.categorical_split) {
        std::array<std::uint64_t, 4> mask{};
        for (const std::uint32_t c : src.left_categories) {
          if (c < 256) mask[c >> 6] |= 1ULL << (c & 63);
        }
        dst.mask = static_cast<std::int32_t>(flat.masks.size());
        flat.masks.push_back(mask);
      } else {
        dst.scalar = src.threshold;
      }
    }
    return flat;
  }

  const Node* advance(const Node* n, const double* row) const {
    const double v = row[n->feature];
    bool go_left;
    if (n->mask >= 0) {
      go_left = v >= 0.0 && v < 256.0 &&
                ((masks[static_cast<std::size_t>(n->mask)]
                       [static_cast<std::uint32_t>(v) >> 6] >>
                  (static_cast<std::uint32_t>(v) & 63)) &
                 1ULL);
    } else {
      go_left = v <= n->scalar;
    }
    return nodes.data() + (go_left ? n->left : n->right);
  }

  double route(const double* row) const {
    const Node* n = nodes.data();
    while (n->feature >= 0) n = advance(n, row);
    return n->scalar;
  }

  // Four independent descent chains in flight; keeps the loads pipelined.
  void route4(const double* r0, const double* r1, const double* r2, const double* r3,
              double out[4]) const {
    const Node* n0 = nodes.data();
    const Node* n1 = n0;
    const Node* n2 = n0;
    const Node* n3 = n0;
    for (;;) {
      bool live = false;
      if (n0->feature >= 0) {
        n0 = advance(n0, r0);
        live = true;
      }
      if (n1->feature >= 0) {
        n1 = advance(n1, r1);
        live = true;
      }
      if (n2->feature >= 0) {
        n2 = advance(n2, r2);
        live = true;
      }
      if (n3->feature >= 0) {
        n3 = advance(n3, r3);
        live = true;
      }
      if (!live) break;
    }
    out[0] = n0->scalar;
    out[1] = n1->scalar;
    out[2] = n2->scalar;
    out[3] = n3->scalar;
  }
};

// Maps ensemble schema positions onto matrix columns by name; throws with the
// full list of missing/extra columns on any mismatch.
inline ColumnView schema_view(const std::vector<SchemaEntry>& schema,
                              const FeatureMatrix& m) {
  ColumnView view(schema.size(), nullptr);
  std::vector<std::string> missing, extra;
  for (std::size_t i = 0; i < schema.size(); ++i) {
    const int idx = m.column_index(schema[i].name);
    if (idx < 0) {
      missing.push_back(schema[i].name);
    } else {
      view[i] = &m.columns[static_cast<std::size_t>(idx)].values;
    }
  }
  for (const auto& col : m.columns) {
    bool known = false;
    for (const auto& e : schema) {
      if (e.name == col.name) {
        known = true;
        break;
      }
    }
    if (!known) extra.push_back(col.name);
  }
  if (!missing.empty() || !extra.empty()) {
    std::ostringstream os;
    os << "feature schema mismatch;";
    if (!missing.empty()) {
      os << " missing:";
      for (const auto& s : missing) os << ' ' << s;
    }
    if (!extra.empty()) {
      os << " extra:";
      for (const auto& s : extra) os << ' ' << s;
    }
    throw std::invalid_argument(os.str());
  }
  return view;
}

}  // namespace detail

// Trains the boosted ensemble. With a validation matrix and
// early_stopping_rounds > 0, stops when validation RMSE (raw score vs target)
// has not improved for that many rounds and keeps the best prefix.
inline Ensemble fit(const FeatureMatrix& train, const TrainConfig& cfg,
                    const FeatureMatrix* valid = nullptr,
                    TrainDiagnostics* diag = nullptr) {
  cfg.validate();
  const std::size_t n = train.n_rows();
  if (n == 0) throw std::invalid_argument("fit: empty training matrix");
  for (const auto& col : train.columns) {
    if (col.values.size() != n) throw std::invalid_argument("fit: ragged matrix");
  }
  for (const double t : train.target) {
    if (!std::isfinite(t) || t < 0.0) {
      throw std::invalid_argument("fit: target must be finite and non-negative");
    }
  }

  Ensemble model;
  model.config = cfg;
  model.schema.reserve(train.columns.size());
  for (const auto& col : train.columns) {
    model.schema.push_back({col.name, col.kind, col.num_categories});
  }

  const double mean_target =
      std::accumulate(train.target.begin(), train.target.end(), 0.0) /
      static_cast<double>(n);
  model.base_score = std::log(mean_target + kDenomEpsilon);

  const BinnedMatrix binned = BinnedMatrix::build(train, cfg.max_bins);
  std::vector<bool> categorical_feature(train.columns.size());
  for (std::size_t f = 0; f < train.columns.size(); ++f) {
    categorical_feature[f] = binned.mappers[f].is_categorical();
  }

  std::vector<double> scores(n, model.base_score);
  std::vector<double> valid_scores;
  detail::ColumnView valid_view;
  if (valid != nullptr) {
    valid_view = detail::schema_view(model.schema, *valid);
    valid_scores.assign(valid->n_rows(), model.base_score);
  }

  auto mean_train_loss = [&]() {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum += poisson_loss(train.target[i], scores[i]);
    return sum / static_cast<double>(n);
  };
  if (diag != nullptr) {
    diag->train_loss.clear();
    diag->valid_rmse.clear();
    diag->train_loss.push_back(mean_train_loss());
  }

  std::vector<std::uint32_t> all_rows(n);
  std::iota(all_rows.begin(), all_rows.end(), 0);
  std::vector<double> grad(n), hess(n);

  double best_rmse = std::numeric_limits<double>::infinity();
  std::size_t best_round = 0;

  for (int m = 1; m <= cfg.num_trees; ++m) {
    for (std::size_t i = 0; i < n; ++i) {
      const double lambda = std::exp(scores[i]);
      grad[i] = lambda - train.target[i];
      hess[i] = lambda;
    }

    const std::vector<std::uint32_t>* rows = &all_rows;
    GossSample sample;
    std::vector<double> wgrad, whess;
    const std::vector<double>* g = &grad;
    const std::vector<double>* h = &hess;
    if (cfg.goss_enabled) {
      sample = goss_sample(grad, cfg.goss_top_rate, cfg.goss_other_rate,
                           mix_seed(static_cast<std::uint64_t>(cfg.seed),
                                    static_cast<std::uint64_t>(m)));
      rows = &sample.rows;
      if (!sample.fell_back) {
        wgrad = grad;
        whess = hess;
        for (std::size_t i = 0; i < sample.rows.size(); ++i) {
          const std::uint32_t r = sample.rows[i];
          wgrad[r] *= sample.weights[i];
          whess[r] *= sample.weights[i];
        }
        g = &wgrad;
        h = &whess;
      }
    }

    detail::GrownTree grown =
        detail::grow_tree(binned, categorical_feature, *rows, *g, *h, cfg);

    // Score update: partitioned rows via their leaf ranges, rows outside the
    // sample (GOSS) by routing.
    std::vector<std::uint8_t> updated;
    const bool partial = grown.index.size() != n;
    if (partial) updated.assign(n, 0);
    for (const auto& range : grown.leaf_ranges) {
      const double delta =
          cfg.learning_rate *
          grown.tree.nodes()[static_cast<std::size_t>(range.node)].value;
      for (std::size_t i = range.begin; i < range.end; ++i) {
        scores[grown.index[i]] += delta;
        if (partial) updated[grown.index[i]] = 1;
      }
    }
    if (partial) {
      const detail::ColumnView train_view = detail::identity_view(train);
      for (std::size_t i = 0; i < n; ++i) {
        if (!updated[i]) {
          scores[i] += cfg.learning_rate * detail::route_row(grown.tree, train_view, i);
        }
      }
    }

    model.trees.push_back(std::move(grown.tree));
    if (diag != nullptr) diag->train_loss.push_back(mean_train_loss());

    if (valid != nullptr) {
      const RegressionTree& tree = model.trees.back();
      double sq = 0.0;
      for (std::size_t i = 0; i < valid_scores.size(); ++i) {
        valid_scores[i] += cfg.learning_rate * detail::route_row(tree, valid_view, i);
        const double d = std::exp(valid_scores[i]) - valid->target[i];
        sq += d * d;
      }
      const double rmse =
          valid_scores.empty()
              ? 0.0
              : std::sqrt(sq / static_cast<double>(valid_scores.size()));
      if (diag != nullptr) diag->valid_rmse.push_back(rmse);
      if (rmse < best_rmse) {
        best_rmse = rmse;
        best_round = static_cast<std::size_t>(m);
      }
      if (cfg.early_stopping_rounds > 0 &&
          static_cast<std::size_t>(m) - best_round >=
              static_cast<std::size_t>(cfg.early_stopping_rounds)) {
        break;
      }
    }
  }

  if (valid != nullptr && cfg.early_stopping_rounds > 0 &&
      model.trees.size() > best_round) {
    model.trees.resize(best_round);
    if (diag != nullptr) {
      diag->train_loss.resize(best_round + 1);
      diag->valid_rmse.resize(best_round);
    }
  }
  if (diag != nullptr) diag->best_iteration = static_cast<int>(model.trees.size());
  return model;
}

// Batch prediction; embarrassingly parallel across rows and deterministic
// regardless of thread count. Rows are gathered into a dense buffer so the
// tree walks stay cache-local.
inline Predictions predict(const Ensemble& model, const FeatureMatrix& m,
                           int threads = 0) {
  const detail::ColumnView view = detail::schema_view(model.schema, m);
  const std::size_t n = m.n_rows();
  const std::size_t n_features = model.schema.size();
  std::vector<detail::FlatTree> flat;
  flat.reserve(model.trees.size());
  for (const auto& tree : model.trees) flat.push_back(detail::FlatTree::build(tree));

  Predictions out;
  out.raw.assign(n, model.base_score);
  out.rate.assign(n, 0.0);
  const double lr = model.config.learning_rate;
  parallel_for(n, threads == 0 ? model.config.threads : threads,
               [&](std::size_t begin, std::size_t end) {
                 std::vector<double> rows(4 * n_features);
                 double scores[4];
                 double leaf[4];
                 std::size_t i = begin;
                 for (; i + 4 <= end; i += 4) {
                   for (std::size_t k = 0; k < 4; ++k) {
                     for (std::size_t f = 0; f < n_features; ++f) {
                       rows[k * n_features + f] = (*view[f])[i + k];
                     }
                     scores[k] = model.base_score;
                   }
                   for (const auto& tree : flat) {
                     tree.route4(&rows[0], &rows[n_features], &rows[2 * n_features],
                                 &rows[3 * n_features], leaf);
                     for (std::size_t k = 0; k < 4; ++k) scores[k] += lr * leaf[k];
                   }
                   for (std::size_t k = 0; k < 4; ++k) {
                     out.raw[i + k] = scores[k];
                     out.rate[i + k] = std::exp(scores[k]);
                   }
                 }
                 for (; i < end; ++i) {
                   for (std::size_t f = 0; f < n_features; ++f) rows[f] = (*view[f])[i];
                   double score = model.base_score;
                   for (const auto& tree : flat) score += lr * tree.route(rows.data());
                   out.raw[i] = score;
                   out.rate[i] = std::exp(score);
                 }
               });
  return out;
}

}  // namespace virality
