#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "virality/booster.hpp"
#include "virality/features.hpp"
#include "virality/metrics.hpp"
#include "virality/model_io.hpp"
#include "virality/rng.hpp"

namespace virality {

struct SplitSpec {
  double train_frac = 0.70;
  double valid_frac = 0.10;
  double test_frac = 0.20;
  std::uint64_t seed = 0;

  void validate() const {
    if (std::fabs(train_frac + valid_frac + test_frac - 1.0) > 1e-9) {
      throw std::invalid_argument("split fractions must sum to 1");
    }
    if (train_frac <= 0.0 || valid_frac < 0.0 || test_frac <= 0.0) {
      throw std::invalid_argument("split fractions out of range");
    }
  }
};

enum class Fold : std::uint8_t { train, valid, test };

// Deterministic fold assignment: a seeded shuffle of row positions, first
// round(train_frac*n) to train, next round(valid_frac*n) to valid, rest to
// test. Each fold lands within one row of its exact fraction.
inline std::vector<Fold> assign_folds(std::size_t n, const SplitSpec& spec) {
  spec.validate();
  if (n < 10) throw std::invalid_argument("split: need at least 10 rows");
  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(mix_seed(spec.seed, 0x51C));
  rng.shuffle(order);
  const auto n_train = static_cast<std::size_t>(
      std::llround(spec.train_frac * static_cast<double>(n)));
  const auto n_valid = static_cast<std::size_t>(
      std::llround(spec.valid_frac * static_cast<double>(n)));
  std::vector<Fold> folds(n, Fold::test);
  for (std::size_t i = 0; i < n && i < n_train; ++i) folds[order[i]] = Fold::train;
  for (std::size_t i = n_train; i < n && i < n_train + n_valid; ++i) {
    folds[order[i]] = Fold::valid;
  }
  return folds;
}

struct SplitView {
  FeatureMatrix train;
  FeatureMatrix valid;
  FeatureMatrix test;
};

inline FeatureMatrix take_rows(const FeatureMatrix& m, const std::vector<Fold>& folds,
                               Fold which) {
  FeatureMatrix out;
  out.columns.reserve(m.columns.size());
  for (const auto& col : m.columns) {
    FeatureColumn c;
    c.name = col.name;
    c.modality = col.modality;
    c.kind = col.kind;
    c.transform = col.transform;
    c.num_categories = col.num_categories;
    out.columns.push_back(std::move(c));
  }
  for (std::size_t i = 0; i < m.n_rows(); ++i) {
    if (folds[i] != which) continue;
    for (std::size_t c = 0; c < m.columns.size(); ++c) {
      out.columns[c].values.push_back(m.columns[c].values[i]);
    }
    out.target.push_back(m.target[i]);
    out.row_ids.push_back(m.row_ids[i]);
  }
  return out;
}

inline SplitView split(const FeatureMatrix& m, const SplitSpec& spec) {
  const std::vector<Fold> folds = assign_folds(m.n_rows(), spec);
  return {take_rows(m, folds, Fold::train), take_rows(m, folds, Fold::valid),
          take_rows(m, folds, Fold::test)};
}

// All 15 non-empty subsets of {A, C, T, L}, by size then A<C<T<L order.
inline const std::vector<std::string>& modality_subsets() {
  static const std::vector<std::string> subsets = {
      "A",  "C",  "T",  "L",  "AC",  "AT",  "AL",  "CT",
      "CL", "TL", "ACT", "ACL", "ATL", "CTL", "ACTL"};
  return subsets;
}

inline std::set<Modality> parse_subset(const std::string& tags) {
  std::set<Modality> out;
  for (const char c : tags) out.insert(modality_from_tag(c));
  return out;
}

struct AblationRow {
  std::string subset;  // modality tags, or "Baseline"
  EvaluationReport metrics;
  double max_abs_leaf = 0.0;
  int trees_used = 0;
  bool failed = false;
  std::string error;
};

struct AblationReport {
  std::vector<AblationRow> rows;  // 15 subsets + Baseline, in order
  TrainConfig config;
  SplitSpec split_spec;
  std::string dataset_fingerprint;
  bool partial = false;
};

namespace detail {

inline double max_abs_leaf_value(const Ensemble& model) {
  double m = 0.0;
  for (const auto& tree : model.trees) {
    tree.for_each_leaf([&m](const TreeNode& nd) {
      m = std::max(m, std::fabs(nd.value));
    });
  }
  return m;
}

inline AblationRow run_one_subset(const std::string& name, const FeatureMatrix& train,
                                  const FeatureMatrix& valid, const FeatureMatrix& test,
                                  const TrainConfig& cfg) {
  AblationRow row;
  row.subset = name;
  try {
    TrainDiagnostics diag;
    const Ensemble model =
        fit(train, cfg, cfg.early_stopping_rounds > 0 ? &valid : nullptr, &diag);
    const Predictions pred = predict(model, test);
    row.metrics = evaluate_predictions(pred.raw, test.target, name);
    row.max_abs_leaf = max_abs_leaf_value(model);
    row.trees_used = static_cast<int>(model.trees.size());
  } catch (const std::exception& e) {
    row.failed = true;
    row.error = e.what();
  }
  return row;
}

}  // namespace detail

// The ablation protocol: one model per modality subset with a shared config
// and split, test metrics per subset, plus the single-feature followersCount
// baseline.
inline AblationReport run_ablation(const FeatureMatrix& matrix, const SplitSpec& spec,
                                   const TrainConfig& cfg,
                                   const std::string& dataset_fingerprint) {
  AblationReport report;
  report.config = cfg;
  report.split_spec = spec;
  report.dataset_fingerprint = dataset_fingerprint;

  const SplitView folds = split(matrix, spec);
  for (const auto& name : modality_subsets()) {
    const std::set<Modality> subset = parse_subset(name);
    const AblationRow row = detail::run_one_subset(
        name, select_modalities(folds.train, subset),
        select_modalities(folds.valid, subset), select_modalities(folds.test, subset),
        cfg);
    report.partial = report.partial || row.failed;
    report.rows.push_back(row);
  }
  {
    const std::vector<std::string> baseline_cols = {"followersCount"};
    const AblationRow row = detail::run_one_subset(
        "Baseline", select_columns(folds.train, baseline_cols),
        select_columns(folds.valid, baseline_cols),
        select_columns(folds.test, baseline_cols), cfg);
    report.partial = report.partial || row.failed;
    report.rows.push_back(row);
  }
  return report;
}

inline nlohmann::ordered_json ablation_report_to_json(const AblationReport& r,
                                                      const std::string& command = "",
                                                      const std::string& config_hash = "") {
  nlohmann::ordered_json j;
  j["version"] = 1;
  if (!command.empty()) j["command"] = command;
  if (!config_hash.empty()) j["config_hash"] = config_hash;
  j["dataset_fingerprint"] = r.dataset_fingerprint;
  j["config"] = detail::config_to_json(r.config);
  j["split"] = {{"train_frac", r.split_spec.train_frac},
                {"valid_frac", r.split_spec.valid_frac},
                {"test_frac", r.split_spec.test_frac},
                {"seed", r.split_spec.seed}};
  j["partial"] = r.partial;
  auto rows = nlohmann::ordered_json::array();
  for (const auto& row : r.rows) {
    nlohmann::ordered_json rj;
    rj["subset"] = row.subset;
    rj["failed"] = row.failed;
    if (row.failed) {
      rj["error"] = row.error;
    } else {
      rj["metrics"] = evaluation_report_to_json(row.metrics);
      rj["max_abs_leaf"] = row.max_abs_leaf;
      rj["trees_used"] = row.trees_used;
    }
    rows.push_back(std::move(rj));
  }
  j["rows"] = std::move(rows);
  return j;
}

// Plain-text table mirroring the quantitative-evaluation layout.
inline std::string ablation_report_to_table(const AblationReport& r) {
  std::ostringstream os;
  os << "Features   SpearmanR        R2      RMSE      MAPE\n";
  os << "--------------------------------------------------\n";
  char buf[160];
  for (const auto& row : r.rows) {
    if (row.failed) {
      std::snprintf(buf, sizeof(buf), "%-10s %9s %9s %9s %9s  FAILED: %s\n",
                    row.subset.c_str(), "-", "-", "-", "-", row.error.c_str());
      os << buf;
      continue;
    }
    const auto& m = row.metrics;
    std::snprintf(buf, sizeof(buf), "%-10s %9.3f %9.3f %9.3f %9.3f%s\n",
                  row.subset.c_str(), m.spearman_r, m.r_squared, m.rmse, m.mape_value,
                  m.low_confidence ? "  (low confidence)" : "");
    os << buf;
  }
  return os.str();
}

}  // namespace virality
