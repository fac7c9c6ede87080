#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <vector>

#include "virality/experiments.hpp"
#include "virality/features.hpp"
#include "virality/sentiment.hpp"
#include "virality/synth.hpp"

using namespace virality;

namespace {

FeatureMatrix synthetic_matrix(std::size_t rows, std::uint64_t seed) {
  SynthSpec spec;
  spec.n_rows = rows;
  spec.seed = seed;
  const SynthOutput data = generate_records(spec);
  const LexiconSentiment sentiment;
  return extract(data.records, sentiment).matrix;
}

std::map<std::string, double> rho_by_subset(const AblationReport& r) {
  std::map<std::string, double> out;
  for (const auto& row : r.rows) {
    if (!row.failed) out[row.subset] = row.metrics.spearman_r;
  }
  return out;
}

}  // namespace

TEST_CASE("fold assignment hits the declared fractions within one row") {
  SplitSpec spec;
  spec.seed = 5;

  const auto tiny = assign_folds(10, spec);
  std::size_t tr = 0, va = 0, te = 0;
  for (const Fold f : tiny) {
    tr += f == Fold::train;
    va += f == Fold::valid;
    te += f == Fold::test;
  }
  REQUIRE(tr == 7);
  REQUIRE(va == 1);
  REQUIRE(te == 2);

  const std::size_t big = 1000003;
  const auto folds = assign_folds(big, spec);
  tr = va = te = 0;
  for (const Fold f : folds) {
    tr += f == Fold::train;
    va += f == Fold::valid;
    te += f == Fold::test;
  }
  REQUIRE(std::llabs(static_cast<long long>(tr) - 700002) <= 1);  // 0.7n = 700002.1
  REQUIRE(std::llabs(static_cast<long long>(va) - 100000) <= 1);  // 0.1n = 100000.3
  REQUIRE(std::llabs(static_cast<long long>(te) - 200001) <= 1);  // 0.2n = 200000.6
  REQUIRE(tr + va + te == big);

  REQUIRE(assign_folds(big, spec) == folds);  // determinism
  SplitSpec other = spec;
  other.seed = 6;
  REQUIRE(assign_folds(big, other) != folds);

  REQUIRE_THROWS_AS(assign_folds(9, spec), std::invalid_argument);
}

TEST_CASE("split partitions the matrix with rows intact") {
  const FeatureMatrix m = synthetic_matrix(400, 11);
  SplitSpec spec;
  spec.seed = 3;
  const SplitView view = split(m, spec);
  REQUIRE(view.train.n_rows() + view.valid.n_rows() + view.test.n_rows() == m.n_rows());

  std::set<std::string> seen;
  for (const auto* part : {&view.train, &view.valid, &view.test}) {
    for (std::size_t i = 0; i < part->n_rows(); ++i) {
      REQUIRE(seen.insert(part->row_ids[i]).second);  // disjoint
    }
  }
  REQUIRE(seen.size() == m.n_rows());  // union = all rows

  // row content preserved: spot-check one relocated row
  const std::string probe = view.test.row_ids[0];
  std::size_t src = 0;
  while (m.row_ids[src] != probe) ++src;
  for (std::size_t c = 0; c < m.columns.size(); ++c) {
    REQUIRE(view.test.columns[c].values[0] == m.columns[c].values[src]);
  }
  REQUIRE(view.test.target[0] == m.target[src]);
}

TEST_CASE("modality subset list is the full 15-element power set") {
  const auto& subsets = modality_subsets();
  REQUIRE(subsets.size() == 15);
  std::set<std::string> unique(subsets.begin(), subsets.end());
  REQUIRE(unique.size() == 15);
  for (const auto& s : subsets) {
    REQUIRE(!s.empty());
    REQUIRE(parse_subset(s).size() == s.size());
  }
  REQUIRE(std::count(subsets.begin(), subsets.end(), "CTL") == 1);
  REQUIRE(subsets.back() == "ACTL");
}

TEST_CASE("ablation report has the full row set and reproduces byte-identically") {
  const FeatureMatrix m = synthetic_matrix(800, 21);
  SplitSpec spec;
  spec.seed = 9;
  TrainConfig cfg;
  cfg.num_trees = 25;
  cfg.max_leaves = 8;
  cfg.min_samples_leaf = 5;
  cfg.early_stopping_rounds = 10;
  cfg.seed = 1;

  const AblationReport report = run_ablation(m, spec, cfg, "fnv1a:test");
  REQUIRE(report.rows.size() == 16);
  REQUIRE_FALSE(report.partial);
  for (std::size_t i = 0; i < modality_subsets().size(); ++i) {
    REQUIRE(report.rows[i].subset == modality_subsets()[i]);
  }
  REQUIRE(report.rows.back().subset == "Baseline");
  for (const auto& row : report.rows) {
    REQUIRE_FALSE(row.failed);
    REQUIRE(std::isfinite(row.metrics.spearman_r));
    REQUIRE(std::isfinite(row.metrics.rmse));
    REQUIRE(row.max_abs_leaf <= cfg.leaf_cap);
    REQUIRE(row.metrics.n_mape <= row.metrics.n_total);
  }

  const AblationReport again = run_ablation(m, spec, cfg, "fnv1a:test");
  REQUIRE(ablation_report_to_json(report).dump() ==
          ablation_report_to_json(again).dump());

  const std::string table = ablation_report_to_table(report);
  REQUIRE(table.find("ACTL") != std::string::npos);
  REQUIRE(table.find("Baseline") != std::string::npos);
}

TEST_CASE("subsets carrying the generative modalities rank best") {
  // author+content generative process; T and L are pure noise
  const FeatureMatrix m = synthetic_matrix(4000, 33);
  SplitSpec spec;
  spec.seed = 2;
  TrainConfig cfg;
  cfg.num_trees = 120;
  cfg.max_leaves = 31;
  cfg.min_samples_leaf = 10;
  cfg.early_stopping_rounds = 20;

  const AblationReport report = run_ablation(m, spec, cfg, "fnv1a:test");
  const auto rho = rho_by_subset(report);
  REQUIRE(rho.size() == 16);

  const double full = rho.at("ACTL");
  const double ac = rho.at("AC");
  double best_incomplete = -1.0;
  std::string best_name;
  for (const auto& [name, r] : rho) {
    if (name == "Baseline") continue;
    const bool has_a = name.find('A') != std::string::npos;
    const bool has_c = name.find('C') != std::string::npos;
    if (has_a && has_c) continue;
    if (r > best_incomplete) {
      best_incomplete = r;
      best_name = name;
    }
  }
  INFO("best subset missing a generative modality: " << best_name << " rho="
                                                     << best_incomplete);
  REQUIRE(std::max(full, ac) >= best_incomplete + 0.05);
  REQUIRE(full > rho.at("T") + 0.05);
  REQUIRE(full > rho.at("Baseline"));
}

TEST_CASE("failed subsets mark the report partial and name the subset") {
  FeatureMatrix m = synthetic_matrix(300, 5);
  // poison one temporal column so T-only training fails
  const int idx = m.column_index("postedHour");
  REQUIRE(idx >= 0);
  m.columns[static_cast<std::size_t>(idx)]
      .values[3] = std::numeric_limits<double>::quiet_NaN();
  SplitSpec spec;
  TrainConfig cfg;
  cfg.num_trees = 5;
  cfg.max_leaves = 4;
  cfg.min_samples_leaf = 2;
  const AblationReport report = run_ablation(m, spec, cfg, "fnv1a:test");
  REQUIRE(report.partial);
  bool found_failed = false;
  for (const auto& row : report.rows) {
    if (row.subset == "T") {
      REQUIRE(row.failed);
      REQUIRE(!row.error.empty());
      found_failed = true;
    }
    if (row.subset == "A") REQUIRE_FALSE(row.failed);
  }
  REQUIRE(found_failed);
  const nlohmann::ordered_json j = ablation_report_to_json(report);
  REQUIRE(j["partial"].get<bool>());
}
