#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "virality/booster.hpp"
#include "virality/experiments.hpp"
#include "virality/features.hpp"
#include "virality/hash.hpp"
#include "virality/kvconfig.hpp"
#include "virality/metrics.hpp"
#include "virality/model_io.hpp"
#include "virality/store.hpp"
#include "virality/synth.hpp"

namespace virality {

inline TrainConfig train_config_from_kv(const KvConfig& kv, TrainConfig base = {}) {
  base.num_trees = static_cast<int>(kv.get_int("num_trees", base.num_trees));
  base.learning_rate = kv.get_double("learning_rate", base.learning_rate);
  base.max_leaves = static_cast<int>(kv.get_int("max_leaves", base.max_leaves));
  base.max_bins = static_cast<int>(kv.get_int("max_bins", base.max_bins));
  base.min_samples_leaf =
      static_cast<int>(kv.get_int("min_samples_leaf", base.min_samples_leaf));
  base.min_sum_hessian_leaf =
      kv.get_double("min_sum_hessian_leaf", base.min_sum_hessian_leaf);
  base.leaf_cap = kv.get_double("leaf_cap", base.leaf_cap);
  base.goss_enabled = kv.get_bool("goss_enabled", base.goss_enabled);
  base.goss_top_rate = kv.get_double("goss_top_rate", base.goss_top_rate);
  base.goss_other_rate = kv.get_double("goss_other_rate", base.goss_other_rate);
  base.seed = kv.get_int("seed", base.seed);
  base.early_stopping_rounds =
      static_cast<int>(kv.get_int("early_stopping_rounds", base.early_stopping_rounds));
  base.validate();
  return base;
}

// The experiments default: early stopping on the validation fold unless the
// config turns it off.
inline TrainConfig default_experiment_config() {
  TrainConfig cfg;
  cfg.early_stopping_rounds = 50;
  return cfg;
}

struct FileIngestOutcome {
  IngestSummary summary;
  std::uint64_t rejected_malformed = 0;
  std::vector<std::string> errors;  // "line N: reason"
};

inline FileIngestOutcome ingest_file(DocumentStore& store, const std::string& input) {
  std::ifstream in(input, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open input: " + input);
  FileIngestOutcome out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::string err;
    const auto rec = parse_tweet_record(line, err);
    if (!rec) {
      ++out.rejected_malformed;
      out.errors.push_back("line " + std::to_string(lineno) + ": " + err);
      continue;
    }
    switch (store.ingest_one(*rec)) {
      case DocumentStore::IngestResult::accepted: ++out.summary.accepted; break;
      case DocumentStore::IngestResult::duplicate: ++out.summary.rejected_duplicates; break;
      case DocumentStore::IngestResult::banned: ++out.summary.rejected_banned; break;
    }
  }
  store.flush();
  return out;
}

struct FileComplyOutcome {
  ComplianceSummary summary;
  std::uint64_t rejected_malformed = 0;
  std::vector<std::string> errors;
};

inline FileComplyOutcome comply_file(DocumentStore& store, const std::string& input) {
  std::ifstream in(input, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open input: " + input);
  FileComplyOutcome out;
  std::vector<ComplianceRequest> batch;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::string err;
    const auto req = parse_compliance_request(line, err);
    if (!req) {
      ++out.rejected_malformed;
      out.errors.push_back("line " + std::to_string(lineno) + ": " + err);
      continue;
    }
    batch.push_back(*req);
  }
  out.summary = store.apply_compliance(batch);
  store.compact();  // permanent elimination happens here
  return out;
}

struct PipelineOptions {
  std::string out_dir;
  std::vector<std::string> stages;  // empty = the default 7-stage run
  SynthSpec synth;
  TrainConfig train_cfg = default_experiment_config();
  SplitSpec split_spec;
  int threads = 0;
  std::string command;
  std::string config_hash;
};

struct StageResult {
  std::string name;
  std::string status;  // "ok", "failed", "not_run"
  std::string error;
  std::vector<std::string> outputs;  // file names relative to out_dir
};

struct PipelineResult {
  std::vector<StageResult> stages;
  bool ok = true;
  std::string manifest_path;
};

inline const std::vector<std::string>& default_pipeline_stages() {
  static const std::vector<std::string> stages = {
      "generate", "ingest", "comply", "featurize", "train", "predict", "evaluate"};
  return stages;
}

namespace detail {

inline void write_json_file(const std::filesystem::path& path,
                            const nlohmann::ordered_json& j) {
  std::ofstream out(path, std::ios::trunc | std::ios::binary);
  if (!out) throw std::runtime_error("cannot write: " + path.string());
  out << j.dump(2) << "\n";
}

inline std::string subset_tags_of(const FeatureMatrix& m) {
  std::set<char> tags;
  for (const auto& col : m.columns) tags.insert(modality_tag(col.modality));
  std::string out;
  for (const char c : {'A', 'C', 'T', 'L'}) {
    if (tags.count(c)) out += c;
  }
  return out;
}

}  // namespace detail

inline void save_predictions_csv(const std::string& path, const FeatureMatrix& m,
                                 const Predictions& pred, const std::string& command,
                                 const std::string& config_hash) {
  std::ofstream out(path, std::ios::trunc | std::ios::binary);
  if (!out) throw std::runtime_error("cannot write: " + path);
  out << "row_id,raw_score,lambda\n";
  for (std::size_t i = 0; i < m.n_rows(); ++i) {
    out << m.row_ids[i] << ',' << detail::format_double(pred.raw[i]) << ','
        << detail::format_double(pred.rate[i]) << '\n';
  }
  nlohmann::ordered_json meta;
  meta["version"] = 1;
  meta["command"] = command;
  meta["config_hash"] = config_hash;
  meta["rows"] = m.n_rows();
  detail::write_json_file(path + ".meta.json", meta);
}

// Runs the declared stages in order inside out_dir, recording a manifest.
// Stops at the first failing stage; completed outputs are retained.
inline PipelineResult run_pipeline(const PipelineOptions& opts) {
  namespace fs = std::filesystem;
  const fs::path dir(opts.out_dir);
  fs::create_directories(dir);

  const std::vector<std::string>& stages =
      opts.stages.empty() ? default_pipeline_stages() : opts.stages;

  PipelineResult result;
  for (const auto& s : stages) result.stages.push_back({s, "not_run", "", {}});

  const std::string records_path = (dir / "records.jsonl").string();
  const std::string compliance_path = (dir / "compliance.jsonl").string();
  const std::string store_dir = (dir / "store").string();
  const std::string features_path = (dir / "features.csv").string();
  const std::string model_path = (dir / "model.json").string();
  const std::string predictions_path = (dir / "predictions.csv").string();
  const std::string evaluation_path = (dir / "evaluation.json").string();
  const std::string ablation_path = (dir / "ablation.json").string();

  for (std::size_t si = 0; si < stages.size(); ++si) {
    StageResult& st = result.stages[si];
    try {
      if (st.name == "generate") {
        generate_file(opts.synth, records_path, compliance_path, opts.command,
                      opts.config_hash);
        st.outputs = {"records.jsonl", "records.jsonl.meta.json", "compliance.jsonl"};
      } else if (st.name == "ingest") {
        DocumentStore store(store_dir);
        const FileIngestOutcome o = ingest_file(store, records_path);
        nlohmann::ordered_json j;
        j["command"] = opts.command;
        j["config_hash"] = opts.config_hash;
        j["accepted"] = o.summary.accepted;
        j["rejected_duplicates"] = o.summary.rejected_duplicates;
        j["rejected_malformed"] = o.rejected_malformed;
        detail::write_json_file(dir / "ingest_summary.json", j);
        st.outputs = {"store", "ingest_summary.json"};
      } else if (st.name == "comply") {
        DocumentStore store(store_dir);
        const FileComplyOutcome o = comply_file(store, compliance_path);
        nlohmann::ordered_json j;
        j["command"] = opts.command;
        j["config_hash"] = opts.config_hash;
        j["deleted_documents"] = o.summary.deleted_documents;
        j["affected_authors"] = o.summary.affected_authors;
        j["rejected_malformed"] = o.rejected_malformed;
        detail::write_json_file(dir / "comply_summary.json", j);
        st.outputs = {"store", "comply_summary.json"};
      } else if (st.name == "featurize") {
        DocumentStore store(store_dir);
        const Snapshot snap = store.snapshot();
        const LexiconSentiment provider;
        ExtractResult ex = extract(snap.records, provider, opts.threads);
        save_feature_matrix(ex.matrix, features_path, opts.command, opts.config_hash,
                            provider.version());
        st.outputs = {"features.csv", "features.csv.schema.json"};
      } else if (st.name == "train") {
        const FeatureMatrix m = load_feature_matrix(features_path);
        TrainConfig cfg = opts.train_cfg;
        cfg.threads = opts.threads;
        cfg.early_stopping_rounds = 0;  // no validation fold in this stage
        const Ensemble model = fit(m, cfg);
        save_ensemble(model, model_path, opts.command, opts.config_hash);
        st.outputs = {"model.json"};
      } else if (st.name == "predict") {
        const FeatureMatrix m = load_feature_matrix(features_path);
        const Ensemble model = load_ensemble(model_path);
        const Predictions pred = predict(model, m, opts.threads);
        save_predictions_csv(predictions_path, m, pred, opts.command, opts.config_hash);
        st.outputs = {"predictions.csv", "predictions.csv.meta.json"};
      } else if (st.name == "evaluate") {
        const FeatureMatrix m = load_feature_matrix(features_path);
        const Ensemble model = load_ensemble(model_path);
        const Predictions pred = predict(model, m, opts.threads);
        EvaluationReport rep =
            evaluate_predictions(pred.raw, m.target, detail::subset_tags_of(m));
        nlohmann::ordered_json j = evaluation_report_to_json(rep);
        j["command"] = opts.command;
        j["config_hash"] = opts.config_hash;
        detail::write_json_file(evaluation_path, j);
        st.outputs = {"evaluation.json"};
      } else if (st.name == "ablate") {
        const FeatureMatrix m = load_feature_matrix(features_path);
        TrainConfig cfg = opts.train_cfg;
        cfg.threads = opts.threads;
        const AblationReport rep = run_ablation(m, opts.split_spec, cfg,
                                                fingerprint_file(features_path));
        detail::write_json_file(ablation_path,
                                ablation_report_to_json(rep, opts.command,
                                                        opts.config_hash));
        std::ofstream table(dir / "ablation.txt", std::ios::trunc | std::ios::binary);
        table << ablation_report_to_table(rep);
        st.outputs = {"ablation.json", "ablation.txt"};
      } else {
        throw std::runtime_error("unknown pipeline stage: " + st.name);
      }
      st.status = "ok";
    } catch (const std::exception& e) {
      st.status = "failed";
      st.error = e.what();
      result.ok = false;
    }
    if (!result.ok) break;
  }

  nlohmann::ordered_json manifest;
  manifest["version"] = 1;
  manifest["command"] = opts.command;
  manifest["config_hash"] = opts.config_hash;
  manifest["ok"] = result.ok;
  auto stage_list = nlohmann::ordered_json::array();
  for (const auto& st : result.stages) {
    nlohmann::ordered_json sj;
    sj["name"] = st.name;
    sj["status"] = st.status;
    if (!st.error.empty()) sj["error"] = st.error;
    sj["outputs"] = st.outputs;
    stage_list.push_back(std::move(sj));
  }
  manifest["stages"] = std::move(stage_list);
  const fs::path manifest_path = dir / "manifest.json";
  detail::write_json_file(manifest_path, manifest);
  result.manifest_path = manifest_path.string();
  return result;
}

// Parses a pipeline run config (kv format) into options. Recognized keys:
// version, out_dir, stages (comma list), rows, seed, threads, plus any
// TrainConfig / SynthSpec / split keys.
inline PipelineOptions pipeline_options_from_kv(const KvConfig& kv) {
  PipelineOptions opts;
  opts.out_dir = kv.require_string("out_dir");
  const std::string stages = kv.get_string("stages", "");
  if (!stages.empty()) {
    std::istringstream ss(stages);
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (!item.empty()) opts.stages.push_back(item);
    }
  }
  opts.synth = synth_spec_from_kv(kv);
  opts.train_cfg = train_config_from_kv(kv, default_experiment_config());
  opts.split_spec.seed = static_cast<std::uint64_t>(kv.get_int("split_seed", 0));
  opts.threads = static_cast<int>(kv.get_int("threads", 0));
  return opts;
}

}  // namespace virality
