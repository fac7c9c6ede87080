// Command-line front end: generate / ingest / comply / featurize / train /
// predict / evaluate / ablate / pipeline, one subcommand per pipeline stage.

#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "virality/booster.hpp"
#include "virality/experiments.hpp"
#include "virality/features.hpp"
#include "virality/hash.hpp"
#include "virality/kvconfig.hpp"
#include "virality/metrics.hpp"
#include "virality/model_io.hpp"
#include "virality/pipeline.hpp"
#include "virality/store.hpp"
#include "virality/synth.hpp"
#include "virality/timeutil.hpp"

namespace {

std::string join_command(int argc, char** argv) {
  std::ostringstream os;
  for (int i = 0; i < argc; ++i) {
    if (i) os << ' ';
    os << argv[i];
  }
  return os.str();
}

std::string hash_of_config(const std::optional<std::string>& config_path,
                           const std::string& effective) {
  return config_path ? virality::fingerprint_file(*config_path)
                     : virality::fingerprint_hex(effective);
}

void print_json(const nlohmann::ordered_json& j) { std::cout << j.dump(2) << "\n"; }

}  // namespace

int main(int argc, char** argv) {
  using namespace virality;
  CLI::App app{"virality ranking toolkit"};
  app.require_subcommand(1);

  std::int64_t seed_flag = 0;
  int threads = 0;
  bool quiet = false;
  const auto* seed_opt = app.add_option("--seed", seed_flag,
                                        "override every configured seed");
  app.add_option("--threads", threads, "worker threads (0 = auto)");
  app.add_flag("--quiet", quiet, "suppress per-record diagnostics");

  const std::string command = join_command(argc, argv);

  // generate
  auto* gen = app.add_subcommand("generate", "emit a synthetic tweet corpus");
  std::string gen_out, gen_compliance, gen_spec;
  std::int64_t gen_rows = 0;
  gen->add_option("--out", gen_out, "output JSONL path")->required();
  gen->add_option("--rows", gen_rows, "number of records");
  gen->add_option("--compliance-out", gen_compliance,
                  "also emit a compliance request file");
  gen->add_option("--spec", gen_spec, "generator spec (key = value file)");

  // ingest
  auto* ingest = app.add_subcommand("ingest", "load records into the store");
  std::string in_input, in_store;
  ingest->add_option("--input", in_input)->required();
  ingest->add_option("--store", in_store)->required();

  // comply
  auto* comply = app.add_subcommand("comply", "apply deletion requests and compact");
  std::string co_input, co_store;
  comply->add_option("--input", co_input)->required();
  comply->add_option("--store", co_store)->required();

  // featurize
  auto* feat = app.add_subcommand("featurize", "extract the feature matrix");
  std::string ft_store, ft_out, ft_lang, ft_from, ft_to;
  feat->add_option("--store", ft_store)->required();
  feat->add_option("--out", ft_out)->required();
  feat->add_option("--lang", ft_lang, "restrict to one language code");
  feat->add_option("--from", ft_from, "posted_at lower bound (RFC 3339, inclusive)");
  feat->add_option("--to", ft_to, "posted_at upper bound (RFC 3339, exclusive)");

  // train
  auto* train = app.add_subcommand("train", "fit the boosted Poisson model");
  std::string tr_features, tr_config, tr_model, tr_valid;
  train->add_option("--features", tr_features)->required();
  train->add_option("--config", tr_config, "training config (key = value file)");
  train->add_option("--model-out", tr_model)->required();
  train->add_option("--valid", tr_valid, "validation features for early stopping");

  // predict
  auto* pred = app.add_subcommand("predict", "score rows with a trained model");
  std::string pr_model, pr_features, pr_out;
  pred->add_option("--model", pr_model)->required();
  pred->add_option("--features", pr_features)->required();
  pred->add_option("--out", pr_out)->required();

  // evaluate
  auto* eval = app.add_subcommand("evaluate", "metric report for a model");
  std::string ev_model, ev_features, ev_report;
  eval->add_option("--model", ev_model)->required();
  eval->add_option("--features", ev_features)->required();
  eval->add_option("--report", ev_report)->required();

  // ablate
  auto* ablate = app.add_subcommand("ablate", "per-modality-subset experiment");
  std::string ab_features, ab_config, ab_report;
  ablate->add_option("--features", ab_features)->required();
  ablate->add_option("--config", ab_config, "training config (key = value file)");
  ablate->add_option("--report", ab_report)->required();

  // pipeline
  auto* pipe = app.add_subcommand("pipeline", "run configured stages end to end");
  std::string pl_config;
  pipe->add_option("--config", pl_config, "run config (key = value file)")->required();

  // let the global flags (--seed/--threads/--quiet) appear after the subcommand
  for (auto* sub : {gen, ingest, comply, feat, train, pred, eval, ablate, pipe}) {
    sub->fallthrough();
  }

  CLI11_PARSE(app, argc, argv);
  const bool seed_given = seed_opt->count() > 0;

  try {
    if (*gen) {
      SynthSpec spec;
      std::optional<std::string> cfg_path;
      if (!gen_spec.empty()) {
        spec = synth_spec_from_kv(KvConfig::parse_file(gen_spec));
        cfg_path = gen_spec;
      }
      if (gen_rows > 0) spec.n_rows = static_cast<std::size_t>(gen_rows);
      if (seed_given) spec.seed = static_cast<std::uint64_t>(seed_flag);
      const std::string hash = hash_of_config(cfg_path, std::to_string(spec.seed) + ":" +
                                                            std::to_string(spec.n_rows));
      const SynthFileStats stats =
          generate_file(spec, gen_out, gen_compliance, command, hash);
      nlohmann::ordered_json j;
      j["rows"] = stats.rows;
      j["zero_retweet_fraction"] =
          static_cast<double>(stats.zero_retweets) / static_cast<double>(stats.rows);
      j["compliance_requests"] = stats.compliance_requests;
      print_json(j);
    } else if (*ingest) {
      DocumentStore store(in_store);
      const FileIngestOutcome o = ingest_file(store, in_input);
      if (!quiet) {
        for (const auto& e : o.errors) std::cerr << "rejected: " << e << "\n";
      }
      nlohmann::ordered_json j;
      j["accepted"] = o.summary.accepted;
      j["rejected_duplicates"] = o.summary.rejected_duplicates;
      j["rejected_malformed"] = o.rejected_malformed;
      print_json(j);
    } else if (*comply) {
      DocumentStore store(co_store);
      const FileComplyOutcome o = comply_file(store, co_input);
      if (!quiet) {
        for (const auto& e : o.errors) std::cerr << "rejected: " << e << "\n";
      }
      nlohmann::ordered_json j;
      j["deleted_documents"] = o.summary.deleted_documents;
      j["affected_authors"] = o.summary.affected_authors;
      j["rejected_malformed"] = o.rejected_malformed;
      print_json(j);
    } else if (*feat) {
      DocumentStore store(ft_store);
      SnapshotFilter filter;
      if (!ft_lang.empty()) filter.language_code = ft_lang;
      if (!ft_from.empty()) {
        const auto t = parse_rfc3339(ft_from);
        if (!t) throw std::runtime_error("--from is not an RFC 3339 timestamp");
        filter.posted_from = *t;
      }
      if (!ft_to.empty()) {
        const auto t = parse_rfc3339(ft_to);
        if (!t) throw std::runtime_error("--to is not an RFC 3339 timestamp");
        filter.posted_to = *t;
      }
      const Snapshot snap = store.snapshot(filter);
      const LexiconSentiment provider;
      const ExtractResult ex = extract(snap.records, provider, threads);
      if (!quiet) {
        for (const auto& r : ex.rejected) {
          std::cerr << "rejected row " << r.id << ": " << r.reason << "\n";
        }
      }
      save_feature_matrix(ex.matrix, ft_out, command,
                          fingerprint_hex(command), provider.version());
      nlohmann::ordered_json j;
      j["rows"] = ex.matrix.n_rows();
      j["rejected"] = ex.rejected.size();
      print_json(j);
    } else if (*train) {
      TrainConfig cfg;
      std::optional<std::string> cfg_path;
      if (!tr_config.empty()) {
        cfg = train_config_from_kv(KvConfig::parse_file(tr_config));
        cfg_path = tr_config;
      }
      if (seed_given) cfg.seed = seed_flag;
      cfg.threads = threads;
      const FeatureMatrix m = load_feature_matrix(tr_features);
      std::optional<FeatureMatrix> valid;
      if (!tr_valid.empty()) valid = load_feature_matrix(tr_valid);
      TrainDiagnostics diag;
      const Ensemble model =
          fit(m, cfg, valid ? &*valid : nullptr, &diag);
      save_ensemble(model, tr_model, command,
                    hash_of_config(cfg_path, detail::config_to_json(cfg).dump()));
      nlohmann::ordered_json j;
      j["train_rows"] = m.n_rows();
      j["trees"] = model.trees.size();
      j["final_train_loss"] = diag.train_loss.back();
      print_json(j);
    } else if (*pred) {
      const FeatureMatrix m = load_feature_matrix(pr_features);
      const Ensemble model = load_ensemble(pr_model);
      const Predictions p = predict(model, m, threads);
      save_predictions_csv(pr_out, m, p, command, fingerprint_hex(command));
      nlohmann::ordered_json j;
      j["rows"] = m.n_rows();
      print_json(j);
    } else if (*eval) {
      const FeatureMatrix m = load_feature_matrix(ev_features);
      const Ensemble model = load_ensemble(ev_model);
      const Predictions p = predict(model, m, threads);
      const EvaluationReport rep =
          evaluate_predictions(p.raw, m.target, detail::subset_tags_of(m));
      nlohmann::ordered_json j = evaluation_report_to_json(rep);
      j["command"] = command;
      j["config_hash"] = fingerprint_hex(command);
      detail::write_json_file(ev_report, j);
      print_json(j);
    } else if (*ablate) {
      TrainConfig cfg = default_experiment_config();
      SplitSpec split_spec;
      std::optional<std::string> cfg_path;
      if (!ab_config.empty()) {
        const KvConfig kv = KvConfig::parse_file(ab_config);
        cfg = train_config_from_kv(kv, default_experiment_config());
        split_spec.seed = static_cast<std::uint64_t>(kv.get_int("split_seed", 0));
        cfg_path = ab_config;
      }
      if (seed_given) {
        cfg.seed = seed_flag;
        split_spec.seed = static_cast<std::uint64_t>(seed_flag);
      }
      cfg.threads = threads;
      const FeatureMatrix m = load_feature_matrix(ab_features);
      const AblationReport rep =
          run_ablation(m, split_spec, cfg, fingerprint_file(ab_features));
      const std::string hash =
          hash_of_config(cfg_path, detail::config_to_json(cfg).dump());
      detail::write_json_file(ab_report, ablation_report_to_json(rep, command, hash));
      {
        std::ofstream table(ab_report + ".txt", std::ios::trunc | std::ios::binary);
        table << ablation_report_to_table(rep);
      }
      nlohmann::ordered_json j;
      j["rows"] = rep.rows.size();
      j["partial"] = rep.partial;
      print_json(j);
      if (!quiet) std::cerr << ablation_report_to_table(rep);
    } else if (*pipe) {
      const KvConfig kv = KvConfig::parse_file(pl_config);
      PipelineOptions opts = pipeline_options_from_kv(kv);
      opts.command = command;
      opts.config_hash = fingerprint_file(pl_config);
      if (seed_given) {
        opts.synth.seed = static_cast<std::uint64_t>(seed_flag);
        opts.train_cfg.seed = seed_flag;
        opts.split_spec.seed = static_cast<std::uint64_t>(seed_flag);
      }
      if (threads > 0) opts.threads = threads;
      const PipelineResult result = run_pipeline(opts);
      std::ifstream manifest(result.manifest_path);
      std::cout << manifest.rdbuf();
      return result.ok ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
