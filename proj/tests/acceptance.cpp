// Acceptance suite: runs each release criterion and prints one line per
// criterion. Exit code is nonzero if any hard criterion fails; throughput
// targets are soft and report a warning instead.

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <mutex>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "virality/binning.hpp"
#include "virality/booster.hpp"
#include "virality/experiments.hpp"
#include "virality/features.hpp"
#include "virality/hash.hpp"
#include "virality/histogram.hpp"
#include "virality/metrics.hpp"
#include "virality/model_io.hpp"
#include "virality/pipeline.hpp"
#include "virality/poisson.hpp"
#include "virality/rng.hpp"
#include "virality/sentiment.hpp"
#include "virality/splitter.hpp"
#include "virality/store.hpp"
#include "virality/synth.hpp"

using namespace virality;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

int g_failures = 0;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void report(const std::string& name, bool pass, const std::string& detail,
            double elapsed, bool warn_only = false) {
  const char* tag = pass ? "[PASS]" : (warn_only ? "[WARN]" : "[FAIL]");
  if (!pass && !warn_only) ++g_failures;
  std::printf("%s %s: %s (%.2f s)\n", tag, name.c_str(), detail.c_str(), elapsed);
  std::fflush(stdout);
}

// ----- criterion: gradient oracle -----------------------------------------

void check_gradient_oracle() {
  const auto start = Clock::now();
  Rng rng(2024);
  const double eps = 1e-5;
  double worst = 0.0;
  bool ok = true;
  for (int i = 0; i < 1000; ++i) {
    const double r = rng.next_uniform(0.0, 10.0);
    const double f = rng.next_uniform(-5.0, 5.0);
    const GradHess gh = grad_hess(r, f);
    const double fd_grad =
        (poisson_loss(r, f + eps) - poisson_loss(r, f - eps)) / (2.0 * eps);
    const double fd_hess = (grad_hess(r, f + eps).grad - grad_hess(r, f - eps).grad) /
                           (2.0 * eps);
    const double grad_err =
        std::fabs(fd_grad - gh.grad) / std::max(1.0, std::fabs(gh.grad));
    const double hess_err =
        std::fabs(fd_hess - gh.hess) / std::max(1.0, std::fabs(gh.hess));
    worst = std::max({worst, grad_err, hess_err});
    ok = ok && grad_err <= 1e-6 && hess_err <= 1e-6;
  }
  const double elapsed = seconds_since(start);
  std::ostringstream detail;
  detail << "1000 random (r,F) pairs, max rel err " << worst;
  report("gradient-oracle", ok && elapsed < 1.0, detail.str(), elapsed);
}

// ----- criterion: split oracles --------------------------------------------

double accept_gain(double gl, double hl, double gr, double hr) {
  const double eps = 1e-9;
  const double gp = gl + gr, hp = hl + hr;
  return gl * gl / (hl + eps) + gr * gr / (hr + eps) - gp * gp / (hp + eps);
}

void check_split_oracles() {
  const auto start = Clock::now();
  Rng rng(77);
  bool ok = true;
  std::string failure;
  auto dyadic = [&rng](int lo, int hi) {
    return (static_cast<double>(lo) +
            static_cast<double>(rng.next_below(static_cast<std::uint64_t>(hi - lo)))) /
           1024.0;
  };

  for (int trial = 0; trial < 200 && ok; ++trial) {
    const bool categorical_trial = trial % 2 == 1;
    const std::size_t n = 20 + rng.next_below(181);

    if (!categorical_trial) {
      const std::size_t n_features = 1 + rng.next_below(5);
      std::vector<std::vector<double>> cols(n_features, std::vector<double>(n));
      for (auto& col : cols) {
        const int pool = 2 + static_cast<int>(rng.next_below(14));
        for (auto& v : col) {
          v = static_cast<double>(rng.next_below(static_cast<std::uint64_t>(pool)));
        }
      }
      std::vector<double> g(n), h(n);
      for (std::size_t i = 0; i < n; ++i) {
        g[i] = dyadic(-16384, 16384);
        h[i] = dyadic(1, 4096);
      }
      FeatureMatrix m;
      for (std::size_t c = 0; c < n_features; ++c) {
        FeatureColumn col;
        col.name = "f" + std::to_string(c);
        col.kind = ColumnKind::ordinal;
        col.values = cols[c];
        m.columns.push_back(std::move(col));
      }
      m.target.assign(n, 0.0);
      const BinnedMatrix binned = BinnedMatrix::build(m, 255);
      std::vector<std::uint32_t> rows(n);
      std::iota(rows.begin(), rows.end(), 0);
      const NodeHistogram hist = build_histograms(rows, g, h, binned);
      const auto got =
          best_split(hist, std::vector<bool>(n_features, false), SplitConstraints{1, 0.0});

      double want = 0.0;
      for (std::size_t f = 0; f < n_features; ++f) {
        std::vector<double> distinct = cols[f];
        std::sort(distinct.begin(), distinct.end());
        distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
        for (std::size_t c = 0; c + 1 < distinct.size(); ++c) {
          double gl = 0, hl = 0, gr = 0, hr = 0;
          for (std::size_t i = 0; i < n; ++i) {
            if (cols[f][i] <= distinct[c]) {
              gl += g[i];
              hl += h[i];
            } else {
              gr += g[i];
              hr += h[i];
            }
          }
          want = std::max(want, accept_gain(gl, hl, gr, hr));
        }
      }
      const double got_gain = got ? got->gain : 0.0;
      if (got_gain != want) {
        ok = false;
        failure = "numeric trial " + std::to_string(trial);
      }
    } else {
      const int k = 2 + static_cast<int>(rng.next_below(7));
      std::vector<double> col(n);
      for (std::size_t i = 0; i < n; ++i) {
        col[i] = i < static_cast<std::size_t>(k)
                     ? static_cast<double>(i)
                     : static_cast<double>(rng.next_below(static_cast<std::uint64_t>(k)));
      }
      std::vector<double> g(n), h(n);
      for (std::size_t i = 0; i < n; ++i) {
        g[i] = dyadic(-16384, 16384);
        h[i] = dyadic(1, 4096);
      }
      FeatureMatrix m;
      FeatureColumn c0;
      c0.name = "cat";
      c0.kind = ColumnKind::categorical;
      c0.num_categories = k;
      c0.values = col;
      m.columns.push_back(std::move(c0));
      m.target.assign(n, 0.0);
      const BinnedMatrix binned = BinnedMatrix::build(m, 255);
      std::vector<std::uint32_t> rows(n);
      std::iota(rows.begin(), rows.end(), 0);
      const NodeHistogram hist = build_histograms(rows, g, h, binned);
      const auto got = best_split(hist, {true}, SplitConstraints{1, 0.0});

      double want = 0.0;  // exhaustive 2^(k-1)-1 partitions
      for (std::uint32_t mask = 1; mask < (1u << (k - 1)); ++mask) {
        double gl = 0, hl = 0, gr = 0, hr = 0;
        for (std::size_t i = 0; i < n; ++i) {
          const int c = static_cast<int>(col[i]);
          if (c > 0 && ((mask >> (c - 1)) & 1u)) {
            gl += g[i];
            hl += h[i];
          } else {
            gr += g[i];
            hr += h[i];
          }
        }
        want = std::max(want, accept_gain(gl, hl, gr, hr));
      }
      const double got_gain = got ? got->gain : 0.0;
      if (got_gain != want) {
        ok = false;
        failure = "categorical trial " + std::to_string(trial);
      }
    }
  }
  const double elapsed = seconds_since(start);
  report("split-oracles",
         ok && elapsed < 30.0,
         ok ? "200 datasets, histogram gains equal exhaustive search exactly"
            : "mismatch at " + failure,
         elapsed);
}

// ----- criterion: spearman oracle -------------------------------------------

std::vector<double> oracle_ranks(const std::vector<double>& v) {
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    std::size_t below = 0, tied = 0;
    for (std::size_t j = 0; j < v.size(); ++j) {
      below += v[j] < v[i];
      tied += v[j] == v[i];
    }
    ranks[i] = static_cast<double>(below) + 1.0 + (static_cast<double>(tied) - 1.0) / 2.0;
  }
  return ranks;
}

double oracle_rho(const std::vector<double>& a, const std::vector<double>& b) {
  const auto ra = oracle_ranks(a);
  const auto rb = oracle_ranks(b);
  const double n = static_cast<double>(a.size());
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += ra[i];
    mb += rb[i];
  }
  ma /= n;
  mb /= n;
  double saa = 0, sbb = 0, sab = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (ra[i] - ma) * (rb[i] - mb);
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

void check_spearman_oracle() {
  const auto start = Clock::now();
  Rng rng(31337);
  bool ok = true;
  double worst = 0.0;
  for (int trial = 0; trial < 1000 && ok; ++trial) {
    const std::size_t n = 3 + rng.next_below(498);
    std::vector<double> a(n), b(n);
    const bool heavy_ties = trial % 2 == 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (heavy_ties) {
        a[i] = static_cast<double>(rng.next_below(6));
        b[i] = static_cast<double>(rng.next_below(4));
      } else {
        a[i] = rng.next_normal();
        b[i] = rng.next_normal();
      }
    }
    const SpearmanResult got = spearman(a, b);
    if (!got.defined) continue;
    const double want = oracle_rho(a, b);
    const double err = std::fabs(got.rho - want);
    worst = std::max(worst, err);
    ok = ok && err <= 1e-12;

    if (!heavy_ties) {  // no ties w.p. 1: classic formula applies
      const auto ra = average_ranks(a);
      const auto rb = average_ranks(b);
      double d2 = 0;
      for (std::size_t i = 0; i < n; ++i) d2 += (ra[i] - rb[i]) * (ra[i] - rb[i]);
      const double nn = static_cast<double>(n);
      const double classic = 1.0 - 6.0 * d2 / (nn * (nn * nn - 1.0));
      const double cerr = std::fabs(got.rho - classic);
      worst = std::max(worst, cerr);
      ok = ok && cerr <= 1e-12;
    }
  }
  std::ostringstream detail;
  detail << "1000 vectors, max |rho - oracle| = " << worst;
  report("spearman-oracle", ok, detail.str(), seconds_since(start));
}

// ----- criterion: monotone loss ---------------------------------------------

void check_monotone_loss() {
  const auto start = Clock::now();
  Rng rng(555);
  bool ok = true;
  for (int trial = 0; trial < 20 && ok; ++trial) {
    const std::size_t n = 80 + rng.next_below(220);
    const std::size_t n_features = 1 + rng.next_below(4);
    FeatureMatrix m;
    for (std::size_t c = 0; c < n_features; ++c) {
      FeatureColumn col;
      col.name = "f" + std::to_string(c);
      col.kind = ColumnKind::ordinal;
      col.values.resize(n);
      m.columns.push_back(std::move(col));
    }
    m.target.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      double lin = -0.5;
      for (std::size_t c = 0; c < n_features; ++c) {
        m.columns[c].values[i] = static_cast<double>(rng.next_below(64));
        lin += 0.02 * m.columns[c].values[i] / 8.0;
      }
      m.target[i] = std::log1p(static_cast<double>(rng.next_poisson(std::exp(lin))));
      m.row_ids.push_back("r" + std::to_string(i));
    }
    TrainConfig cfg;
    cfg.num_trees = 30;
    cfg.max_leaves = 2 + static_cast<int>(rng.next_below(14));
    cfg.learning_rate = 0.05 + 0.4 * rng.next_double();
    cfg.min_samples_leaf = 1;
    cfg.min_sum_hessian_leaf = 0.0;
    cfg.goss_enabled = false;
    TrainDiagnostics diag;
    fit(m, cfg, nullptr, &diag);
    for (std::size_t i = 1; i < diag.train_loss.size(); ++i) {
      if (diag.train_loss[i] > diag.train_loss[i - 1] + 1e-12) {
        ok = false;
        break;
      }
    }
  }
  report("monotone-loss", ok, "20 random datasets, GOSS off, per-round loss non-increasing",
         seconds_since(start));
}

// ----- criterion: compliance safety ------------------------------------------

std::string dir_state_hash(const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& f : files) {
    h = fnv1a64(f.filename().string(), h);
    std::ifstream in(f, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    h = fnv1a64(ss.str(), h);
  }
  return to_hex64(h);
}

void check_compliance_safety(const fs::path& work) {
  const auto start = Clock::now();
  bool ok = true;
  std::string failure;
  const LexiconSentiment sentiment;

  constexpr int kTrials = 50;
  constexpr std::size_t kDocs = 10000;
  constexpr std::size_t kDeletes = 1000;

  for (int trial = 0; trial < kTrials && ok; ++trial) {
    const fs::path dir = work / ("compliance-" + std::to_string(trial));
    fs::remove_all(dir);
    Rng rng(9000 + static_cast<std::uint64_t>(trial));

    std::vector<TweetRecord> docs;
    docs.reserve(kDocs);
    for (std::size_t i = 0; i < kDocs; ++i) {
      TweetRecord r;
      r.id = "t" + std::to_string(i);
      r.author_id = "u" + std::to_string(i % 257);
      r.followers_count = static_cast<std::int64_t>(rng.next_below(10000));
      r.statuses_count = 1 + static_cast<std::int64_t>(rng.next_below(1000));
      r.account_created_at = 1400000000;
      r.posted_at = 1483229000 + static_cast<std::int64_t>(i);
      r.language_code = "en";
      r.text = "update";
      r.retweet_total = static_cast<std::int64_t>(rng.next_below(20));
      docs.push_back(std::move(r));
    }
    // deletions target ids by ingest position, always after that ingest ran
    std::vector<std::size_t> delete_targets(kDeletes);
    for (std::size_t d = 0; d < kDeletes; ++d) delete_targets[d] = rng.next_below(kDocs);

    DocumentStore store(dir);
    std::atomic<std::size_t> ingested{0};
    std::mutex deleted_mu;
    std::set<std::string> deleted;
    std::vector<ComplianceRequest> requests;
    requests.reserve(kDeletes);

    std::thread ingester([&] {
      for (const auto& doc : docs) {
        store.ingest_one(doc);
        ingested.fetch_add(1, std::memory_order_release);
      }
    });
    std::thread deleter([&] {
      Rng local(31 + static_cast<std::uint64_t>(trial));
      for (std::size_t d = 0; d < kDeletes; ++d) {
        // wait until the target's ingest completed, then delete it
        while (ingested.load(std::memory_order_acquire) <= delete_targets[d]) {
          std::this_thread::yield();
        }
        ComplianceRequest req;
        req.kind = ComplianceRequest::Kind::delete_status;
        req.target_id = "t" + std::to_string(delete_targets[d]);
        req.received_at = 1500000000 + static_cast<std::int64_t>(d);
        store.apply_one(req);
        {
          std::lock_guard<std::mutex> lk(deleted_mu);
          deleted.insert(req.target_id);
          requests.push_back(req);
        }
        if (local.next_below(64) == 0) std::this_thread::yield();
      }
    });
    // concurrent snapshots: no record whose deletion completed before the
    // snapshot began may appear
    for (int probe = 0; probe < 5; ++probe) {
      std::set<std::string> before;
      {
        std::lock_guard<std::mutex> lk(deleted_mu);
        before = deleted;
      }
      const Snapshot snap = store.snapshot();
      std::set<std::string> ids;
      for (const auto& r : snap.records) ids.insert(r.id);
      for (const auto& id : before) {
        if (ids.count(id)) {
          ok = false;
          failure = "deleted record visible in concurrent snapshot";
        }
      }
    }
    ingester.join();
    deleter.join();

    const Snapshot final_snap = store.snapshot();
    std::set<std::string> final_ids;
    for (const auto& r : final_snap.records) final_ids.insert(r.id);
    for (const auto& id : deleted) {
      if (final_ids.count(id)) {
        ok = false;
        failure = "deleted record in final snapshot";
      }
    }
    if (final_ids.size() != kDocs - deleted.size()) {
      ok = false;
      failure = "unexpected live count";
    }
    const FeatureMatrix matrix = extract(final_snap.records, sentiment).matrix;
    for (const auto& id : matrix.row_ids) {
      if (deleted.count(id)) {
        ok = false;
        failure = "deleted record in downstream FeatureMatrix";
      }
    }
    // byte-exact idempotence of re-application
    store.flush();
    const std::string before_hash = dir_state_hash(dir);
    store.apply_compliance(requests);
    if (dir_state_hash(dir) != before_hash) {
      ok = false;
      failure = "re-applied deletions changed store bytes";
    }
    fs::remove_all(dir);
  }
  report("compliance-safety", ok,
         ok ? "50 interleaved trials (10k ingests / 1k deletions), no leaks, idempotent"
            : failure,
         seconds_since(start));
}

// ----- synthetic end-to-end + dependent criteria ------------------------------

struct E2EArtifacts {
  fs::path dir;
  bool pipeline_ok = false;
  double elapsed = 0.0;
  std::map<std::string, EvaluationReport> ablation;
  std::map<std::string, double> max_abs_leaf;
  double zero_fraction = 0.0;
  bool shape_ok = false;
  std::string shape_detail;
};

E2EArtifacts run_e2e(const fs::path& work) {
  E2EArtifacts art;
  art.dir = work / "e2e";
  fs::remove_all(art.dir);
  const auto start = Clock::now();

  PipelineOptions opts;
  opts.out_dir = art.dir.string();
  opts.stages = {"generate", "ingest", "comply", "featurize",
                 "train",    "predict", "evaluate", "ablate"};
  opts.synth.n_rows = 50000;
  opts.synth.seed = 4242;
  opts.train_cfg = default_experiment_config();
  opts.split_spec.seed = 4242;
  opts.command = "acceptance e2e";
  opts.config_hash = "fnv1a:acceptance";

  const PipelineResult result = run_pipeline(opts);
  art.elapsed = seconds_since(start);
  art.pipeline_ok = result.ok;
  if (!result.ok) {
    for (const auto& st : result.stages) {
      if (st.status == "failed") {
        art.shape_detail = "stage " + st.name + " failed: " + st.error;
      }
    }
    return art;
  }

  {
    std::ifstream meta(art.dir / "records.jsonl.meta.json");
    const nlohmann::json j = nlohmann::json::parse(meta);
    art.zero_fraction = j.at("zero_retweet_fraction").get<double>();
  }
  {
    std::ifstream in(art.dir / "ablation.json");
    const nlohmann::json j = nlohmann::json::parse(in);
    std::size_t finite_or_flagged = 0;
    for (const auto& row : j.at("rows")) {
      if (row.at("failed").get<bool>()) continue;
      const EvaluationReport rep = evaluation_report_from_json(row.at("metrics"));
      art.ablation[row.at("subset").get<std::string>()] = rep;
      art.max_abs_leaf[row.at("subset").get<std::string>()] =
          row.at("max_abs_leaf").get<double>();
      const bool sane = (std::isfinite(rep.spearman_r) || !rep.spearman_defined) &&
                        std::isfinite(rep.rmse) &&
                        (std::isfinite(rep.mape_value) || !rep.mape_defined);
      finite_or_flagged += sane;
    }
    art.shape_ok = j.at("rows").size() == 16 && art.ablation.size() == 16 &&
                   finite_or_flagged == 16 && art.ablation.count("Baseline") == 1;
    if (!art.shape_ok) art.shape_detail = "ablation report rows malformed";
  }
  return art;
}

void check_synthetic_e2e(const E2EArtifacts& art) {
  if (!art.pipeline_ok) {
    report("synthetic-e2e", false, art.shape_detail, art.elapsed);
    return;
  }
  const double actl = art.ablation.at("ACTL").spearman_r;
  const double baseline = art.ablation.at("Baseline").spearman_r;
  const double content = art.ablation.at("C").spearman_r;
  const bool zero_ok = art.zero_fraction >= 0.82 && art.zero_fraction <= 0.88;
  // headline correlations must clear the p < 0.001 reporting bar
  const bool p_ok = !art.ablation.at("ACTL").low_confidence &&
                    !art.ablation.at("C").low_confidence;
  const bool ok = zero_ok && p_ok && actl >= 0.60 && (actl - baseline) >= 0.10 &&
                  content > baseline && art.elapsed < 300.0;
  std::ostringstream detail;
  detail << "n=50000, zero mass " << art.zero_fraction << ", rho(ACTL)=" << actl
         << ", rho(C)=" << content << ", rho(Baseline)=" << baseline
         << (p_ok ? ", p<0.001" : ", p-value bar MISSED");
  report("synthetic-e2e", ok, detail.str(), art.elapsed);
}

void check_report_shape(const E2EArtifacts& art, const fs::path& work) {
  const auto start = Clock::now();
  if (!art.pipeline_ok || !art.shape_ok) {
    report("ablation-report-shape", false,
           art.shape_detail.empty() ? "pipeline failed" : art.shape_detail,
           seconds_since(start));
    return;
  }
  // byte-identical rerun with a fixed seed, desk-scale matrix
  SynthSpec spec;
  spec.n_rows = 3000;
  spec.seed = 99;
  const SynthOutput data = generate_records(spec);
  const LexiconSentiment sentiment;
  const FeatureMatrix m = extract(data.records, sentiment).matrix;
  SplitSpec split_spec;
  split_spec.seed = 7;
  TrainConfig cfg;
  cfg.num_trees = 40;
  cfg.max_leaves = 15;
  cfg.min_samples_leaf = 5;
  cfg.early_stopping_rounds = 10;
  const std::string once =
      ablation_report_to_json(run_ablation(m, split_spec, cfg, "fnv1a:rerun")).dump();
  const std::string twice =
      ablation_report_to_json(run_ablation(m, split_spec, cfg, "fnv1a:rerun")).dump();
  const bool ok = once == twice;
  std::ostringstream detail;
  detail << "16 rows, metrics finite or flagged, rerun bytes "
         << (ok ? "identical" : "DIFFER");
  report("ablation-report-shape", ok, detail.str(), seconds_since(start));
  (void)work;
}

void check_leaf_cap(const E2EArtifacts& art) {
  const auto start = Clock::now();
  if (!art.pipeline_ok) {
    report("leaf-cap", false, "pipeline failed", seconds_since(start));
    return;
  }
  bool ok = true;
  double worst = 0.0;
  std::size_t audited_leaves = 0;
  // model-file audit: walk every tree of every model JSON in the run dir
  std::function<void(const nlohmann::json&)> walk = [&](const nlohmann::json& node) {
    if (node.contains("value")) {
      const double v = node.at("value").get<double>();
      worst = std::max(worst, std::fabs(v));
      ++audited_leaves;
      if (std::fabs(v) > 1.5) ok = false;
      return;
    }
    walk(node.at("left"));
    walk(node.at("right"));
  };
  for (const auto& entry : fs::directory_iterator(art.dir)) {
    if (entry.path().extension() != ".json") continue;
    std::ifstream in(entry.path());
    const nlohmann::json j = nlohmann::json::parse(in);
    if (!j.is_object() || j.value("kind", "") != "gbrt-poisson") continue;
    for (const auto& tree : j.at("trees")) walk(tree);
  }
  // ablation-trained ensembles report their own audit
  for (const auto& [subset, mx] : art.max_abs_leaf) {
    worst = std::max(worst, mx);
    if (mx > 1.5) ok = false;
  }
  std::ostringstream detail;
  detail << audited_leaves << " model-file leaves + 16 ablation models, max |v| = "
         << worst;
  report("leaf-cap", ok && audited_leaves > 0, detail.str(), seconds_since(start));
}

void check_throughput(const E2EArtifacts& art) {
  const auto start = Clock::now();
  if (!art.pipeline_ok) {
    report("throughput-floor", false, "pipeline failed", seconds_since(start), true);
    return;
  }
  const FeatureMatrix m = load_feature_matrix((art.dir / "features.csv").string());
  const Ensemble model = load_ensemble((art.dir / "model.json").string());

  const auto t0 = Clock::now();
  const Predictions pred = predict(model, m);
  const double predict_rate = static_cast<double>(m.n_rows()) / seconds_since(t0);

  DocumentStore store((art.dir / "store").string());
  const Snapshot snap = store.snapshot();
  const LexiconSentiment sentiment;
  const auto t1 = Clock::now();
  const ExtractResult ex = extract(snap.records, sentiment);
  const double featurize_rate =
      static_cast<double>(snap.records.size()) / seconds_since(t1);

  const bool ok = predict_rate >= 100000.0 && featurize_rate >= 20000.0;
  std::ostringstream detail;
  detail << "predict " << static_cast<long>(predict_rate) << " rows/s (target 100k), "
         << "featurize " << static_cast<long>(featurize_rate)
         << " records/s (target 20k)";
  // soft target: constrained hardware reports a warning, not a failure
  report("throughput-floor", ok, detail.str(), seconds_since(start), true);
  (void)pred;
  (void)ex;
}

void check_eq10_fidelity(const E2EArtifacts& art) {
  const auto start = Clock::now();
  if (!art.pipeline_ok) {
    report("target-transform-fidelity", false, "pipeline failed", seconds_since(start));
    return;
  }
  std::map<std::string, std::int64_t> retweets;
  {
    std::ifstream in(art.dir / "records.jsonl");
    std::string line, err;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto rec = parse_tweet_record(line, err);
      if (rec) retweets[rec->id] = rec->retweet_total;
    }
  }
  const FeatureMatrix m = load_feature_matrix((art.dir / "features.csv").string());
  bool ok = m.n_rows() > 0;
  std::size_t checked = 0;
  for (std::size_t i = 0; i < m.n_rows(); ++i) {
    const auto it = retweets.find(m.row_ids[i]);
    if (it == retweets.end()) {
      ok = false;
      break;
    }
    if (m.target[i] != std::log1p(static_cast<double>(it->second))) {
      ok = false;
      break;
    }
    ++checked;
  }
  std::ostringstream detail;
  detail << checked << " rows, target == ln(retweet_total + 1) bit-exactly";
  report("target-transform-fidelity", ok, detail.str(), seconds_since(start));
}

}  // namespace

int main() {
  const fs::path work =
      fs::temp_directory_path() / ("virality-acceptance-" + std::to_string(::getpid()));
  fs::create_directories(work);

  check_gradient_oracle();
  check_split_oracles();
  check_spearman_oracle();
  check_monotone_loss();
  check_compliance_safety(work);

  const E2EArtifacts art = run_e2e(work);
  check_synthetic_e2e(art);
  check_report_shape(art, work);
  check_leaf_cap(art);
  check_throughput(art);
  check_eq10_fidelity(art);

  fs::remove_all(work);
  if (g_failures > 0) {
    std::printf("%d criterion(s) failed\n", g_failures);
    return 1;
  }
  std::printf("all acceptance criteria passed\n");
  return 0;
}
