#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "virality/kvconfig.hpp"
#include "virality/record.hpp"
#include "virality/rng.hpp"
#include "virality/sentiment.hpp"
#include "virality/timeutil.hpp"

namespace virality {

// Synthetic corpus spec. retweet_total is drawn Poisson(lambda) with
// ln(lambda) a linear function of author and content features plus Gaussian
// noise. Default coefficients put most of the signal in the content block
// (media/hashtags/urls/quote) with a secondary author block (listed count,
// verified), temporal and language left as noise; the intercept pins the
// zero-retweet mass near 83%.
struct SynthSpec {
  std::size_t n_rows = 1000;
  std::uint64_t seed = 1;

  double intercept = -10.0;
  double coef_log_listed = 1.3;
  double coef_log_followers = 0.35;
  double coef_verified = 1.5;
  double coef_media = 5.0;
  double coef_hashtags = 0.5;
  double coef_urls = 0.6;
  double coef_quote = 0.8;
  double coef_mention = -0.3;
  double coef_sentiment = 0.0;   // applied to 2*(sentiment-0.5)
  double coef_posted_hour = 0.0; // applied to (hour-11.5)/12
  double noise_sd = 0.15;

  double deletion_fraction = 0.01;  // share of rows targeted by compliance file

  void validate() const {
    if (n_rows < 1) throw std::invalid_argument("generate: n_rows must be >= 1");
    for (const double c :
         {intercept, coef_log_listed, coef_log_followers, coef_verified, coef_media,
          coef_hashtags, coef_urls, coef_quote, coef_mention, coef_sentiment,
          coef_posted_hour, noise_sd}) {
      if (!std::isfinite(c)) throw std::invalid_argument("generate: non-finite coefficient");
    }
    if (noise_sd < 0.0 || deletion_fraction < 0.0 || deletion_fraction >= 1.0) {
      throw std::invalid_argument("generate: noise_sd/deletion_fraction out of range");
    }
  }
};

struct SynthOutput {
  std::vector<TweetRecord> records;
  std::vector<ComplianceRequest> compliance;
  std::size_t zero_retweets = 0;
};

namespace detail {

constexpr std::int64_t kSynthEpochBase = 1483228800;  // 2017-01-01T00:00:00Z

struct AuthorProfile {
  std::string id;
  std::int64_t followers = 0;
  std::int64_t friends = 0;
  std::int64_t statuses = 0;
  std::int64_t favorites = 0;
  std::int64_t listed = 0;
  bool verified = false;
  std::int64_t created_at = 0;
};

inline AuthorProfile make_author(std::uint64_t seed, std::size_t index) {
  Rng rng(mix_seed(seed, 0xA000000ULL + index));
  AuthorProfile a;
  char buf[24];
  std::snprintf(buf, sizeof(buf), "u%07zu", index);
  a.id = buf;
  a.followers = static_cast<std::int64_t>(std::floor(std::exp(4.5 + 2.0 * rng.next_normal())));
  a.friends = static_cast<std::int64_t>(std::floor(std::exp(4.0 + 1.5 * rng.next_normal())));
  a.statuses = 1 + static_cast<std::int64_t>(std::floor(std::exp(5.0 + 1.8 * rng.next_normal())));
  a.favorites = static_cast<std::int64_t>(std::floor(std::exp(3.5 + 1.8 * rng.next_normal())));
  a.listed = static_cast<std::int64_t>(std::floor(std::exp(1.5 + 1.6 * rng.next_normal())));
  a.verified = rng.next_bernoulli(0.06);
  a.created_at = kSynthEpochBase - static_cast<std::int64_t>(rng.next_uniform(30.0, 3650.0)) * 86400;
  return a;
}

inline int pick_weighted(Rng& rng, const std::vector<double>& weights) {
  double u = rng.next_double();
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (u < weights[i]) return static_cast<int>(i);
    u -= weights[i];
  }
  return static_cast<int>(weights.size()) - 1;
}

inline std::string_view pick_language(Rng& rng) {
  struct LangWeight {
    std::string_view code;
    double w;
  };
  static const std::array<LangWeight, 18> mix = {{
      {"en", 0.40}, {"es", 0.10}, {"pt", 0.07}, {"ja", 0.07}, {"ar", 0.05},
      {"fr", 0.05}, {"de", 0.04}, {"it", 0.03}, {"tr", 0.03}, {"ru", 0.03},
      {"nl", 0.02}, {"pl", 0.02}, {"sv", 0.02}, {"zh", 0.01}, {"da", 0.015},
      {"fi", 0.015}, {"no", 0.015}, {"el", 0.015},
  }};
  double u = rng.next_double();
  for (const auto& lw : mix) {
    if (u < lw.w) return lw.code;
    u -= lw.w;
  }
  return "en";
}

inline std::string make_text(Rng& rng, std::string_view lang, int polarity) {
  static const std::array<std::string_view, 14> fillers = {
      "just", "posting", "an", "update", "about", "the", "new", "game",
      "from", "this", "morning", "with", "friends", "online"};
  std::string text;
  const int n_fill = 2 + static_cast<int>(rng.next_below(5));
  for (int i = 0; i < n_fill; ++i) {
    if (!text.empty()) text += ' ';
    text += fillers[rng.next_below(fillers.size())];
  }
  if (polarity != 0) {
    const auto words = LexiconSentiment::words(lang, polarity);
    const int n_words = 1 + static_cast<int>(rng.next_below(2));
    for (int i = 0; i < n_words; ++i) {
      text += ' ';
      text += words[rng.next_below(words.size())];
    }
    if (rng.next_bernoulli(0.15)) {
      const auto opposite = LexiconSentiment::words(lang, -polarity);
      text += ' ';
      text += opposite[rng.next_below(opposite.size())];
    }
  }
  return text;
}

}  // namespace detail

inline SynthOutput generate_records(const SynthSpec& spec) {
  spec.validate();
  const LexiconSentiment sentiment;
  SynthOutput out;
  out.records.reserve(spec.n_rows);

  const std::size_t author_pool = std::max<std::size_t>(spec.n_rows / 5, 1);
  std::unordered_map<std::size_t, detail::AuthorProfile> authors;

  Rng rng(mix_seed(spec.seed, 0x5EED));
  static const std::vector<double> mention_w = {0.60, 0.25, 0.10, 0.05};
  static const std::vector<double> hashtag_w = {0.50, 0.25, 0.12, 0.07, 0.04, 0.02};
  static const std::vector<double> media_w = {0.80, 0.12, 0.05, 0.03};
  static const std::vector<double> url_w = {0.70, 0.25, 0.05};
  static const std::vector<double> symbol_w = {0.90, 0.08, 0.02};

  for (std::size_t i = 0; i < spec.n_rows; ++i) {
    const std::size_t author_idx = rng.next_below(author_pool);
    auto it = authors.find(author_idx);
    if (it == authors.end()) {
      it = authors.emplace(author_idx, detail::make_author(spec.seed, author_idx)).first;
    }
    const detail::AuthorProfile& a = it->second;

    TweetRecord r;
    char buf[24];
    std::snprintf(buf, sizeof(buf), "t%08zu", i);
    r.id = buf;
    r.author_id = a.id;
    r.followers_count = a.followers;
    r.friends_count = a.friends;
    r.statuses_count = a.statuses;
    r.actor_favorites_count = a.favorites;
    r.actor_listed_count = a.listed;
    r.actor_verified = a.verified;
    r.account_created_at = a.created_at;
    r.posted_at = detail::kSynthEpochBase +
                  static_cast<std::int64_t>(rng.next_uniform(0.0, 365.0 * 86400.0));
    r.is_quote = rng.next_bernoulli(0.15);
    r.mention_count = detail::pick_weighted(rng, mention_w);
    r.hashtags_count = detail::pick_weighted(rng, hashtag_w);
    r.media_count = detail::pick_weighted(rng, media_w);
    r.url_count = detail::pick_weighted(rng, url_w);
    r.symbol_count = detail::pick_weighted(rng, symbol_w);
    const std::string_view lang = detail::pick_language(rng);
    r.language_code = lang;
    const int polarity =
        rng.next_bernoulli(0.5) ? 0 : (rng.next_bernoulli(0.5) ? 1 : -1);
    r.text = detail::make_text(rng, lang, polarity);

    const double sentiment_value = sentiment.score(r.text, r.language_code);
    const double hour =
        static_cast<double>(civil_from_epoch(r.posted_at).hour);
    const double score =
        spec.intercept +
        spec.coef_log_listed * std::log1p(static_cast<double>(r.actor_listed_count)) +
        spec.coef_log_followers * std::log1p(static_cast<double>(r.followers_count)) +
        spec.coef_verified * (r.actor_verified ? 1.0 : 0.0) +
        spec.coef_media * static_cast<double>(r.media_count) +
        spec.coef_hashtags * static_cast<double>(r.hashtags_count) +
        spec.coef_urls * static_cast<double>(r.url_count) +
        spec.coef_quote * (r.is_quote ? 1.0 : 0.0) +
        spec.coef_mention * static_cast<double>(r.mention_count) +
        spec.coef_sentiment * 2.0 * (sentiment_value - 0.5) +
        spec.coef_posted_hour * ((hour - 11.5) / 12.0) +
        spec.noise_sd * rng.next_normal();
    const double lambda = std::exp(std::clamp(score, -30.0, 12.0));
    r.retweet_total = rng.next_poisson(lambda);
    r.favorite_total = rng.next_poisson(2.0 * lambda + 0.05);
    if (r.retweet_total == 0) ++out.zero_retweets;
    out.records.push_back(std::move(r));
  }

  // Compliance stream: mostly single-status deletions plus a few account
  // removals, mirroring how the corpus would shrink in production.
  const auto n_del = static_cast<std::size_t>(
      std::floor(spec.deletion_fraction * static_cast<double>(spec.n_rows)));
  Rng del_rng(mix_seed(spec.seed, 0xDE1));
  for (std::size_t k = 0; k < n_del; ++k) {
    ComplianceRequest req;
    const std::size_t row = del_rng.next_below(spec.n_rows);
    if (del_rng.next_bernoulli(0.9)) {
      req.kind = ComplianceRequest::Kind::delete_status;
      req.target_id = out.records[row].id;
    } else {
      req.kind = ComplianceRequest::Kind::delete_user;
      req.target_id = out.records[row].author_id;
    }
    req.received_at = detail::kSynthEpochBase + 366 * 86400 + static_cast<std::int64_t>(k);
    out.compliance.push_back(std::move(req));
  }
  return out;
}

struct SynthFileStats {
  std::size_t rows = 0;
  std::size_t zero_retweets = 0;
  std::size_t compliance_requests = 0;
};

// Writes the records as JSONL plus a `.meta.json` sidecar; optionally a
// compliance request file alongside.
inline SynthFileStats generate_file(const SynthSpec& spec, const std::string& out_path,
                                    const std::string& compliance_path,
                                    const std::string& command,
                                    const std::string& config_hash) {
  const SynthOutput data = generate_records(spec);
  {
    std::ofstream out(out_path, std::ios::trunc | std::ios::binary);
    if (!out) throw std::runtime_error("cannot write: " + out_path);
    for (const auto& r : data.records) out << tweet_record_to_json(r).dump() << "\n";
  }
  if (!compliance_path.empty()) {
    std::ofstream out(compliance_path, std::ios::trunc | std::ios::binary);
    if (!out) throw std::runtime_error("cannot write: " + compliance_path);
    for (const auto& req : data.compliance) {
      out << compliance_request_to_json(req).dump() << "\n";
    }
    nlohmann::ordered_json cmeta;
    cmeta["version"] = 1;
    cmeta["command"] = command;
    cmeta["config_hash"] = config_hash;
    cmeta["requests"] = data.compliance.size();
    std::ofstream cside(compliance_path + ".meta.json", std::ios::trunc | std::ios::binary);
    cside << cmeta.dump(2) << "\n";
  }
  nlohmann::ordered_json meta;
  meta["version"] = 1;
  meta["command"] = command;
  meta["config_hash"] = config_hash;
  meta["rows"] = data.records.size();
  meta["seed"] = spec.seed;
  meta["zero_retweet_fraction"] =
      static_cast<double>(data.zero_retweets) / static_cast<double>(data.records.size());
  meta["compliance_requests"] = data.compliance.size();
  std::ofstream side(out_path + ".meta.json", std::ios::trunc | std::ios::binary);
  side << meta.dump(2) << "\n";
  return {data.records.size(), data.zero_retweets, data.compliance.size()};
}

// Maps kv-config overrides (coef_*, noise_sd, ...) onto a SynthSpec.
inline SynthSpec synth_spec_from_kv(const KvConfig& kv, SynthSpec base = {}) {
  base.n_rows = static_cast<std::size_t>(kv.get_int("rows", static_cast<std::int64_t>(base.n_rows)));
  base.seed = static_cast<std::uint64_t>(kv.get_int("seed", static_cast<std::int64_t>(base.seed)));
  base.intercept = kv.get_double("intercept", base.intercept);
  base.coef_log_listed = kv.get_double("coef_log_listed", base.coef_log_listed);
  base.coef_log_followers = kv.get_double("coef_log_followers", base.coef_log_followers);
  base.coef_verified = kv.get_double("coef_verified", base.coef_verified);
  base.coef_media = kv.get_double("coef_media", base.coef_media);
  base.coef_hashtags = kv.get_double("coef_hashtags", base.coef_hashtags);
  base.coef_urls = kv.get_double("coef_urls", base.coef_urls);
  base.coef_quote = kv.get_double("coef_quote", base.coef_quote);
  base.coef_mention = kv.get_double("coef_mention", base.coef_mention);
  base.coef_sentiment = kv.get_double("coef_sentiment", base.coef_sentiment);
  base.coef_posted_hour = kv.get_double("coef_posted_hour", base.coef_posted_hour);
  base.noise_sd = kv.get_double("noise_sd", base.noise_sd);
  base.deletion_fraction = kv.get_double("deletion_fraction", base.deletion_fraction);
  return base;
}

}  // namespace virality
