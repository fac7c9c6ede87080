#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

#include "virality/timeutil.hpp"

namespace virality {

// The 18 language codes the sentiment service covers, alphabetical. The
// position of a code in this table is its languageIndex feature code.
inline constexpr std::array<std::string_view, 18> kSupportedLanguages = {
    "ar", "da", "de", "el", "en", "es", "fi", "fr", "it",
    "ja", "nl", "no", "pl", "pt", "ru", "sv", "tr", "zh"};

inline int language_index(std::string_view code) {
  for (std::size_t i = 0; i < kSupportedLanguages.size(); ++i) {
    if (kSupportedLanguages[i] == code) return static_cast<int>(i);
  }
  return -1;
}

// One ingested tweet document. Engagement totals are the all-time counts
// fetched at acquisition, not live counters; retweet_total is the label
// source.
struct TweetRecord {
  std::string id;
  std::string author_id;
  std::int64_t followers_count = 0;
  std::int64_t friends_count = 0;
  std::int64_t statuses_count = 0;
  std::int64_t actor_favorites_count = 0;
  std::int64_t actor_listed_count = 0;
  bool actor_verified = false;
  std::int64_t account_created_at = 0;  // UTC epoch seconds
  std::int64_t posted_at = 0;           // UTC epoch seconds
  bool is_quote = false;
  std::int64_t mention_count = 0;
  std::int64_t hashtags_count = 0;
  std::int64_t media_count = 0;
  std::int64_t url_count = 0;
  std::int64_t symbol_count = 0;
  std::string language_code;
  std::string text;
  std::int64_t retweet_total = 0;
  std::int64_t favorite_total = 0;

  bool operator==(const TweetRecord&) const = default;
};

// Platform-issued deletion directive. delete_status targets a document id,
// delete_user an author id.
struct ComplianceRequest {
  enum class Kind { delete_status, delete_user };
  Kind kind = Kind::delete_status;
  std::string target_id;
  std::int64_t received_at = 0;

  bool operator==(const ComplianceRequest&) const = default;
};

namespace detail {

inline std::optional<std::int64_t> count_field(const nlohmann::json& j,
                                               const char* key,
                                               std::string& err) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_number_integer()) {
    err = std::string("missing or non-integer field '") + key + "'";
    return std::nullopt;
  }
  const std::int64_t v = it->get<std::int64_t>();
  if (v < 0) {
    err = std::string("negative count field '") + key + "'";
    return std::nullopt;
  }
  return v;
}

inline std::optional<std::string> string_field(const nlohmann::json& j,
                                               const char* key,
                                               std::string& err) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_string()) {
    err = std::string("missing or non-string field '") + key + "'";
    return std::nullopt;
  }
  return it->get<std::string>();
}

inline std::optional<std::int64_t> time_field(const nlohmann::json& j,
                                              const char* key,
                                              std::string& err) {
  const auto raw = string_field(j, key, err);
  if (!raw) return std::nullopt;
  const auto t = parse_rfc3339(*raw);
  if (!t) {
    err = std::string("field '") + key + "' is not an RFC 3339 timestamp: " + *raw;
    return std::nullopt;
  }
  return t;
}

inline std::optional<bool> bool_field(const nlohmann::json& j, const char* key,
                                      std::string& err) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_boolean()) {
    err = std::string("missing or non-boolean field '") + key + "'";
    return std::nullopt;
  }
  return it->get<bool>();
}

}  // namespace detail

// Parses one JSONL line into a TweetRecord, enforcing the schema invariants
// (non-negative counts, supported language, posted_at >= account_created_at).
// On failure returns nullopt with the reason in `err`.
inline std::optional<TweetRecord> parse_tweet_record(std::string_view line,
                                                     std::string& err) {
  nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    err = "not a JSON object";
    return std::nullopt;
  }
  using namespace detail;
  TweetRecord r;
  auto id = string_field(j, "id", err);
  if (!id) return std::nullopt;
  if (id->empty()) {
    err = "empty id";
    return std::nullopt;
  }
  r.id = *id;
  auto author = string_field(j, "author_id", err);
  if (!author) return std::nullopt;
  if (author->empty()) {
    err = "empty author_id";
    return std::nullopt;
  }
  r.author_id = *author;

  struct CountSlot {
    const char* key;
    std::int64_t TweetRecord::*member;
  };
  static constexpr CountSlot counts[] = {
      {"followers_count", &TweetRecord::followers_count},
      {"friends_count", &TweetRecord::friends_count},
      {"statuses_count", &TweetRecord::statuses_count},
      {"actor_favorites_count", &TweetRecord::actor_favorites_count},
      {"actor_listed_count", &TweetRecord::actor_listed_count},
      {"mention_count", &TweetRecord::mention_count},
      {"hashtags_count", &TweetRecord::hashtags_count},
      {"media_count", &TweetRecord::media_count},
      {"url_count", &TweetRecord::url_count},
      {"symbol_count", &TweetRecord::symbol_count},
      {"retweet_total", &TweetRecord::retweet_total},
      {"favorite_total", &TweetRecord::favorite_total},
  };
  for (const auto& slot : counts) {
    auto v = count_field(j, slot.key, err);
    if (!v) return std::nullopt;
    r.*slot.member = *v;
  }

  auto verified = bool_field(j, "actor_verified", err);
  if (!verified) return std::nullopt;
  r.actor_verified = *verified;
  auto quote = bool_field(j, "is_quote", err);
  if (!quote) return std::nullopt;
  r.is_quote = *quote;

  auto created = time_field(j, "account_created_at", err);
  if (!created) return std::nullopt;
  r.account_created_at = *created;
  auto posted = time_field(j, "posted_at", err);
  if (!posted) return std::nullopt;
  r.posted_at = *posted;
  if (r.posted_at < r.account_created_at) {
    err = "posted_at precedes account_created_at";
    return std::nullopt;
  }

  auto lang = string_field(j, "language_code", err);
  if (!lang) return std::nullopt;
  if (language_index(*lang) < 0) {
    err = "unsupported language_code: " + *lang;
    return std::nullopt;
  }
  r.language_code = *lang;

  auto text = string_field(j, "text", err);
  if (!text) return std::nullopt;
  r.text = *text;
  return r;
}

inline nlohmann::ordered_json tweet_record_to_json(const TweetRecord& r) {
  nlohmann::ordered_json j;
  j["id"] = r.id;
  j["author_id"] = r.author_id;
  j["followers_count"] = r.followers_count;
  j["friends_count"] = r.friends_count;
  j["statuses_count"] = r.statuses_count;
  j["actor_favorites_count"] = r.actor_favorites_count;
  j["actor_listed_count"] = r.actor_listed_count;
  j["actor_verified"] = r.actor_verified;
  j["account_created_at"] = format_rfc3339(r.account_created_at);
  j["posted_at"] = format_rfc3339(r.posted_at);
  j["is_quote"] = r.is_quote;
  j["mention_count"] = r.mention_count;
  j["hashtags_count"] = r.hashtags_count;
  j["media_count"] = r.media_count;
  j["url_count"] = r.url_count;
  j["symbol_count"] = r.symbol_count;
  j["language_code"] = r.language_code;
  j["text"] = r.text;
  j["retweet_total"] = r.retweet_total;
  j["favorite_total"] = r.favorite_total;
  return j;
}

inline std::optional<ComplianceRequest> parse_compliance_request(
    std::string_view line, std::string& err) {
  nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    err = "not a JSON object";
    return std::nullopt;
  }
  using namespace detail;
  ComplianceRequest req;
  auto kind = string_field(j, "kind", err);
  if (!kind) return std::nullopt;
  if (*kind == "delete_status") {
    req.kind = ComplianceRequest::Kind::delete_status;
  } else if (*kind == "delete_user") {
    req.kind = ComplianceRequest::Kind::delete_user;
  } else {
    err = "unknown kind: " + *kind;
    return std::nullopt;
  }
  auto target = string_field(j, "target_id", err);
  if (!target) return std::nullopt;
  if (target->empty()) {
    err = "empty target_id";
    return std::nullopt;
  }
  req.target_id = *target;
  auto received = time_field(j, "received_at", err);
  if (!received) return std::nullopt;
  req.received_at = *received;
  return req;
}

inline nlohmann::ordered_json compliance_request_to_json(const ComplianceRequest& r) {
  nlohmann::ordered_json j;
  j["kind"] = r.kind == ComplianceRequest::Kind::delete_status ? "delete_status"
                                                               : "delete_user";
  j["target_id"] = r.target_id;
  j["received_at"] = format_rfc3339(r.received_at);
  return j;
}

}  // namespace virality
