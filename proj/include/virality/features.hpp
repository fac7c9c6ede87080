#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "virality/parallel.hpp"
#include "virality/record.hpp"
#include "virality/sentiment.hpp"
#include "virality/timeutil.hpp"

namespace virality {

enum class Modality : std::uint8_t { author, content, temporal, language };

inline char modality_tag(Modality m) {
  switch (m) {
    case Modality::author: return 'A';
    case Modality::content: return 'C';
    case Modality::temporal: return 'T';
    case Modality::language: return 'L';
  }
  return '?';
}

inline Modality modality_from_tag(char c) {
  switch (c) {
    case 'A': return Modality::author;
    case 'C': return Modality::content;
    case 'T': return Modality::temporal;
    case 'L': return Modality::language;
    default: throw std::invalid_argument(std::string("unknown modality tag: ") + c);
  }
}

enum class ColumnKind : std::uint8_t { ordinal, categorical, continuous };

inline const char* column_kind_name(ColumnKind k) {
  switch (k) {
    case ColumnKind::ordinal: return "ordinal";
    case ColumnKind::categorical: return "categorical";
    case ColumnKind::continuous: return "continuous";
  }
  return "?";
}

inline ColumnKind column_kind_from_name(std::string_view s) {
  if (s == "ordinal") return ColumnKind::ordinal;
  if (s == "categorical") return ColumnKind::categorical;
  if (s == "continuous") return ColumnKind::continuous;
  throw std::invalid_argument("unknown column kind: " + std::string(s));
}

struct FeatureColumn {
  std::string name;
  Modality modality = Modality::author;
  ColumnKind kind = ColumnKind::ordinal;
  std::string transform = "none";  // "none" | "log1p"
  int num_categories = 0;          // categorical only; codes are 0..num_categories-1
  std::vector<double> values;
};

// Columnar dataset: the fixed feature columns, the log-transformed target
// ln(retweet_total + 1), and the source document id per row.
struct FeatureMatrix {
  std::vector<FeatureColumn> columns;
  std::vector<double> target;
  std::vector<std::string> row_ids;

  std::size_t n_rows() const { return target.size(); }

  int column_index(std::string_view name) const {
    for (std::size_t i = 0; i < columns.size(); ++i) {
      if (columns[i].name == name) return static_cast<int>(i);
    }
    return -1;
  }

  const FeatureColumn& column(std::string_view name) const {
    const int idx = column_index(name);
    if (idx < 0) throw std::invalid_argument("no such column: " + std::string(name));
    return columns[static_cast<std::size_t>(idx)];
  }
};

namespace detail {

struct ColumnSpec {
  const char* name;
  Modality modality;
  ColumnKind kind;
  const char* transform;
  int num_categories;
};

// The fixed output schema of extract(): the feature table columns in order,
// then the two author ratio columns. Day-time buckets are UTC quarters of the
// day (night 0-5, morning 6-11, afternoon 12-17, evening 18-23).
inline constexpr ColumnSpec kColumnSpecs[] = {
    {"followersCount", Modality::author, ColumnKind::ordinal, "none", 0},
    {"friendsCount", Modality::author, ColumnKind::ordinal, "none", 0},
    {"accountAgeDays", Modality::author, ColumnKind::ordinal, "none", 0},
    {"statusesCount", Modality::author, ColumnKind::ordinal, "none", 0},
    {"actorFavoritesCount", Modality::author, ColumnKind::ordinal, "log1p", 0},
    {"actorListedCount", Modality::author, ColumnKind::ordinal, "log1p", 0},
    {"actorVerified", Modality::author, ColumnKind::categorical, "none", 2},
    {"attachmentCount", Modality::content, ColumnKind::ordinal, "none", 0},
    {"mentionCount", Modality::content, ColumnKind::ordinal, "none", 0},
    {"hashtagsCount", Modality::content, ColumnKind::ordinal, "none", 0},
    {"mediaCount", Modality::content, ColumnKind::ordinal, "none", 0},
    {"urlCount", Modality::content, ColumnKind::ordinal, "none", 0},
    {"isQuote", Modality::content, ColumnKind::categorical, "none", 2},
    {"languageIndex", Modality::language, ColumnKind::categorical, "none", 18},
    {"sentimentValue", Modality::language, ColumnKind::continuous, "none", 0},
    {"postedHour", Modality::temporal, ColumnKind::ordinal, "none", 0},
    {"postedDay", Modality::temporal, ColumnKind::ordinal, "none", 0},
    {"postedMonth", Modality::temporal, ColumnKind::ordinal, "none", 0},
    {"postedDayTime", Modality::temporal, ColumnKind::categorical, "none", 4},
    {"postedWeekDay", Modality::temporal, ColumnKind::categorical, "none", 7},
    {"tweetsPerDay", Modality::author, ColumnKind::continuous, "none", 0},
    {"followersPerStatus", Modality::author, ColumnKind::continuous, "none", 0},
};

inline constexpr std::size_t kColumnCount = std::size(kColumnSpecs);

}  // namespace detail

struct RowRejection {
  std::string id;
  std::string reason;
};

struct ExtractResult {
  FeatureMatrix matrix;
  std::vector<RowRejection> rejected;
};

// Transforms a record snapshot into the fixed-schema FeatureMatrix. Pure over
// its input; rows are processed independently and the output row order is the
// input order (snapshots are already id-sorted).
inline ExtractResult extract(const std::vector<TweetRecord>& records,
                             const SentimentProvider& sentiment, int threads = 0) {
  ExtractResult out;
  FeatureMatrix& m = out.matrix;
  m.columns.reserve(detail::kColumnCount);
  for (const auto& spec : detail::kColumnSpecs) {
    FeatureColumn col;
    col.name = spec.name;
    col.modality = spec.modality;
    col.kind = spec.kind;
    col.transform = spec.transform;
    col.num_categories = spec.num_categories;
    m.columns.push_back(std::move(col));
  }

  std::vector<std::string> reject_reason(records.size());
  std::vector<std::uint8_t> ok(records.size(), 0);
  std::vector<std::array<double, detail::kColumnCount>> rows(records.size());
  std::vector<double> targets(records.size());

  parallel_for(records.size(), threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const TweetRecord& r = records[i];
      const int lang = language_index(r.language_code);
      if (lang < 0) {
        reject_reason[i] = "unsupported language_code: " + r.language_code;
        continue;
      }
      const std::int64_t neg_check =
          std::min({r.followers_count, r.friends_count, r.statuses_count,
                    r.actor_favorites_count, r.actor_listed_count, r.mention_count,
                    r.hashtags_count, r.media_count, r.url_count, r.symbol_count,
                    r.retweet_total, r.favorite_total});
      if (neg_check < 0) {
        reject_reason[i] = "negative count field";
        continue;
      }
      if (r.posted_at < r.account_created_at) {
        reject_reason[i] = "posted_at precedes account_created_at";
        continue;
      }
      auto& row = rows[i];
      const double age_days =
          std::floor(static_cast<double>(r.posted_at - r.account_created_at) / 86400.0);
      const CivilTime posted = civil_from_epoch(r.posted_at);
      std::size_t c = 0;
      row[c++] = static_cast<double>(r.followers_count);
      row[c++] = static_cast<double>(r.friends_count);
      row[c++] = age_days;
      row[c++] = static_cast<double>(r.statuses_count);
      row[c++] = std::log1p(static_cast<double>(r.actor_favorites_count));
      row[c++] = std::log1p(static_cast<double>(r.actor_listed_count));
      row[c++] = r.actor_verified ? 1.0 : 0.0;
      row[c++] = static_cast<double>(r.mention_count + r.hashtags_count +
                                     r.media_count + r.url_count + r.symbol_count);
      row[c++] = static_cast<double>(r.mention_count);
      row[c++] = static_cast<double>(r.hashtags_count);
      row[c++] = static_cast<double>(r.media_count);
      row[c++] = static_cast<double>(r.url_count);
      row[c++] = r.is_quote ? 1.0 : 0.0;
      row[c++] = static_cast<double>(lang);
      row[c++] = sentiment.score(r.text, r.language_code);
      row[c++] = static_cast<double>(posted.hour);
      row[c++] = static_cast<double>(posted.day);
      row[c++] = static_cast<double>(posted.month);
      row[c++] = static_cast<double>(posted.hour / 6);
      row[c++] = static_cast<double>(weekday_from_epoch(r.posted_at));
      row[c++] = static_cast<double>(r.statuses_count) / std::max(age_days, 1.0);
      row[c++] = static_cast<double>(r.followers_count) /
                 static_cast<double>(std::max<std::int64_t>(r.statuses_count, 1));
      targets[i] = std::log1p(static_cast<double>(r.retweet_total));
      ok[i] = 1;
    }
  });

  std::size_t n_ok = 0;
  for (auto flag : ok) n_ok += flag;
  for (auto& col : m.columns) col.values.reserve(n_ok);
  m.target.reserve(n_ok);
  m.row_ids.reserve(n_ok);
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (!ok[i]) {
      out.rejected.push_back({records[i].id, reject_reason[i]});
      continue;
    }
    for (std::size_t c = 0; c < detail::kColumnCount; ++c) {
      m.columns[c].values.push_back(rows[i][c]);
    }
    m.target.push_back(targets[i]);
    m.row_ids.push_back(records[i].id);
  }
  return out;
}

struct PearsonEntry {
  std::string name;
  double r = 0.0;
  bool degenerate = false;  // constant column, correlation reported as 0
};

// Sample Pearson coefficient of each column against the target. Categorical
// columns are correlated through their integer codes.
inline std::vector<PearsonEntry> pearson_report(const FeatureMatrix& m) {
  const std::size_t n = m.n_rows();
  if (n < 2) throw std::invalid_argument("pearson_report: need at least 2 rows");
  const double t_mean =
      std::accumulate(m.target.begin(), m.target.end(), 0.0) / static_cast<double>(n);
  double t_var = 0.0;
  for (double t : m.target) t_var += (t - t_mean) * (t - t_mean);
  if (t_var == 0.0) throw std::invalid_argument("pearson_report: constant target");

  std::vector<PearsonEntry> report;
  report.reserve(m.columns.size());
  for (const auto& col : m.columns) {
    PearsonEntry e;
    e.name = col.name;
    const double x_mean =
        std::accumulate(col.values.begin(), col.values.end(), 0.0) /
        static_cast<double>(n);
    double x_var = 0.0, cov = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double dx = col.values[i] - x_mean;
      x_var += dx * dx;
      cov += dx * (m.target[i] - t_mean);
    }
    if (x_var == 0.0) {
      e.degenerate = true;
      e.r = 0.0;
    } else {
      e.r = cov / std::sqrt(x_var * t_var);
      e.r = std::clamp(e.r, -1.0, 1.0);
    }
    report.push_back(std::move(e));
  }
  return report;
}

// Restricts the matrix to columns whose modality is in `subset`; target and
// row ids are unchanged.
inline FeatureMatrix select_modalities(const FeatureMatrix& m,
                                       const std::set<Modality>& subset) {
  if (subset.empty()) {
    throw std::invalid_argument("select_modalities: empty modality subset");
  }
  FeatureMatrix out;
  out.target = m.target;
  out.row_ids = m.row_ids;
  for (const auto& col : m.columns) {
    if (subset.count(col.modality)) out.columns.push_back(col);
  }
  return out;
}

// Restricts the matrix to a fixed list of columns by name (the single-feature
// baseline uses this).
inline FeatureMatrix select_columns(const FeatureMatrix& m,
                                    const std::vector<std::string>& names) {
  FeatureMatrix out;
  out.target = m.target;
  out.row_ids = m.row_ids;
  for (const auto& name : names) out.columns.push_back(m.column(name));
  return out;
}

namespace detail {

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace detail

// Feature file format: CSV (row_id, one column per feature, target) plus a
// JSON sidecar `<path>.schema.json` describing the columns. Doubles are
// written with 17 significant digits so the round trip is bit-exact.
inline void save_feature_matrix(const FeatureMatrix& m, const std::string& path,
                                const std::string& command,
                                const std::string& config_hash,
                                const std::string& provider_version) {
  std::ofstream out(path, std::ios::trunc | std::ios::binary);
  if (!out) throw std::runtime_error("cannot write feature file: " + path);
  out << "row_id";
  for (const auto& col : m.columns) out << ',' << col.name;
  out << ",target\n";
  for (std::size_t i = 0; i < m.n_rows(); ++i) {
    out << m.row_ids[i];
    for (const auto& col : m.columns) out << ',' << detail::format_double(col.values[i]);
    out << ',' << detail::format_double(m.target[i]) << '\n';
  }
  out.close();

  nlohmann::ordered_json schema;
  schema["version"] = 1;
  schema["command"] = command;
  schema["config_hash"] = config_hash;
  schema["sentiment_provider"] = provider_version;
  schema["row_count"] = m.n_rows();
  auto cols = nlohmann::ordered_json::array();
  for (const auto& col : m.columns) {
    nlohmann::ordered_json c;
    c["name"] = col.name;
    c["modality"] = std::string(1, modality_tag(col.modality));
    c["kind"] = column_kind_name(col.kind);
    c["transform"] = col.transform;
    c["num_categories"] = col.num_categories;
    cols.push_back(std::move(c));
  }
  schema["columns"] = std::move(cols);
  schema["target"] = {{"name", "target"},
                      {"transform", "log1p"},
                      {"source", "retweet_total"}};
  std::ofstream side(path + ".schema.json", std::ios::trunc | std::ios::binary);
  if (!side) throw std::runtime_error("cannot write schema sidecar for: " + path);
  side << schema.dump(2) << "\n";
}

inline FeatureMatrix load_feature_matrix(const std::string& path) {
  std::ifstream side(path + ".schema.json", std::ios::binary);
  if (!side) throw std::runtime_error("missing schema sidecar for: " + path);
  nlohmann::json schema = nlohmann::json::parse(side);

  FeatureMatrix m;
  for (const auto& c : schema.at("columns")) {
    FeatureColumn col;
    col.name = c.at("name").get<std::string>();
    const std::string tag = c.at("modality").get<std::string>();
    if (tag.size() != 1) throw std::runtime_error("bad modality tag in sidecar");
    col.modality = modality_from_tag(tag[0]);
    col.kind = column_kind_from_name(c.at("kind").get<std::string>());
    col.transform = c.at("transform").get<std::string>();
    col.num_categories = c.at("num_categories").get<int>();
    m.columns.push_back(std::move(col));
  }

  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open feature file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty feature file: " + path);
  {
    std::ostringstream expected;
    expected << "row_id";
    for (const auto& col : m.columns) expected << ',' << col.name;
    expected << ",target";
    if (line != expected.str()) {
      throw std::runtime_error("feature file header does not match sidecar schema");
    }
  }
  const std::size_t ncols = m.columns.size();
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::size_t pos = line.find(',');
    if (pos == std::string::npos) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": malformed row");
    }
    m.row_ids.push_back(line.substr(0, pos));
    ++pos;
    for (std::size_t c = 0; c <= ncols; ++c) {
      char* end = nullptr;
      const double v = std::strtod(line.c_str() + pos, &end);
      if (end == line.c_str() + pos) {
        throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                 ": malformed numeric field");
      }
      if (c < ncols) {
        m.columns[c].values.push_back(v);
        if (*end != ',') {
          throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                   ": wrong field count");
        }
        pos = static_cast<std::size_t>(end - line.c_str()) + 1;
      } else {
        m.target.push_back(v);
        if (*end != '\0' && *end != '\r') {
          throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                   ": trailing data");
        }
      }
    }
  }
  return m;
}

}  // namespace virality
