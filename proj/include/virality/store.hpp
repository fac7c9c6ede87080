#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "virality/record.hpp"

namespace virality {

struct StoreOptions {
  // When true, compliance requests are remembered as standing bans: a record
  // ingested after a matching deletion request is rejected. Default follows
  // the request-application reading (no standing bans).
  bool standing_deletes = false;
  // Roll the active segment after this many appended events.
  std::size_t segment_roll_events = 100000;
};

struct IngestSummary {
  std::uint64_t accepted = 0;
  std::uint64_t rejected_duplicates = 0;
  std::uint64_t rejected_banned = 0;  // only nonzero with standing_deletes
};

struct ComplianceSummary {
  std::uint64_t deleted_documents = 0;
  std::uint64_t affected_authors = 0;
};

struct SnapshotFilter {
  std::optional<std::string> language_code;
  std::optional<std::int64_t> posted_from;  // inclusive
  std::optional<std::int64_t> posted_to;    // exclusive

  bool matches(const TweetRecord& r) const {
    if (language_code && r.language_code != *language_code) return false;
    if (posted_from && r.posted_at < *posted_from) return false;
    if (posted_to && r.posted_at >= *posted_to) return false;
    return true;
  }
};

struct Snapshot {
  std::vector<TweetRecord> records;  // sorted by id
  std::uint64_t sequence = 0;        // store sequence pinned at snapshot start
};

// Privacy-compliant persistent document store.
//
// Persistence is an append-only event log split into segment files
// (`seg-NNNNNN.jsonl`): `put` events carry a document, `del` events a
// compliance request that deleted at least one document. Queries are served
// from memory and mask deletions immediately; the bytes of deleted documents
// are physically eliminated when compact() rewrites the segments.
//
// Concurrency contract: per-document operations are atomic, snapshot observes
// a consistent cut (it pins the sequence number and copies under the same
// lock that writers take).
class DocumentStore {
 public:
  explicit DocumentStore(std::filesystem::path dir, StoreOptions opts = {})
      : dir_(std::move(dir)), opts_(opts) {
    std::filesystem::create_directories(dir_);
    replay();
  }

  ~DocumentStore() { flush(); }

  DocumentStore(const DocumentStore&) = delete;
  DocumentStore& operator=(const DocumentStore&) = delete;

  enum class IngestResult { accepted, duplicate, banned };

  IngestResult ingest_one(const TweetRecord& rec) {
    std::unique_lock lock(mu_);
    if (docs_.count(rec.id)) return IngestResult::duplicate;
    if (opts_.standing_deletes &&
        (banned_ids_.count(rec.id) || banned_authors_.count(rec.author_id))) {
      return IngestResult::banned;
    }
    const std::uint64_t seq = next_seq_++;
    append_put(seq, rec);
    insert_doc(seq, rec);
    return IngestResult::accepted;
  }

  IngestSummary ingest(const std::vector<TweetRecord>& records) {
    IngestSummary s;
    for (const auto& r : records) {
      switch (ingest_one(r)) {
        case IngestResult::accepted: ++s.accepted; break;
        case IngestResult::duplicate: ++s.rejected_duplicates; break;
        case IngestResult::banned: ++s.rejected_banned; break;
      }
    }
    flush();
    return s;
  }

  struct ApplyResult {
    std::uint64_t deleted = 0;
    std::string author;  // author whose documents were removed, if any
  };

  // Applies one deletion request. Requests that delete nothing leave the
  // store byte-identical (idempotence).
  ApplyResult apply_one(const ComplianceRequest& req) {
    std::unique_lock lock(mu_);
    ApplyResult result;
    std::vector<std::string> victims;
    if (req.kind == ComplianceRequest::Kind::delete_status) {
      auto it = docs_.find(req.target_id);
      if (it != docs_.end()) {
        victims.push_back(req.target_id);
        result.author = it->second.rec.author_id;
      }
    } else {
      auto it = author_index_.find(req.target_id);
      if (it != author_index_.end()) {
        victims.assign(it->second.begin(), it->second.end());
        std::sort(victims.begin(), victims.end());
        result.author = req.target_id;
      }
    }
    bool new_ban = false;
    if (opts_.standing_deletes) {
      if (req.kind == ComplianceRequest::Kind::delete_status) {
        new_ban = banned_ids_.insert(req.target_id).second;
      } else {
        new_ban = banned_authors_.insert(req.target_id).second;
      }
    }
    if (victims.empty() && !new_ban) return result;  // no-op, nothing persisted
    const std::uint64_t seq = next_seq_++;
    append_del(seq, req);
    for (const auto& id : victims) erase_doc(id);
    result.deleted = victims.size();
    return result;
  }

  ComplianceSummary apply_compliance(const std::vector<ComplianceRequest>& requests) {
    ComplianceSummary s;
    std::unordered_set<std::string> authors;
    for (const auto& req : requests) {
      const ApplyResult r = apply_one(req);
      s.deleted_documents += r.deleted;
      if (r.deleted > 0) authors.insert(r.author);
    }
    s.affected_authors = authors.size();
    flush();
    return s;
  }

  Snapshot snapshot(const SnapshotFilter& filter = {}) const {
    std::shared_lock lock(mu_);
    Snapshot snap;
    snap.sequence = next_seq_;
    snap.records.reserve(docs_.size());
    for (const auto& [id, entry] : docs_) {
      if (filter.matches(entry.rec)) snap.records.push_back(entry.rec);
    }
    std::sort(snap.records.begin(), snap.records.end(),
              [](const TweetRecord& a, const TweetRecord& b) { return a.id < b.id; });
    return snap;
  }

  std::size_t live_count() const {
    std::shared_lock lock(mu_);
    return docs_.size();
  }

  bool contains(const std::string& id) const {
    std::shared_lock lock(mu_);
    return docs_.count(id) != 0;
  }

  // Rewrites the segments so they hold only live documents (and standing
  // bans, when enabled). This is the point where deleted data physically
  // leaves the disk.
  void compact() {
    std::unique_lock lock(mu_);
    active_.close();
    std::vector<std::pair<std::uint64_t, nlohmann::ordered_json>> events;
    events.reserve(docs_.size());
    for (const auto& [id, entry] : docs_) {
      nlohmann::ordered_json e;
      e["seq"] = entry.seq;
      e["op"] = "put";
      e["doc"] = tweet_record_to_json(entry.rec);
      events.emplace_back(entry.seq, std::move(e));
    }
    if (opts_.standing_deletes) {
      for (const auto& [target, seq] : ban_seqs_) {
        nlohmann::ordered_json e;
        e["seq"] = seq;
        e["op"] = "del";
        e["kind"] = banned_ids_.count(target) ? "delete_status" : "delete_user";
        e["target_id"] = target;
        e["received_at"] = format_rfc3339(0);
        events.emplace_back(seq, std::move(e));
      }
    }
    std::sort(events.begin(), events.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });

    const std::filesystem::path tmp = dir_ / "compact.tmp";
    {
      std::ofstream out(tmp, std::ios::trunc | std::ios::binary);
      if (!out) throw std::runtime_error("store: cannot write " + tmp.string());
      for (const auto& [seq, e] : events) out << e.dump() << "\n";
    }
    for (const auto& p : segment_paths()) std::filesystem::remove(p);
    const std::filesystem::path target = dir_ / segment_name(1);
    std::filesystem::rename(tmp, target);
    active_index_ = events.empty() ? 0 : 1;
    active_events_ = events.size();
    if (events.empty()) std::filesystem::remove(target);
  }

  void flush() {
    std::unique_lock lock(mu_);
    if (active_.is_open()) active_.flush();
  }

  const std::filesystem::path& dir() const { return dir_; }

 private:
  struct DocEntry {
    TweetRecord rec;
    std::uint64_t seq = 0;
  };

  static std::string segment_name(std::uint64_t index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "seg-%06llu.jsonl",
                  static_cast<unsigned long long>(index));
    return buf;
  }

  std::vector<std::filesystem::path> segment_paths() const {
    std::vector<std::filesystem::path> out;
    for (const auto& entry : std::filesystem::directory_iterator(dir_)) {
      const std::string name = entry.path().filename().string();
      if (name.rfind("seg-", 0) == 0 && name.size() > 10 &&
          name.substr(name.size() - 6) == ".jsonl") {
        out.push_back(entry.path());
      }
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  void replay() {
    struct Event {
      std::uint64_t seq;
      nlohmann::json body;
    };
    std::vector<Event> events;
    std::uint64_t max_index = 0;
    for (const auto& path : segment_paths()) {
      const std::string name = path.filename().string();
      max_index = std::max<std::uint64_t>(
          max_index, std::strtoull(name.c_str() + 4, nullptr, 10));
      std::ifstream in(path, std::ios::binary);
      std::string line;
      while (std::getline(in, line)) {
        if (line.empty()) continue;
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.contains("seq") || !j.contains("op")) {
          throw std::runtime_error("store: corrupt event in " + path.string());
        }
        events.push_back({j["seq"].get<std::uint64_t>(), std::move(j)});
      }
    }
    std::stable_sort(events.begin(), events.end(),
                     [](const Event& a, const Event& b) { return a.seq < b.seq; });
    for (const auto& ev : events) {
      next_seq_ = std::max(next_seq_, ev.seq + 1);
      const std::string op = ev.body["op"].get<std::string>();
      if (op == "put") {
        std::string err;
        auto rec = parse_tweet_record(ev.body["doc"].dump(), err);
        if (!rec) throw std::runtime_error("store: corrupt document: " + err);
        if (!docs_.count(rec->id)) insert_doc(ev.seq, *rec);
      } else if (op == "del") {
        const std::string kind = ev.body["kind"].get<std::string>();
        const std::string target = ev.body["target_id"].get<std::string>();
        if (kind == "delete_status") {
          if (docs_.count(target)) erase_doc(target);
          if (opts_.standing_deletes && banned_ids_.insert(target).second) {
            ban_seqs_.emplace(target, ev.seq);
          }
        } else {
          auto it = author_index_.find(target);
          if (it != author_index_.end()) {
            std::vector<std::string> ids(it->second.begin(), it->second.end());
            for (const auto& id : ids) erase_doc(id);
          }
          if (opts_.standing_deletes && banned_authors_.insert(target).second) {
            ban_seqs_.emplace(target, ev.seq);
          }
        }
      } else {
        throw std::runtime_error("store: unknown event op: " + op);
      }
    }
    active_index_ = max_index;
    active_events_ = 0;
  }

  void insert_doc(std::uint64_t seq, const TweetRecord& rec) {
    author_index_[rec.author_id].insert(rec.id);
    docs_.emplace(rec.id, DocEntry{rec, seq});
  }

  void erase_doc(const std::string& id) {
    auto it = docs_.find(id);
    if (it == docs_.end()) return;
    auto ai = author_index_.find(it->second.rec.author_id);
    if (ai != author_index_.end()) {
      ai->second.erase(id);
      if (ai->second.empty()) author_index_.erase(ai);
    }
    docs_.erase(it);
  }

  void ensure_active_segment() {
    if (active_.is_open() && active_events_ < opts_.segment_roll_events) return;
    if (active_.is_open()) active_.close();
    ++active_index_;
    const std::filesystem::path path = dir_ / segment_name(active_index_);
    active_.open(path, std::ios::app | std::ios::binary);
    if (!active_) throw std::runtime_error("store: cannot open segment " + path.string());
    active_events_ = 0;
  }

  void append_put(std::uint64_t seq, const TweetRecord& rec) {
    ensure_active_segment();
    nlohmann::ordered_json e;
    e["seq"] = seq;
    e["op"] = "put";
    e["doc"] = tweet_record_to_json(rec);
    active_ << e.dump() << "\n";
    ++active_events_;
  }

  void append_del(std::uint64_t seq, const ComplianceRequest& req) {
    ensure_active_segment();
    nlohmann::ordered_json e;
    e["seq"] = seq;
    e["op"] = "del";
    e["kind"] = req.kind == ComplianceRequest::Kind::delete_status
                    ? "delete_status"
                    : "delete_user";
    e["target_id"] = req.target_id;
    e["received_at"] = format_rfc3339(req.received_at);
    active_ << e.dump() << "\n";
    ++active_events_;
    if (opts_.standing_deletes) ban_seqs_.emplace(req.target_id, seq);
  }

  std::filesystem::path dir_;
  StoreOptions opts_;
  mutable std::shared_mutex mu_;
  std::unordered_map<std::string, DocEntry> docs_;
  std::unordered_map<std::string, std::unordered_set<std::string>> author_index_;
  std::unordered_set<std::string> banned_ids_;
  std::unordered_set<std::string> banned_authors_;
  std::unordered_map<std::string, std::uint64_t> ban_seqs_;
  std::uint64_t next_seq_ = 1;
  std::ofstream active_;
  std::uint64_t active_index_ = 0;
  std::size_t active_events_ = 0;
};

}  // namespace virality
