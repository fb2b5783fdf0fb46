#pragma once

// Append-only store of per-snapshot scores: one JSON document per snapshot
// plus index.json listing them in taken_at order.

#include <algorithm>
#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "obsweight/error.hpp"
#include "obsweight/ingestion.hpp"
#include "obsweight/observability.hpp"
#include "obsweight/time.hpp"

namespace obsweight {

struct HistoryEntry {
  std::string snapshot_id;
  Timestamp taken_at{};
  std::vector<ObservabilityScore> scores;
};

inline nlohmann::json history_entry_to_json(const HistoryEntry& e) {
  nlohmann::json scores = nlohmann::json::array();
  for (const auto& s : e.scores) scores.push_back(score_to_json(s));
  return {{"snapshot_id", e.snapshot_id},
          {"taken_at", format_rfc3339(e.taken_at)},
          {"scores", std::move(scores)}};
}

inline HistoryEntry history_entry_from_json(const nlohmann::json& j) {
  HistoryEntry e;
  e.snapshot_id = detail::require_string(detail::require_field(j, "snapshot_id", "history entry"),
                                         "history entry.snapshot_id");
  e.taken_at = parse_rfc3339(detail::require_string(
      detail::require_field(j, "taken_at", "history entry"), "history entry.taken_at"));
  const auto& scores = detail::require_field(j, "scores", "history entry");
  if (!scores.is_array()) throw Error(ErrorKind::Parse, "history entry.scores: expected an array");
  for (const auto& s : scores) e.scores.push_back(score_from_json(s));
  return e;
}

/// Snapshot ids become file names, so they are restricted to [A-Za-z0-9._-]
/// and may not start with a dot.
inline void validate_snapshot_id(const std::string& id) {
  const bool ok = !id.empty() && id.size() <= 128 && id.front() != '.' &&
                  std::all_of(id.begin(), id.end(), [](char c) {
                    return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') ||
                           (c >= '0' && c <= '9') || c == '.' || c == '_' || c == '-';
                  });
  if (!ok) throw Error(ErrorKind::Validation, "invalid snapshot id '" + id + "'");
}

class HistoryStore {
public:
  struct IndexEntry {
    std::string snapshot_id;
    Timestamp taken_at{};
  };

  /// Opens (creating if needed) the store rooted at `dir`.
  explicit HistoryStore(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw Error(ErrorKind::Io, "cannot create " + dir_.string() + ": " + ec.message());
    if (std::filesystem::exists(index_path())) load_index();
  }

  const std::filesystem::path& directory() const noexcept { return dir_; }

  std::vector<IndexEntry> entries() const {
    std::lock_guard lock(mutex_);
    return index_;
  }

  bool contains(const std::string& snapshot_id) const {
    std::lock_guard lock(mutex_);
    return find(snapshot_id).has_value();
  }

  /// Appends one snapshot's scores. Entries stay ordered by taken_at (ties
  /// keep insertion order); a repeated snapshot id is a conflict.
  void append(const std::string& snapshot_id, Timestamp taken_at,
              std::vector<ObservabilityScore> scores) {
    validate_snapshot_id(snapshot_id);
    std::lock_guard lock(mutex_);
    if (find(snapshot_id)) {
      throw Error(ErrorKind::Conflict, "snapshot '" + snapshot_id + "' is already stored");
    }
    HistoryEntry entry{snapshot_id, taken_at, std::move(scores)};
    write_file(entry_path(snapshot_id), dump_json(history_entry_to_json(entry)));
    auto pos = std::upper_bound(index_.begin(), index_.end(), taken_at,
                                [](Timestamp t, const IndexEntry& e) { return t < e.taken_at; });
    index_.insert(pos, {snapshot_id, taken_at});
    save_index();
  }

  HistoryEntry read(const std::string& snapshot_id) const {
    std::lock_guard lock(mutex_);
    if (!find(snapshot_id)) {
      throw Error(ErrorKind::Lookup, "snapshot '" + snapshot_id + "' is not in the history store");
    }
    return history_entry_from_json(read_json_file(entry_path(snapshot_id)));
  }

  std::optional<HistoryEntry> latest() const {
    std::string id;
    {
      std::lock_guard lock(mutex_);
      if (index_.empty()) return std::nullopt;
      id = index_.back().snapshot_id;
    }
    return read(id);
  }

private:
  std::filesystem::path index_path() const { return dir_ / "index.json"; }
  std::filesystem::path entry_path(const std::string& id) const { return dir_ / (id + ".json"); }

  std::optional<std::size_t> find(const std::string& id) const {
    for (std::size_t i = 0; i < index_.size(); ++i) {
      if (index_[i].snapshot_id == id) return i;
    }
    return std::nullopt;
  }

  void load_index() {
    const auto j = read_json_file(index_path());
    const auto& entries = detail::require_field(j, "entries", "history index");
    if (!entries.is_array()) throw Error(ErrorKind::Parse, "history index.entries: expected an array");
    for (const auto& e : entries) {
      index_.push_back(
          {detail::require_string(detail::require_field(e, "snapshot_id", "history index"), "snapshot_id"),
           parse_rfc3339(detail::require_string(detail::require_field(e, "taken_at", "history index"),
                                                "taken_at"))});
    }
    std::stable_sort(index_.begin(), index_.end(),
                     [](const IndexEntry& a, const IndexEntry& b) { return a.taken_at < b.taken_at; });
  }

  void save_index() const {
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& e : index_) {
      entries.push_back({{"snapshot_id", e.snapshot_id}, {"taken_at", format_rfc3339(e.taken_at)}});
    }
    write_file(index_path(), dump_json({{"entries", std::move(entries)}}));
  }

  std::filesystem::path dir_;
  std::vector<IndexEntry> index_;
  mutable std::mutex mutex_;
};

}  // namespace obsweight
