#pragma once

// File formats: inventory CSV, snapshot CSV, weight-table JSON and
// questionnaire JSON.
//
// inventory: signal_id,area,station,component,quantity,in_instruction,weighted_scope
// snapshot:  signal_id,tag,se_flagged,timestamp

#include <chrono>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "obsweight/error.hpp"
#include "obsweight/observability.hpp"
#include "obsweight/taxonomy.hpp"
#include "obsweight/time.hpp"
#include "obsweight/weight_tables.hpp"

namespace obsweight {

inline constexpr std::string_view kInventoryHeader =
    "signal_id,area,station,component,quantity,in_instruction,weighted_scope";
inline constexpr std::string_view kSnapshotHeader = "signal_id,tag,se_flagged,timestamp";

struct Inventory {
  std::vector<SignalDescriptor> signals;
  std::string source_path;
  Timestamp loaded_at{};
};

struct SnapshotSet {
  std::string snapshot_id;
  std::vector<SnapshotRecord> records;
  Timestamp taken_at{};
};

namespace csv {

/// Splits one CSV line. Double-quoted fields may contain commas and "".
inline std::vector<std::string> split(std::string_view line) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        field += c;
      }
    } else if (c == '"' && field.empty()) {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(field));
      field.clear();
    } else {
      field += c;
    }
  }
  if (quoted) throw Error(ErrorKind::Parse, "unterminated quoted field");
  out.push_back(std::move(field));
  return out;
}

inline std::string quote(std::string_view field) {
  if (field.find_first_of(",\"\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline bool parse_bool(std::string_view field) {
  if (field == "0") return false;
  if (field == "1") return true;
  throw Error(ErrorKind::Parse, "expected 0 or 1, got '" + std::string(field) + "'");
}

// Reads lines, dropping a trailing CR and a UTF-8 BOM on the first line.
class LineReader {
public:
  explicit LineReader(std::istream& in) : in_(in) {}

  bool next(std::string& line) {
    if (!std::getline(in_, line)) return false;
    ++number_;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (number_ == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    return true;
  }

  std::size_t number() const noexcept { return number_; }

private:
  std::istream& in_;
  std::size_t number_ = 0;
};

}  // namespace csv

// ---------------------------------------------------------------------------
// File helpers

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw Error(ErrorKind::Io, "cannot read " + path.string());
  return ss.str();
}

/// Writes through a temporary file and renames it into place.
inline void write_file(const std::filesystem::path& path, std::string_view content) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error(ErrorKind::Io, "cannot write " + tmp.string());
  }
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot rename " + tmp.string() + ": " + ec.message());
}

inline nlohmann::json read_json_file(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::Parse, path.string() + ": " + e.what());
  }
}

inline std::string dump_json(const nlohmann::json& j) { return j.dump(2) + "\n"; }

// ---------------------------------------------------------------------------
// Inventory

inline Inventory parse_inventory(std::istream& in, std::string source = "<stream>") {
  Inventory inv;
  inv.source_path = std::move(source);
  inv.loaded_at = std::chrono::time_point_cast<std::chrono::milliseconds>(std::chrono::system_clock::now());
  csv::LineReader reader(in);
  std::string line;
  if (!reader.next(line) || line != kInventoryHeader) {
    throw Error(ErrorKind::Parse, inv.source_path + ":1: expected header '" +
                                      std::string(kInventoryHeader) + "'");
  }
  std::unordered_set<std::string> ids;
  while (reader.next(line)) {
    if (line.empty()) continue;
    const std::string where = inv.source_path + ":" + std::to_string(reader.number());
    try {
      auto f = csv::split(line);
      if (f.size() != 7) {
        throw Error(ErrorKind::Parse, "expected 7 fields, got " + std::to_string(f.size()));
      }
      SignalDescriptor s;
      s.signal_id = f[0];
      s.area = f[1];
      s.station = f[2];
      if (s.signal_id.empty()) throw Error(ErrorKind::Parse, "empty signal_id");
      if (s.area.empty()) throw Error(ErrorKind::Parse, "empty area");
      s.component = parse_component(f[3]);
      s.quantity = parse_quantity(f[4]);
      s.in_instruction = csv::parse_bool(f[5]);
      s.weighted_scope = csv::parse_bool(f[6]);
      require_pair(s.component, s.quantity);
      if (!ids.insert(s.signal_id).second) {
        throw Error(ErrorKind::Validation, "duplicate signal_id '" + s.signal_id + "'");
      }
      inv.signals.push_back(std::move(s));
    } catch (const Error& e) {
      throw Error(e.kind(), where + ": " + e.what());
    }
  }
  return inv;
}

inline Inventory load_inventory(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  return parse_inventory(in, path.string());
}

inline void write_inventory(std::ostream& out, std::span<const SignalDescriptor> signals) {
  out << kInventoryHeader << '\n';
  for (const auto& s : signals) {
    out << csv::quote(s.signal_id) << ',' << csv::quote(s.area) << ',' << csv::quote(s.station) << ','
        << to_string(s.component) << ',' << to_string(s.quantity) << ','
        << (s.in_instruction ? '1' : '0') << ',' << (s.weighted_scope ? '1' : '0') << '\n';
  }
}

inline void save_inventory(const std::filesystem::path& path, std::span<const SignalDescriptor> signals) {
  std::ostringstream out;
  write_inventory(out, signals);
  write_file(path, out.str());
}

// ---------------------------------------------------------------------------
// Snapshot

/// Parses snapshot rows without reconciling them.
inline std::vector<SnapshotRecord> parse_snapshot_records(std::istream& in,
                                                          const std::string& source = "<stream>") {
  csv::LineReader reader(in);
  std::string line;
  if (!reader.next(line) || line != kSnapshotHeader) {
    throw Error(ErrorKind::Parse,
                source + ":1: expected header '" + std::string(kSnapshotHeader) + "'");
  }
  std::vector<SnapshotRecord> records;
  while (reader.next(line)) {
    if (line.empty()) continue;
    try {
      auto f = csv::split(line);
      if (f.size() != 4) {
        throw Error(ErrorKind::Parse, "expected 4 fields, got " + std::to_string(f.size()));
      }
      SnapshotRecord r{f[0], parse_tag(f[1]), csv::parse_bool(f[2]), parse_rfc3339(f[3])};
      if (r.signal_id.empty()) throw Error(ErrorKind::Parse, "empty signal_id");
      validate_record(r);
      records.push_back(std::move(r));
    } catch (const Error& e) {
      throw Error(e.kind(), source + ":" + std::to_string(reader.number()) + ": " + e.what());
    }
  }
  return records;
}

/// Reconciles records against an inventory: orphans and duplicates are
/// rejected, absent signals are filled as FAULTY (or rejected, if asked).
/// The result holds exactly one record per inventory signal, in inventory
/// order. taken_at is the latest record timestamp.
inline SnapshotSet reconcile_snapshot(std::string snapshot_id, std::vector<SnapshotRecord> records,
                                      const Inventory& inventory,
                                      MissingRecords missing = MissingRecords::TreatAsFaulty) {
  std::unordered_map<std::string, std::size_t> by_id;
  std::vector<std::string> orphans;
  std::unordered_set<std::string> known;
  for (const auto& s : inventory.signals) known.insert(s.signal_id);
  SnapshotSet set;
  set.snapshot_id = std::move(snapshot_id);
  bool any = false;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (!known.count(records[i].signal_id)) {
      orphans.push_back(records[i].signal_id);
      continue;
    }
    if (!by_id.emplace(records[i].signal_id, i).second) {
      throw Error(ErrorKind::Reconciliation,
                  "signal " + records[i].signal_id + " has more than one record");
    }
    if (!any || records[i].timestamp > set.taken_at) set.taken_at = records[i].timestamp;
    any = true;
  }
  if (!orphans.empty()) {
    throw ListError(ErrorKind::Reconciliation, "snapshot records for unknown signals", orphans);
  }
  std::vector<std::string> absent;
  for (const auto& s : inventory.signals) {
    auto it = by_id.find(s.signal_id);
    if (it != by_id.end()) {
      set.records.push_back(std::move(records[it->second]));
    } else {
      absent.push_back(s.signal_id);
      set.records.push_back({s.signal_id, ValidityTag::FAULTY, false, set.taken_at});
    }
  }
  if (!absent.empty() && missing == MissingRecords::Error) {
    throw ListError(ErrorKind::Reconciliation, "snapshot lacks records for", absent);
  }
  return set;
}

/// Loads and reconciles a snapshot. Its id is the file name without extension.
inline SnapshotSet load_snapshot(const std::filesystem::path& path, const Inventory& inventory,
                                 MissingRecords missing = MissingRecords::TreatAsFaulty) {
  std::istringstream in(read_file(path));
  auto records = parse_snapshot_records(in, path.string());
  return reconcile_snapshot(path.stem().string(), std::move(records), inventory, missing);
}

inline void write_snapshot(std::ostream& out, std::span<const SnapshotRecord> records) {
  out << kSnapshotHeader << '\n';
  for (const auto& r : records) {
    out << csv::quote(r.signal_id) << ',' << tag_code(r.tag) << ',' << (r.se_flagged ? '1' : '0')
        << ',' << format_rfc3339(r.timestamp) << '\n';
  }
}

inline void save_snapshot(const std::filesystem::path& path, std::span<const SnapshotRecord> records) {
  std::ostringstream out;
  write_snapshot(out, records);
  write_file(path, out.str());
}

// ---------------------------------------------------------------------------
// JSON documents

/// Loads weight tables and checks them with the given column tolerance.
inline WeightTables load_tables(const std::filesystem::path& path, double column_tolerance = 0.5) {
  try {
    WeightTables t = tables_from_json(read_json_file(path));
    validate_tables(t, column_tolerance);
    return t;
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Io) throw;
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

inline void save_tables(const std::filesystem::path& path, const WeightTables& t) {
  write_file(path, dump_json(tables_to_json(t)));
}

inline Questionnaire load_questionnaire(const std::filesystem::path& path) {
  try {
    return questionnaire_from_json(read_json_file(path));
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Io) throw;
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

inline void save_questionnaire(const std::filesystem::path& path, const Questionnaire& q) {
  write_file(path, dump_json(questionnaire_to_json(q)));
}

}  // namespace obsweight
