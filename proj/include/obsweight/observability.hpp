#pragma once

// Classic and weighted observability indices over one snapshot of tagged
// signals, per area or per station, plus before/after comparison.
//
//   unweighted = 100 * (AD - OB) / AD           AD, OB: signal counts
//   weighted   = 100 * (AD' - OB') / AD'        AD' = sum w_s k_s over in-scope signals
//                                               OB' = same sum over invalid ones
//
// w_s is the M x N signal weight and k_s is 2 for signals named in operating
// instructions, 1 otherwise.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "obsweight/error.hpp"
#include "obsweight/taxonomy.hpp"
#include "obsweight/time.hpp"
#include "obsweight/weight_tables.hpp"

namespace obsweight {

/// One signal's tag in a snapshot. `se_flagged` marks a VALID signal that
/// state estimation found inconsistent with its estimate.
struct SnapshotRecord {
  std::string signal_id;
  ValidityTag tag = ValidityTag::VALID;
  bool se_flagged = false;
  Timestamp timestamp{};

  friend bool operator==(const SnapshotRecord&, const SnapshotRecord&) = default;
};

inline void validate_record(const SnapshotRecord& r) {
  if (r.se_flagged && r.tag != ValidityTag::VALID) {
    throw Error(ErrorKind::Validation, "signal " + r.signal_id + ": se_flagged requires tag V, got " +
                                           std::string(1, tag_code(r.tag)));
  }
}

/// Which tags count as incorrect data.
struct InvalidityPolicy {
  std::set<ValidityTag> invalid_tags{ValidityTag::FAULTY, ValidityTag::NON_CURRENT,
                                     ValidityTag::INVALID};
  bool count_se_flagged = true;

  friend bool operator==(const InvalidityPolicy&, const InvalidityPolicy&) = default;
};

inline bool is_invalid(const SnapshotRecord& r, const InvalidityPolicy& policy = {}) {
  if (policy.invalid_tags.count(r.tag)) return true;
  return r.tag == ValidityTag::VALID && r.se_flagged && policy.count_se_flagged;
}

enum class MissingRecords { TreatAsFaulty, Error };

struct ScoringOptions {
  InvalidityPolicy policy;
  MissingRecords missing = MissingRecords::TreatAsFaulty;
};

inline constexpr double kInstructionMultiplier = 2.0;

/// 100 (total - invalid) / total.
inline double unweighted_observability(std::uint64_t total, std::uint64_t invalid) {
  if (total == 0) throw Error(ErrorKind::UndefinedScore, "observability of an empty scope is undefined");
  if (invalid > total) {
    throw Error(ErrorKind::Validation, "invalid count " + std::to_string(invalid) +
                                           " exceeds total " + std::to_string(total));
  }
  return 100.0 * static_cast<double>(total - invalid) / static_cast<double>(total);
}

struct ObservabilityScore {
  std::string scope;
  std::uint64_t total_raw = 0;
  std::uint64_t invalid_raw = 0;
  double unweighted = 0.0;
  double total_weighted = 0.0;
  double invalid_weighted = 0.0;
  double weighted = 0.0;

  friend bool operator==(const ObservabilityScore&, const ObservabilityScore&) = default;
};

namespace detail {

// Per inventory signal: whether its effective record is invalid.
inline std::vector<bool> reconcile(std::span<const SignalDescriptor> inventory,
                                   std::span<const SnapshotRecord> snapshot,
                                   const ScoringOptions& options) {
  std::unordered_map<std::string_view, std::size_t> index;
  index.reserve(inventory.size());
  for (std::size_t i = 0; i < inventory.size(); ++i) {
    if (!index.emplace(inventory[i].signal_id, i).second) {
      throw Error(ErrorKind::Validation, "duplicate signal_id " + inventory[i].signal_id);
    }
  }
  std::vector<int> state(inventory.size(), -1);  // -1 missing, 0 valid, 1 invalid
  std::vector<std::string> orphans;
  for (const auto& r : snapshot) {
    validate_record(r);
    auto it = index.find(r.signal_id);
    if (it == index.end()) {
      orphans.push_back(r.signal_id);
      continue;
    }
    if (state[it->second] != -1) {
      throw Error(ErrorKind::Reconciliation, "signal " + r.signal_id + " has more than one record");
    }
    state[it->second] = is_invalid(r, options.policy) ? 1 : 0;
  }
  if (!orphans.empty()) {
    throw ListError(ErrorKind::Reconciliation, "snapshot records for unknown signals", orphans);
  }
  std::vector<bool> invalid(inventory.size());
  std::vector<std::string> missing;
  for (std::size_t i = 0; i < inventory.size(); ++i) {
    if (state[i] == -1) {
      missing.push_back(inventory[i].signal_id);
      invalid[i] = is_invalid({inventory[i].signal_id, ValidityTag::FAULTY, false, {}}, options.policy);
    } else {
      invalid[i] = state[i] == 1;
    }
  }
  if (!missing.empty() && options.missing == MissingRecords::Error) {
    throw ListError(ErrorKind::Reconciliation, "snapshot lacks records for", missing);
  }
  return invalid;
}

inline ObservabilityScore score_members(std::string scope, std::span<const SignalDescriptor> inventory,
                                        std::span<const std::size_t> members,
                                        const std::vector<bool>& invalid, const WeightTables& tables) {
  ObservabilityScore s;
  s.scope = std::move(scope);
  for (std::size_t i : members) {
    const SignalDescriptor& sig = inventory[i];
    ++s.total_raw;
    if (invalid[i]) ++s.invalid_raw;
    if (!sig.weighted_scope) continue;
    const double w = signal_weight(sig, tables) * (sig.in_instruction ? kInstructionMultiplier : 1.0);
    s.total_weighted += w;
    if (invalid[i]) s.invalid_weighted += w;
  }
  s.unweighted = unweighted_observability(s.total_raw, s.invalid_raw);
  if (!(s.total_weighted > 0.0)) {
    throw Error(ErrorKind::UndefinedScore,
                "scope '" + s.scope + "' has no signals in the weighted index");
  }
  s.weighted = 100.0 * (s.total_weighted - s.invalid_weighted) / s.total_weighted;
  return s;
}

template <typename KeyFn>
std::vector<ObservabilityScore> score_grouped(std::span<const SignalDescriptor> inventory,
                                              std::span<const SnapshotRecord> snapshot,
                                              const WeightTables& tables, const ScoringOptions& options,
                                              KeyFn key) {
  if (inventory.empty()) throw Error(ErrorKind::UndefinedScore, "inventory is empty");
  const auto invalid = reconcile(inventory, snapshot, options);
  std::map<std::string, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < inventory.size(); ++i) groups[key(inventory[i])].push_back(i);
  std::vector<ObservabilityScore> out;
  out.reserve(groups.size());
  for (const auto& [scope, members] : groups) {
    out.push_back(score_members(scope, inventory, members, invalid, tables));
  }
  return out;
}

}  // namespace detail

/// Orders by descending weighted score, then ascending scope id.
inline void rank_by_weighted(std::vector<ObservabilityScore>& scores) {
  std::sort(scores.begin(), scores.end(), [](const auto& a, const auto& b) {
    if (a.weighted != b.weighted) return a.weighted > b.weighted;
    return a.scope < b.scope;
  });
}

/// Orders by descending unweighted score, then ascending scope id.
inline void rank_by_unweighted(std::vector<ObservabilityScore>& scores) {
  std::sort(scores.begin(), scores.end(), [](const auto& a, const auto& b) {
    if (a.unweighted != b.unweighted) return a.unweighted > b.unweighted;
    return a.scope < b.scope;
  });
}

/// Both indices over the whole inventory. The unweighted index counts every
/// signal; the weighted one only signals with weighted_scope set.
inline ObservabilityScore weighted_observability(std::span<const SignalDescriptor> inventory,
                                                 std::span<const SnapshotRecord> snapshot,
                                                 const WeightTables& tables,
                                                 const ScoringOptions& options = {},
                                                 std::string scope = "all") {
  if (inventory.empty()) throw Error(ErrorKind::UndefinedScore, "inventory is empty");
  const auto invalid = detail::reconcile(inventory, snapshot, options);
  std::vector<std::size_t> all(inventory.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return detail::score_members(std::move(scope), inventory, all, invalid, tables);
}

/// One score per area, ranked by weighted score.
inline std::vector<ObservabilityScore> score_by_area(std::span<const SignalDescriptor> inventory,
                                                     std::span<const SnapshotRecord> snapshot,
                                                     const WeightTables& tables,
                                                     const ScoringOptions& options = {}) {
  auto scores = detail::score_grouped(inventory, snapshot, tables, options,
                                      [](const SignalDescriptor& s) { return s.area; });
  rank_by_weighted(scores);
  return scores;
}

/// One score per station, scoped "area/station", ranked by weighted score.
inline std::vector<ObservabilityScore> score_by_station(std::span<const SignalDescriptor> inventory,
                                                        std::span<const SnapshotRecord> snapshot,
                                                        const WeightTables& tables,
                                                        const ScoringOptions& options = {}) {
  auto scores = detail::score_grouped(
      inventory, snapshot, tables, options,
      [](const SignalDescriptor& s) { return s.area + "/" + s.station; });
  rank_by_weighted(scores);
  return scores;
}

/// Combines scores of disjoint scopes into one, as if scored together.
inline ObservabilityScore aggregate_scores(std::span<const ObservabilityScore> parts,
                                           std::string scope = "all") {
  ObservabilityScore s;
  s.scope = std::move(scope);
  for (const auto& p : parts) {
    s.total_raw += p.total_raw;
    s.invalid_raw += p.invalid_raw;
    s.total_weighted += p.total_weighted;
    s.invalid_weighted += p.invalid_weighted;
  }
  s.unweighted = unweighted_observability(s.total_raw, s.invalid_raw);
  if (!(s.total_weighted > 0.0)) {
    throw Error(ErrorKind::UndefinedScore, "scope '" + s.scope + "' has no signals in the weighted index");
  }
  s.weighted = 100.0 * (s.total_weighted - s.invalid_weighted) / s.total_weighted;
  return s;
}

/// Half-up rounding to `decimals` places, as used in every report.
inline double round_to(double value, int decimals) {
  const double scale = std::pow(10.0, decimals);
  return std::round(value * scale) / scale;
}

/// Two scopes that tie on the unweighted index but separate on the weighted
/// one, both compared after rounding to `decimals`.
struct RankDivergence {
  std::string first;   // higher weighted score
  std::string second;
  double unweighted = 0.0;
  double weighted_first = 0.0;
  double weighted_second = 0.0;
};

inline std::vector<RankDivergence> find_rank_divergences(std::vector<ObservabilityScore> scores,
                                                         int decimals = 0) {
  rank_by_weighted(scores);
  std::vector<RankDivergence> out;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    for (std::size_t j = i + 1; j < scores.size(); ++j) {
      const double ui = round_to(scores[i].unweighted, decimals);
      const double uj = round_to(scores[j].unweighted, decimals);
      const double wi = round_to(scores[i].weighted, decimals);
      const double wj = round_to(scores[j].weighted, decimals);
      if (ui == uj && wi != wj) {
        out.push_back({scores[i].scope, scores[j].scope, ui, wi, wj});
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Comparison of two scorings of the same scopes

enum class Trend { Improved, Unchanged, Declined };

inline constexpr double kUnchangedBand = 0.5;

inline const char* to_string(Trend t) {
  switch (t) {
    case Trend::Improved: return "improved";
    case Trend::Unchanged: return "unchanged";
    case Trend::Declined: return "declined";
  }
  return "?";
}

inline Trend classify_delta(double delta) {
  if (std::abs(delta) < kUnchangedBand) return Trend::Unchanged;
  return delta > 0 ? Trend::Improved : Trend::Declined;
}

struct ScoreDelta {
  std::string scope;
  double unweighted_before = 0.0;
  double unweighted_after = 0.0;
  double unweighted_delta = 0.0;
  Trend unweighted_trend = Trend::Unchanged;
  double weighted_before = 0.0;
  double weighted_after = 0.0;
  double weighted_delta = 0.0;
  Trend weighted_trend = Trend::Unchanged;
};

struct ComparisonReport {
  std::vector<ScoreDelta> entries;  // ascending scope id
};

inline ComparisonReport compare_snapshots(std::span<const ObservabilityScore> before,
                                          std::span<const ObservabilityScore> after) {
  std::map<std::string, const ObservabilityScore*> b, a;
  for (const auto& s : before) {
    if (!b.emplace(s.scope, &s).second) {
      throw Error(ErrorKind::Comparison, "scope " + s.scope + " appears twice in the first set");
    }
  }
  for (const auto& s : after) {
    if (!a.emplace(s.scope, &s).second) {
      throw Error(ErrorKind::Comparison, "scope " + s.scope + " appears twice in the second set");
    }
  }
  std::vector<std::string> mismatch;
  for (const auto& [scope, _] : b) {
    if (!a.count(scope)) mismatch.push_back(scope + " (only before)");
  }
  for (const auto& [scope, _] : a) {
    if (!b.count(scope)) mismatch.push_back(scope + " (only after)");
  }
  if (!mismatch.empty()) throw ListError(ErrorKind::Comparison, "area sets differ", mismatch);

  ComparisonReport report;
  for (const auto& [scope, sb] : b) {
    const ObservabilityScore* sa = a.at(scope);
    ScoreDelta d;
    d.scope = scope;
    d.unweighted_before = sb->unweighted;
    d.unweighted_after = sa->unweighted;
    d.unweighted_delta = sa->unweighted - sb->unweighted;
    d.unweighted_trend = classify_delta(d.unweighted_delta);
    d.weighted_before = sb->weighted;
    d.weighted_after = sa->weighted;
    d.weighted_delta = sa->weighted - sb->weighted;
    d.weighted_trend = classify_delta(d.weighted_delta);
    report.entries.push_back(d);
  }
  return report;
}

// ---------------------------------------------------------------------------
// JSON

inline nlohmann::json score_to_json(const ObservabilityScore& s) {
  return {{"scope", s.scope},
          {"total_raw", s.total_raw},
          {"invalid_raw", s.invalid_raw},
          {"unweighted", s.unweighted},
          {"total_weighted", s.total_weighted},
          {"invalid_weighted", s.invalid_weighted},
          {"weighted", s.weighted}};
}

inline ObservabilityScore score_from_json(const nlohmann::json& j) {
  const std::string where = "score";
  ObservabilityScore s;
  s.scope = detail::require_string(detail::require_field(j, "scope", where), "score.scope");
  s.total_raw = detail::require_index(detail::require_field(j, "total_raw", where), "score.total_raw");
  s.invalid_raw =
      detail::require_index(detail::require_field(j, "invalid_raw", where), "score.invalid_raw");
  s.unweighted = detail::require_number(detail::require_field(j, "unweighted", where), "score.unweighted");
  s.total_weighted =
      detail::require_number(detail::require_field(j, "total_weighted", where), "score.total_weighted");
  s.invalid_weighted = detail::require_number(detail::require_field(j, "invalid_weighted", where),
                                              "score.invalid_weighted");
  s.weighted = detail::require_number(detail::require_field(j, "weighted", where), "score.weighted");
  return s;
}

inline nlohmann::json policy_to_json(const InvalidityPolicy& p) {
  nlohmann::json tags = nlohmann::json::array();
  for (ValidityTag t : p.invalid_tags) tags.push_back(std::string(1, tag_code(t)));
  return {{"invalid_tags", tags}, {"count_se_flagged", p.count_se_flagged}};
}

/// {"invalid_tags": ["F","N","I"], "count_se_flagged": true}; absent fields
/// keep their defaults.
inline InvalidityPolicy policy_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorKind::Parse, "policy: expected an object");
  InvalidityPolicy p;
  if (j.contains("invalid_tags")) {
    const auto& tags = j.at("invalid_tags");
    if (!tags.is_array()) throw Error(ErrorKind::Parse, "policy.invalid_tags: expected an array");
    p.invalid_tags.clear();
    for (const auto& t : tags) {
      p.invalid_tags.insert(parse_tag(detail::require_string(t, "policy.invalid_tags[]")));
    }
  }
  if (j.contains("count_se_flagged")) {
    if (!j.at("count_se_flagged").is_boolean()) {
      throw Error(ErrorKind::Parse, "policy.count_se_flagged: expected a boolean");
    }
    p.count_se_flagged = j.at("count_se_flagged").get<bool>();
  }
  for (const auto& [key, _] : j.items()) {
    if (key != "invalid_tags" && key != "count_se_flagged") {
      throw Error(ErrorKind::Parse, "policy: unknown field '" + key + "'");
    }
  }
  return p;
}

}  // namespace obsweight
