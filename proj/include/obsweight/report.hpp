#pragma once

// Report documents. Each report has a single JSON body; the JSON, text and
// CSV renderings are all produced from that body. Percentages and weights in
// the body are rounded to 2 decimals; ranking columns carry integer
// percentages.

#include <cstdio>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "obsweight/error.hpp"
#include "obsweight/observability.hpp"
#include "obsweight/time.hpp"
#include "obsweight/weight_tables.hpp"

namespace obsweight {

enum class ReportKind { Weights, Scores, Comparison };
enum class ReportFormat { Json, Text, Csv };

inline const char* to_string(ReportKind k) {
  switch (k) {
    case ReportKind::Weights: return "weights";
    case ReportKind::Scores: return "scores";
    case ReportKind::Comparison: return "comparison";
  }
  return "?";
}

inline ReportFormat parse_format(std::string_view s) {
  if (s == "json") return ReportFormat::Json;
  if (s == "text") return ReportFormat::Text;
  if (s == "csv") return ReportFormat::Csv;
  throw Error(ErrorKind::Parse, "unknown report format '" + std::string(s) + "'");
}

struct ReportDocument {
  ReportKind kind = ReportKind::Scores;
  Timestamp generated_at{};
  nlohmann::json body;
};

namespace detail {

inline double r2(double v) { return round_to(v, 2); }

inline std::string fixed2(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

inline std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

inline std::string lpad(std::string s, std::size_t width) {
  if (s.size() < width) s.insert(0, width - s.size(), ' ');
  return s;
}

inline nlohmann::json rounded_score(const ObservabilityScore& s) {
  return {{"scope", s.scope},
          {"total_raw", s.total_raw},
          {"invalid_raw", s.invalid_raw},
          {"unweighted", r2(s.unweighted)},
          {"total_weighted", r2(s.total_weighted)},
          {"invalid_weighted", r2(s.invalid_weighted)},
          {"weighted", r2(s.weighted)}};
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Builders

inline ReportDocument weights_report(const WeightDerivation& d, Timestamp generated_at) {
  nlohmann::json m = nlohmann::json::object();
  nlohmann::json n = nlohmann::json::object();
  for (const auto& [c, col] : d.tables.m_table) {
    for (const auto& [q, v] : col) m[std::string(to_string(c))][std::string(to_string(q))] = detail::r2(v);
  }
  for (const auto& [q, col] : d.tables.n_table) {
    for (const auto& [c, v] : col) n[std::string(to_string(q))][std::string(to_string(c))] = detail::r2(v);
  }
  nlohmann::json consistency = nlohmann::json::array();
  for (const auto& cc : d.consistency) {
    consistency.push_back({{"expert_id", cc.expert_id.empty() ? nlohmann::json(nullptr)
                                                              : nlohmann::json(cc.expert_id)},
                           {"context", cc.context},
                           {"size", cc.size},
                           {"lambda_max", round_to(cc.report.lambda_max, 4)},
                           {"ci", round_to(cc.report.consistency_index, 4)},
                           {"cr", round_to(cc.report.consistency_ratio, 4)},
                           {"acceptable", cc.report.acceptable}});
  }
  return {ReportKind::Weights, generated_at,
          {{"m_table", m}, {"n_table", n}, {"consistency", consistency}, {"warnings", d.warnings}}};
}

/// Per-scope scores in both rankings plus network totals. Scopes must be
/// disjoint.
inline ReportDocument scores_report(std::vector<ObservabilityScore> scores,
                                    const std::string& snapshot_id, const std::string& scope_kind,
                                    Timestamp generated_at) {
  const ObservabilityScore overall = aggregate_scores(scores, "total");
  nlohmann::json body;
  body["snapshot_id"] = snapshot_id;
  body["scope_kind"] = scope_kind;
  body["divergences"] = nlohmann::json::array();
  for (const auto& d : find_rank_divergences(scores, 0)) {
    body["divergences"].push_back({{"higher", d.first},
                                   {"lower", d.second},
                                   {"unweighted", static_cast<int>(d.unweighted)},
                                   {"weighted_higher", static_cast<int>(d.weighted_first)},
                                   {"weighted_lower", static_cast<int>(d.weighted_second)}});
  }
  rank_by_unweighted(scores);
  nlohmann::json ru = nlohmann::json::array();
  for (std::size_t i = 0; i < scores.size(); ++i) {
    ru.push_back({{"rank", i + 1},
                  {"scope", scores[i].scope},
                  {"indicator", static_cast<int>(round_to(scores[i].unweighted, 0))}});
  }
  rank_by_weighted(scores);
  nlohmann::json rw = nlohmann::json::array();
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t i = 0; i < scores.size(); ++i) {
    rw.push_back({{"rank", i + 1},
                  {"scope", scores[i].scope},
                  {"indicator", static_cast<int>(round_to(scores[i].weighted, 0))}});
    rows.push_back(detail::rounded_score(scores[i]));
  }
  body["ranking_unweighted"] = std::move(ru);
  body["ranking_weighted"] = std::move(rw);
  body["scores"] = std::move(rows);
  body["totals"] = detail::rounded_score(overall);
  return {ReportKind::Scores, generated_at, std::move(body)};
}

inline ReportDocument comparison_report(const ComparisonReport& cmp, const std::string& before_id,
                                        const std::string& after_id, Timestamp generated_at) {
  nlohmann::json rows = nlohmann::json::array();
  std::size_t improved = 0, unchanged = 0, declined = 0;
  for (const auto& e : cmp.entries) {
    rows.push_back({{"scope", e.scope},
                    {"unweighted_before", detail::r2(e.unweighted_before)},
                    {"unweighted_after", detail::r2(e.unweighted_after)},
                    {"unweighted_delta", detail::r2(e.unweighted_delta)},
                    {"unweighted_trend", to_string(e.unweighted_trend)},
                    {"weighted_before", detail::r2(e.weighted_before)},
                    {"weighted_after", detail::r2(e.weighted_after)},
                    {"weighted_delta", detail::r2(e.weighted_delta)},
                    {"weighted_trend", to_string(e.weighted_trend)}});
    switch (e.weighted_trend) {
      case Trend::Improved: ++improved; break;
      case Trend::Unchanged: ++unchanged; break;
      case Trend::Declined: ++declined; break;
    }
  }
  return {ReportKind::Comparison, generated_at,
          {{"before", before_id},
           {"after", after_id},
           {"entries", std::move(rows)},
           {"weighted_summary", {{"improved", improved}, {"unchanged", unchanged}, {"declined", declined}}}}};
}

/// Reads scores back from a scores report ({kind:"scores", body:{...}}) or a
/// history entry ({snapshot_id, scores}). Returns the snapshot id and scores.
inline std::pair<std::string, std::vector<ObservabilityScore>> scores_from_document(
    const nlohmann::json& j) {
  const nlohmann::json* src = &j;
  if (j.is_object() && j.contains("kind")) {
    if (j.at("kind") != "scores") {
      throw Error(ErrorKind::Parse, "expected a scores report, got kind " + j.at("kind").dump());
    }
    src = &detail::require_field(j, "body", "report");
  }
  const std::string id = detail::require_string(detail::require_field(*src, "snapshot_id", "scores"),
                                                "scores.snapshot_id");
  const auto& arr = detail::require_field(*src, "scores", "scores");
  if (!arr.is_array()) throw Error(ErrorKind::Parse, "scores.scores: expected an array");
  std::vector<ObservabilityScore> out;
  for (const auto& s : arr) out.push_back(score_from_json(s));
  return {id, std::move(out)};
}

// ---------------------------------------------------------------------------
// Renderers

inline std::string render_json(const ReportDocument& doc) {
  nlohmann::json j{{"kind", to_string(doc.kind)},
                   {"generated_at", format_rfc3339(doc.generated_at)},
                   {"body", doc.body}};
  return j.dump(2) + "\n";
}

namespace detail {

inline std::string weights_text(const nlohmann::json& b) {
  std::ostringstream out;
  auto table = [&](const char* title, const nlohmann::json& t, auto rows, auto cols) {
    out << title << "\n" << pad("", 26);
    for (auto c : cols) out << lpad(std::string(to_string(c)), 26);
    out << "\n";
    for (auto r : rows) {
      out << pad(std::string(to_string(r)), 26);
      for (auto c : cols) {
        const std::string ck(to_string(c)), rk(to_string(r));
        out << lpad(t.contains(ck) && t[ck].contains(rk) ? fixed2(t[ck][rk].get<double>()) : "-", 26);
      }
      out << "\n";
    }
    out << "\n";
  };
  table("M (quantity weight within component)", b["m_table"], kAllQuantities, kAllComponents);
  table("N (component weight within quantity)", b["n_table"], kAllComponents, kAllQuantities);
  out << "Consistency\n"
      << pad("expert", 16) << pad("context", 52) << lpad("n", 3) << lpad("lambda_max", 12)
      << lpad("CR", 9) << "  status\n";
  for (const auto& c : b["consistency"]) {
    out << pad(c["expert_id"].is_null() ? "(aggregate)" : c["expert_id"].get<std::string>(), 16)
        << pad(c["context"].get<std::string>(), 52) << lpad(std::to_string(c["size"].get<int>()), 3);
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%12.4f%9.4f", c["lambda_max"].get<double>(), c["cr"].get<double>());
    out << buf << "  " << (c["acceptable"].get<bool>() ? "ok" : "INCONSISTENT") << "\n";
  }
  for (const auto& w : b["warnings"]) out << "warning: " << w.get<std::string>() << "\n";
  return out.str();
}

inline std::string scores_text(const nlohmann::json& b) {
  std::ostringstream out;
  const std::string label = b["scope_kind"] == "station" ? "Station" : "Area";
  out << "Observability by " << b["scope_kind"].get<std::string>() << ", snapshot "
      << b["snapshot_id"].get<std::string>() << "\n\n";
  out << pad("Without weighting", 36) << "With weighting\n";
  out << pad(label, 20) << pad("Indicator", 16) << pad(label, 20) << "Indicator\n";
  const auto& ru = b["ranking_unweighted"];
  const auto& rw = b["ranking_weighted"];
  for (std::size_t i = 0; i < ru.size(); ++i) {
    out << pad(ru[i]["scope"].get<std::string>(), 20)
        << pad("%" + std::to_string(ru[i]["indicator"].get<int>()), 16)
        << pad(rw[i]["scope"].get<std::string>(), 20) << "%" << rw[i]["indicator"].get<int>() << "\n";
  }
  out << "\n"
      << pad(label, 20) << lpad("signals", 9) << lpad("invalid", 9) << lpad("unweighted", 12)
      << lpad("AD weighted", 16) << lpad("OB weighted", 16) << lpad("weighted", 10) << "\n";
  auto row = [&](const nlohmann::json& s) {
    out << pad(s["scope"].get<std::string>(), 20) << lpad(std::to_string(s["total_raw"].get<long long>()), 9)
        << lpad(std::to_string(s["invalid_raw"].get<long long>()), 9)
        << lpad(fixed2(s["unweighted"].get<double>()), 12)
        << lpad(fixed2(s["total_weighted"].get<double>()), 16)
        << lpad(fixed2(s["invalid_weighted"].get<double>()), 16)
        << lpad(fixed2(s["weighted"].get<double>()), 10) << "\n";
  };
  for (const auto& s : b["scores"]) row(s);
  row(b["totals"]);
  for (const auto& d : b["divergences"]) {
    out << "\n"
        << d["higher"].get<std::string>() << " and " << d["lower"].get<std::string>()
        << " tie at %" << d["unweighted"].get<int>() << " without weighting but separate with it: %"
        << d["weighted_higher"].get<int>() << " vs %" << d["weighted_lower"].get<int>();
  }
  if (!b["divergences"].empty()) out << "\n";
  return out.str();
}

inline std::string comparison_text(const nlohmann::json& b) {
  std::ostringstream out;
  out << "Comparison " << b["before"].get<std::string>() << " -> " << b["after"].get<std::string>()
      << "\n\n"
      << pad("Scope", 16) << lpad("unw before", 12) << lpad("after", 9) << lpad("delta", 9) << "  "
      << pad("trend", 11) << lpad("w before", 10) << lpad("after", 9) << lpad("delta", 9) << "  trend\n";
  for (const auto& e : b["entries"]) {
    out << pad(e["scope"].get<std::string>(), 16) << lpad(fixed2(e["unweighted_before"].get<double>()), 12)
        << lpad(fixed2(e["unweighted_after"].get<double>()), 9)
        << lpad(fixed2(e["unweighted_delta"].get<double>()), 9) << "  "
        << pad(e["unweighted_trend"].get<std::string>(), 11)
        << lpad(fixed2(e["weighted_before"].get<double>()), 10)
        << lpad(fixed2(e["weighted_after"].get<double>()), 9)
        << lpad(fixed2(e["weighted_delta"].get<double>()), 9) << "  "
        << e["weighted_trend"].get<std::string>() << "\n";
  }
  const auto& s = b["weighted_summary"];
  out << "\nweighted: " << s["improved"].get<int>() << " improved, " << s["unchanged"].get<int>()
      << " unchanged, " << s["declined"].get<int>() << " declined\n";
  return out.str();
}

}  // namespace detail

inline std::string render_text(const ReportDocument& doc) {
  switch (doc.kind) {
    case ReportKind::Weights: return detail::weights_text(doc.body);
    case ReportKind::Scores: return detail::scores_text(doc.body);
    case ReportKind::Comparison: return detail::comparison_text(doc.body);
  }
  return {};
}

inline std::string render_csv(const ReportDocument& doc) {
  std::ostringstream out;
  const auto& b = doc.body;
  using detail::fixed2;
  switch (doc.kind) {
    case ReportKind::Weights:
      out << "table,column,row,weight\n";
      for (const auto& [col, rows] : b["m_table"].items()) {
        for (const auto& [row, v] : rows.items()) out << "M," << col << ',' << row << ',' << fixed2(v) << '\n';
      }
      for (const auto& [col, rows] : b["n_table"].items()) {
        for (const auto& [row, v] : rows.items()) out << "N," << col << ',' << row << ',' << fixed2(v) << '\n';
      }
      break;
    case ReportKind::Scores: {
      out << "rank,scope,total_raw,invalid_raw,unweighted,total_weighted,invalid_weighted,weighted\n";
      std::size_t rank = 0;
      for (const auto& s : b["scores"]) {
        out << ++rank << ',' << s["scope"].get<std::string>() << ',' << s["total_raw"].get<long long>()
            << ',' << s["invalid_raw"].get<long long>() << ',' << fixed2(s["unweighted"]) << ','
            << fixed2(s["total_weighted"]) << ',' << fixed2(s["invalid_weighted"]) << ','
            << fixed2(s["weighted"]) << '\n';
      }
      break;
    }
    case ReportKind::Comparison:
      out << "scope,unweighted_before,unweighted_after,unweighted_delta,unweighted_trend,"
             "weighted_before,weighted_after,weighted_delta,weighted_trend\n";
      for (const auto& e : b["entries"]) {
        out << e["scope"].get<std::string>() << ',' << fixed2(e["unweighted_before"]) << ','
            << fixed2(e["unweighted_after"]) << ',' << fixed2(e["unweighted_delta"]) << ','
            << e["unweighted_trend"].get<std::string>() << ',' << fixed2(e["weighted_before"]) << ','
            << fixed2(e["weighted_after"]) << ',' << fixed2(e["weighted_delta"]) << ','
            << e["weighted_trend"].get<std::string>() << '\n';
      }
      break;
  }
  return out.str();
}

inline std::string render(const ReportDocument& doc, ReportFormat format) {
  switch (format) {
    case ReportFormat::Json: return render_json(doc);
    case ReportFormat::Text: return render_text(doc);
    case ReportFormat::Csv: return render_csv(doc);
  }
  return {};
}

}  // namespace obsweight
