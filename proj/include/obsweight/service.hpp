#pragma once

// JSON-over-HTTP facade used by the questionnaire UI. Handlers are plain
// functions from request body to (status, JSON) so they can be exercised
// without a socket; mount() wires them into a cpp-httplib server.
//
//   POST /api/matrix/evaluate   {items, judgments[, method, cr_threshold]}
//   GET  /api/taxonomy
//   POST /api/questionnaires    questionnaire JSON -> {id, warnings}
//   GET  /api/tables
//   GET  /api/reports/latest

#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "httplib.h"
#include "obsweight/ahp.hpp"
#include "obsweight/error.hpp"
#include "obsweight/history.hpp"
#include "obsweight/ingestion.hpp"
#include "obsweight/observability.hpp"
#include "obsweight/report.hpp"
#include "obsweight/weight_tables.hpp"

namespace obsweight::service {

struct ApiResponse {
  int status = 200;
  nlohmann::json body;
};

struct ServiceConfig {
  std::optional<std::filesystem::path> tables_path;
  std::optional<std::filesystem::path> inventory_path;
  std::optional<std::filesystem::path> snapshot_path;
  std::optional<std::filesystem::path> history_dir;
  std::filesystem::path questionnaire_dir = "questionnaires";
  ScoringOptions scoring;
  ahp::PriorityMethod method = ahp::PriorityMethod::GeometricMean;
  double cr_threshold = ahp::kDefaultCrThreshold;
};

inline ahp::PriorityMethod parse_method(std::string_view s) {
  if (s == "geometric-mean") return ahp::PriorityMethod::GeometricMean;
  if (s == "eigenvector") return ahp::PriorityMethod::Eigenvector;
  throw Error(ErrorKind::Parse, "unknown method '" + std::string(s) + "'");
}

inline ApiResponse bad_request(std::vector<std::pair<std::string, std::string>> problems) {
  nlohmann::json errors = nlohmann::json::array();
  for (auto& [field, message] : problems) errors.push_back({{"field", field}, {"message", message}});
  return {400, {{"errors", std::move(errors)}}};
}

/// Evaluates one matrix: weights, lambda_max, CI, CR and acceptability.
inline ApiResponse evaluate_matrix(const std::string& body, ahp::PriorityMethod default_method,
                                   double default_threshold) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(body);
  } catch (const nlohmann::json::parse_error& e) {
    return bad_request({{"", std::string("malformed JSON: ") + e.what()}});
  }
  if (!j.is_object()) return bad_request({{"", "expected a JSON object"}});

  std::vector<std::pair<std::string, std::string>> problems;
  if (!j.contains("items") || !j["items"].is_array()) {
    problems.emplace_back("items", "required array of item labels");
  } else {
    for (std::size_t i = 0; i < j["items"].size(); ++i) {
      if (!j["items"][i].is_string()) problems.emplace_back("items[" + std::to_string(i) + "]", "must be a string");
    }
  }
  if (!j.contains("judgments") || !j["judgments"].is_array()) {
    problems.emplace_back("judgments", "required array of {row, col, value}");
  } else {
    for (std::size_t i = 0; i < j["judgments"].size(); ++i) {
      const auto& jj = j["judgments"][i];
      const std::string f = "judgments[" + std::to_string(i) + "]";
      if (!jj.is_object()) {
        problems.emplace_back(f, "must be an object");
        continue;
      }
      for (const char* key : {"row", "col"}) {
        if (!jj.contains(key) || !jj[key].is_number_integer() || jj[key].get<long long>() < 0) {
          problems.emplace_back(f + "." + key, "required non-negative integer");
        }
      }
      if (!jj.contains("value") || !jj["value"].is_number()) {
        problems.emplace_back(f + ".value", "required number");
      } else if (!(jj["value"].get<double>() > 0.0)) {
        problems.emplace_back(f + ".value", "must be positive");
      }
    }
  }
  ahp::PriorityMethod method = default_method;
  double threshold = default_threshold;
  if (j.contains("method")) {
    try {
      method = parse_method(j["method"].is_string() ? j["method"].get<std::string>() : "");
    } catch (const Error& e) {
      problems.emplace_back("method", e.what());
    }
  }
  if (j.contains("cr_threshold")) {
    if (!j["cr_threshold"].is_number() || j["cr_threshold"].get<double>() < 0) {
      problems.emplace_back("cr_threshold", "must be a non-negative number");
    } else {
      threshold = j["cr_threshold"].get<double>();
    }
  }
  if (!problems.empty()) return bad_request(std::move(problems));

  try {
    const auto matrix = matrix_from_json(j, "matrix");
    const auto pv = ahp::derive_priorities(matrix, method);
    const auto cr = ahp::consistency(matrix, pv, threshold);
    return {200,
            {{"items", pv.items},
             {"weights", pv.weights},
             {"lambda_max", cr.lambda_max},
             {"ci", cr.consistency_index},
             {"cr", cr.consistency_ratio},
             {"acceptable", cr.acceptable}}};
  } catch (const Error& e) {
    return bad_request({{"judgments", e.what()}});
  }
}

/// Components, their quantities, and the flat list of applicable pairs.
inline ApiResponse taxonomy() {
  nlohmann::json components = nlohmann::json::object();
  for (ComponentKind c : kAllComponents) {
    nlohmann::json qs = nlohmann::json::array();
    for (QuantityKind q : applicable_quantities(c)) qs.push_back(std::string(to_string(q)));
    components[std::string(to_string(c))] = std::move(qs);
  }
  nlohmann::json pairs = nlohmann::json::array();
  for (auto [c, q] : applicability_pairs()) {
    pairs.push_back({{"component", std::string(to_string(c))}, {"quantity", std::string(to_string(q))}});
  }
  nlohmann::json tags = nlohmann::json::array();
  for (ValidityTag t : kAllTags) {
    tags.push_back({{"code", std::string(1, tag_code(t))}, {"name", std::string(to_string(t))}});
  }
  nlohmann::json quantities = nlohmann::json::array();
  for (QuantityKind q : kAllQuantities) quantities.push_back(std::string(to_string(q)));
  return {200, {{"quantities", quantities}, {"components", components}, {"pairs", pairs}, {"tags", tags}}};
}

class Service {
public:
  explicit Service(ServiceConfig config) : config_(std::move(config)) {
    if (config_.tables_path) tables_ = load_tables(*config_.tables_path);
    if (config_.history_dir) history_.emplace(*config_.history_dir);
    if (config_.inventory_path && config_.snapshot_path && tables_) {
      const auto inventory = load_inventory(*config_.inventory_path);
      const auto snapshot = load_snapshot(*config_.snapshot_path, inventory, config_.scoring.missing);
      static_report_ = scores_report(
          score_by_area(inventory.signals, snapshot.records, *tables_, config_.scoring),
          snapshot.snapshot_id, "area", snapshot.taken_at);
    }
    std::error_code ec;
    std::filesystem::create_directories(config_.questionnaire_dir, ec);
    if (ec) {
      throw Error(ErrorKind::Io,
                  "cannot create " + config_.questionnaire_dir.string() + ": " + ec.message());
    }
  }

  ApiResponse evaluate(const std::string& body) const {
    return evaluate_matrix(body, config_.method, config_.cr_threshold);
  }

  ApiResponse tables() const {
    if (!tables_) return {404, {{"error", "no weight tables configured"}}};
    return {200, tables_to_json(*tables_)};
  }

  ApiResponse latest_report() const {
    if (history_) {
      if (auto entry = history_->latest()) {
        return {200, nlohmann::json::parse(
                         render_json(scores_report(entry->scores, entry->snapshot_id, "area", entry->taken_at)))};
      }
    }
    if (static_report_) return {200, nlohmann::json::parse(render_json(*static_report_))};
    return {404, {{"error", "no report available"}}};
  }

  /// Validates and stores a questionnaire. The questionnaire must be
  /// complete; consistency warnings are returned but do not reject it.
  ApiResponse submit_questionnaire(const std::string& body) {
    Questionnaire q;
    WeightDerivation derivation;
    try {
      q = questionnaire_from_json(nlohmann::json::parse(body));
      BuildOptions opts;
      opts.method = config_.method;
      opts.cr_threshold = config_.cr_threshold;
      derivation = build_weight_tables({q}, opts);
    } catch (const nlohmann::json::parse_error& e) {
      return bad_request({{"", std::string("malformed JSON: ") + e.what()}});
    } catch (const ListError& e) {
      std::vector<std::pair<std::string, std::string>> problems;
      for (const auto& item : e.items()) problems.emplace_back("matrices", item);
      return bad_request(std::move(problems));
    } catch (const Error& e) {
      return bad_request({{field_of(e.what()), e.what()}});
    }

    std::lock_guard lock(write_mutex_);
    std::string id;
    for (std::size_t n = 1;; ++n) {
      id = slug(q.expert_id) + "-" + std::to_string(n);
      if (!std::filesystem::exists(config_.questionnaire_dir / (id + ".json"))) break;
    }
    save_questionnaire(config_.questionnaire_dir / (id + ".json"), q);
    return {201, {{"id", id}, {"warnings", derivation.warnings}}};
  }

private:
  // "questionnaire.matrices[2].judgments[0].value: ..." -> field path
  static std::string field_of(const std::string& message) {
    const auto colon = message.find(':');
    if (colon == std::string::npos || message.rfind("questionnaire", 0) != 0) return "";
    return message.substr(0, colon);
  }

  static std::string slug(const std::string& s) {
    std::string out;
    for (char c : s) {
      const bool keep = (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') ||
                        c == '-' || c == '_';
      out += keep ? c : '_';
    }
    return out.substr(0, 64);
  }

  ServiceConfig config_;
  std::optional<WeightTables> tables_;
  std::optional<HistoryStore> history_;
  std::optional<ReportDocument> static_report_;
  std::mutex write_mutex_;
};

/// Registers every route on `server`. Unknown routes answer 404 with a JSON
/// error body.
inline void mount(httplib::Server& server, Service& svc) {
  auto send = [](httplib::Response& res, const ApiResponse& r) {
    res.status = r.status;
    res.set_content(r.body.dump(), "application/json");
  };
  server.Post("/api/matrix/evaluate", [&svc, send](const httplib::Request& req, httplib::Response& res) {
    send(res, svc.evaluate(req.body));
  });
  server.Get("/api/taxonomy",
             [send](const httplib::Request&, httplib::Response& res) { send(res, taxonomy()); });
  server.Post("/api/questionnaires", [&svc, send](const httplib::Request& req, httplib::Response& res) {
    send(res, svc.submit_questionnaire(req.body));
  });
  server.Get("/api/tables", [&svc, send](const httplib::Request&, httplib::Response& res) {
    send(res, svc.tables());
  });
  server.Get("/api/reports/latest", [&svc, send](const httplib::Request&, httplib::Response& res) {
    send(res, svc.latest_report());
  });
  server.set_error_handler([](const httplib::Request& req, httplib::Response& res) {
    if (res.status == 404) {
      res.set_content(nlohmann::json{{"error", "no route for " + req.method + " " + req.path}}.dump(),
                      "application/json");
    }
  });
  server.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    std::string what = "internal error";
    try {
      if (ep) std::rethrow_exception(ep);
    } catch (const std::exception& e) {
      what = e.what();
    } catch (...) {
    }
    res.status = 500;
    res.set_content(nlohmann::json{{"error", what}}.dump(), "application/json");
  });
}

}  // namespace obsweight::service
