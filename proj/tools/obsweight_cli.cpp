// obsweight: derive signal weight tables from expert questionnaires, score
// observability per area, compare snapshots, and serve the JSON API.
//
// Exit codes: 0 success, 1 validation failure, 2 I/O failure.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "obsweight/obsweight.hpp"
#include "obsweight/service.hpp"

namespace fs = std::filesystem;
using namespace obsweight;

namespace {

// Defaults read from the file named by OBSWEIGHT_CONFIG, overridable by flags.
struct Defaults {
  std::string tables;
  std::string policy;
  std::string method = "geometric-mean";
  std::string aggregation = "priorities";
  double cr_threshold = ahp::kDefaultCrThreshold;
  std::string format;
};

Defaults load_defaults() {
  Defaults d;
  const char* path = std::getenv("OBSWEIGHT_CONFIG");
  if (!path || !*path) return d;
  const auto j = read_json_file(path);
  if (!j.is_object()) throw Error(ErrorKind::Parse, std::string(path) + ": expected an object");
  if (j.contains("tables")) d.tables = j.at("tables").get<std::string>();
  if (j.contains("policy")) d.policy = j.at("policy").is_string() ? j.at("policy").get<std::string>()
                                                                  : j.at("policy").dump();
  if (j.contains("method")) d.method = j.at("method").get<std::string>();
  if (j.contains("aggregation")) d.aggregation = j.at("aggregation").get<std::string>();
  if (j.contains("cr_threshold")) d.cr_threshold = j.at("cr_threshold").get<double>();
  if (j.contains("format")) d.format = j.at("format").get<std::string>();
  return d;
}

// --policy takes inline JSON or a path to a JSON file.
InvalidityPolicy parse_policy_arg(const std::string& arg) {
  if (arg.empty()) return {};
  nlohmann::json j;
  if (arg.front() == '{') {
    try {
      j = nlohmann::json::parse(arg);
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(ErrorKind::Parse, std::string("--policy: ") + e.what());
    }
  } else {
    j = read_json_file(arg);
  }
  return policy_from_json(j);
}

BuildOptions::Aggregation parse_aggregation(const std::string& s) {
  if (s == "priorities") return BuildOptions::Aggregation::Priorities;
  if (s == "judgments") return BuildOptions::Aggregation::Judgments;
  throw Error(ErrorKind::Parse, "unknown aggregation '" + s + "'");
}

MissingRecords parse_missing(const std::string& s) {
  if (s == "faulty") return MissingRecords::TreatAsFaulty;
  if (s == "error") return MissingRecords::Error;
  throw Error(ErrorKind::Parse, "unknown --missing mode '" + s + "'");
}

// Report timestamps come from the data, or SOURCE_DATE_EPOCH, never the clock.
Timestamp report_time(const std::string& flag, std::optional<Timestamp> from_data) {
  if (!flag.empty()) return parse_rfc3339(flag);
  if (from_data) return *from_data;
  if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH"); epoch && *epoch) {
    return Timestamp{std::chrono::seconds{std::stoll(epoch)}};
  }
  return Timestamp{};
}

void print(const std::string& s) { std::cout << s << std::flush; }

}  // namespace

int main(int argc, char** argv) {
  Defaults defaults;
  try {
    defaults = load_defaults();
  } catch (const Error& e) {
    std::cerr << "error: OBSWEIGHT_CONFIG: " << e.what() << "\n";
    return exit_code_for(e.kind());
  }

  CLI::App app{"Weighted observability scoring for grid telemetry"};
  app.require_subcommand(1);
  std::string generated_at;
  app.add_option("--generated-at", generated_at, "RFC 3339 timestamp stamped on reports");

  // weights
  auto* weights = app.add_subcommand("weights", "Derive M/N weight tables from questionnaires");
  std::vector<std::string> questionnaire_paths;
  std::string weights_out;
  std::string method = defaults.method;
  std::string aggregation = defaults.aggregation;
  double cr_threshold = defaults.cr_threshold;
  bool strict = false;
  std::string weights_format = defaults.format.empty() ? "text" : defaults.format;
  weights->add_option("questionnaires", questionnaire_paths, "Questionnaire JSON files")->required();
  weights->add_option("-o,--out", weights_out, "Output weight-table JSON")->required();
  weights->add_option("--method", method, "geometric-mean | eigenvector")
      ->check(CLI::IsMember({"geometric-mean", "eigenvector"}));
  weights->add_option("--aggregation", aggregation, "priorities | judgments")
      ->check(CLI::IsMember({"priorities", "judgments"}));
  weights->add_option("--cr-threshold", cr_threshold, "Acceptable consistency ratio");
  weights->add_flag("--strict", strict, "Treat consistency warnings as errors");
  weights->add_option("--format", weights_format, "Summary format: json | text | csv")
      ->check(CLI::IsMember({"json", "text", "csv"}));

  // score
  auto* score = app.add_subcommand("score", "Score a snapshot per area or station");
  std::string inventory_path, snapshot_path, tables_path = defaults.tables, policy_arg = defaults.policy;
  std::string by = "area", missing = "faulty", persist_dir, snapshot_id;
  std::string score_format = defaults.format.empty() ? "text" : defaults.format;
  score->add_option("--inventory", inventory_path, "Inventory CSV")->required();
  score->add_option("--snapshot", snapshot_path, "Snapshot CSV")->required();
  score->add_option("--tables", tables_path, "Weight-table JSON");
  score->add_option("--policy", policy_arg, "Invalidity policy: inline JSON or file");
  score->add_option("--by", by, "area | station")->check(CLI::IsMember({"area", "station"}));
  score->add_option("--missing", missing, "faulty | error")->check(CLI::IsMember({"faulty", "error"}));
  score->add_option("--format", score_format, "json | text | csv")
      ->check(CLI::IsMember({"json", "text", "csv"}));
  score->add_option("--persist", persist_dir, "Append the scores to this history store");
  score->add_option("--snapshot-id", snapshot_id, "Id to persist under (default: snapshot file stem)");

  // compare
  auto* compare = app.add_subcommand("compare", "Compare two scored snapshots");
  std::vector<std::string> compare_refs;
  std::string history_dir;
  std::string compare_format = defaults.format.empty() ? "text" : defaults.format;
  compare->add_option("refs", compare_refs,
                      "Two snapshot ids (with --history) or two score/report JSON files")
      ->required()
      ->expected(2);
  compare->add_option("--history", history_dir, "History store directory");
  compare->add_option("--format", compare_format, "json | text | csv")
      ->check(CLI::IsMember({"json", "text", "csv"}));

  // serve
  auto* serve = app.add_subcommand("serve", "Run the JSON API");
  std::string bind = "127.0.0.1:8080", serve_inventory, serve_snapshot, serve_history;
  std::string serve_tables = defaults.tables, questionnaire_dir = "questionnaires";
  serve->add_option("--bind", bind, "host:port");
  serve->add_option("--tables", serve_tables, "Weight-table JSON");
  serve->add_option("--inventory", serve_inventory, "Inventory CSV for the latest report");
  serve->add_option("--snapshot", serve_snapshot, "Snapshot CSV for the latest report");
  serve->add_option("--history", serve_history, "History store for the latest report");
  serve->add_option("--questionnaire-dir", questionnaire_dir, "Where submitted questionnaires go");

  // generate
  auto* generate = app.add_subcommand("generate", "Write a seeded synthetic fixture");
  std::string fixture_config, out_dir;
  generate->add_option("--config", fixture_config, "Fixture config JSON")->required();
  generate->add_option("--out-dir", out_dir, "Directory for inventory.csv and snapshot.csv")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*weights) {
      std::vector<Questionnaire> qs;
      for (const auto& p : questionnaire_paths) qs.push_back(load_questionnaire(p));
      BuildOptions opts;
      opts.method = service::parse_method(method);
      opts.aggregation = parse_aggregation(aggregation);
      opts.cr_threshold = cr_threshold;
      const auto derivation = build_weight_tables(qs, opts);
      print(render(weights_report(derivation, report_time(generated_at, std::nullopt)),
                   parse_format(weights_format)));
      for (const auto& w : derivation.warnings) std::cerr << "warning: " << w << "\n";
      if (strict && !derivation.warnings.empty()) {
        std::cerr << "error: consistency warnings with --strict; tables not written\n";
        return 1;
      }
      save_tables(weights_out, derivation.tables);
      return 0;
    }

    if (*score) {
      if (tables_path.empty()) throw Error(ErrorKind::Validation, "--tables is required");
      const auto tables = load_tables(tables_path);
      const auto inventory = load_inventory(inventory_path);
      ScoringOptions opts;
      opts.policy = parse_policy_arg(policy_arg);
      opts.missing = parse_missing(missing);
      const auto snapshot = load_snapshot(snapshot_path, inventory, opts.missing);
      auto scores = by == "area" ? score_by_area(inventory.signals, snapshot.records, tables, opts)
                                 : score_by_station(inventory.signals, snapshot.records, tables, opts);
      const std::string id = snapshot_id.empty() ? snapshot.snapshot_id : snapshot_id;
      if (!persist_dir.empty()) {
        HistoryStore store(persist_dir);
        store.append(id, snapshot.taken_at, scores);
      }
      print(render(scores_report(std::move(scores), id, by, report_time(generated_at, snapshot.taken_at)),
                   parse_format(score_format)));
      return 0;
    }

    if (*compare) {
      std::string before_id, after_id;
      std::vector<ObservabilityScore> before, after;
      std::optional<Timestamp> when;
      if (!history_dir.empty()) {
        if (!fs::is_directory(history_dir)) {
          throw Error(ErrorKind::Io, "history store " + history_dir + " does not exist");
        }
        HistoryStore store(history_dir);
        auto b = store.read(compare_refs[0]);
        auto a = store.read(compare_refs[1]);
        before_id = b.snapshot_id;
        after_id = a.snapshot_id;
        before = std::move(b.scores);
        after = std::move(a.scores);
        when = a.taken_at;
      } else {
        std::tie(before_id, before) = scores_from_document(read_json_file(compare_refs[0]));
        std::tie(after_id, after) = scores_from_document(read_json_file(compare_refs[1]));
      }
      const auto cmp = compare_snapshots(before, after);
      print(render(comparison_report(cmp, before_id, after_id, report_time(generated_at, when)),
                   parse_format(compare_format)));
      return 0;
    }

    if (*serve) {
      service::ServiceConfig cfg;
      if (!serve_tables.empty()) cfg.tables_path = serve_tables;
      if (!serve_inventory.empty()) cfg.inventory_path = serve_inventory;
      if (!serve_snapshot.empty()) cfg.snapshot_path = serve_snapshot;
      if (!serve_history.empty()) cfg.history_dir = serve_history;
      cfg.questionnaire_dir = questionnaire_dir;
      cfg.scoring.policy = parse_policy_arg(defaults.policy);
      cfg.method = service::parse_method(defaults.method);
      cfg.cr_threshold = defaults.cr_threshold;
      const auto colon = bind.rfind(':');
      if (colon == std::string::npos) throw Error(ErrorKind::Validation, "--bind must be host:port");
      const std::string host = bind.substr(0, colon);
      const int port = std::stoi(bind.substr(colon + 1));
      service::Service svc(cfg);
      httplib::Server server;
      service::mount(server, svc);
      std::cerr << "listening on " << host << ":" << port << "\n";
      if (!server.listen(host, port)) throw Error(ErrorKind::Io, "cannot listen on " + bind);
      return 0;
    }

    if (*generate) {
      const auto cfg = fixture_config_from_json(read_json_file(fixture_config));
      const auto fixture = generate_fixture(cfg);
      save_inventory(fs::path(out_dir) / "inventory.csv", fixture.inventory);
      save_snapshot(fs::path(out_dir) / "snapshot.csv", fixture.snapshot);
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error (" << to_string(e.kind()) << "): " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error (io): " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
