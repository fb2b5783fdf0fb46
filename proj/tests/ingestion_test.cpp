#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "obsweight/fixtures.hpp"
#include "obsweight/history.hpp"
#include "obsweight/ingestion.hpp"
#include "test_support.hpp"

using namespace obsweight;
using testing_support::bundled_tables;
using testing_support::temp_dir;

namespace {

const std::string kFourRows =
    "signal_id,area,station,component,quantity,in_instruction,weighted_scope\n"
    "g1,A,S1,GENERATOR,MW,0,1\n"
    "l1,A,S1,TRANSMISSION_LINE,KV,1,1\n"
    "b1,B,S2,BUSBAR,STATUS,0,0\n"
    "r1,B,S2,REACTOR_CAPACITOR,MV,0,1\n";

Inventory four() {
  std::istringstream in(kFourRows);
  return parse_inventory(in, "inv.csv");
}

std::string inventory_error(const std::string& text) {
  std::istringstream in(text);
  try {
    parse_inventory(in, "inv.csv");
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

std::vector<SnapshotRecord> records(const std::string& body) {
  std::istringstream in(std::string(kSnapshotHeader) + "\n" + body);
  return parse_snapshot_records(in, "snap.csv");
}

}  // namespace

TEST(Csv, SplitAndQuote) {
  EXPECT_EQ(csv::split("a,b,,c"), (std::vector<std::string>{"a", "b", "", "c"}));
  EXPECT_EQ(csv::split("\"x,y\",\"he said \"\"hi\"\"\""), (std::vector<std::string>{"x,y", "he said \"hi\""}));
  EXPECT_EQ(csv::quote("plain"), "plain");
  EXPECT_EQ(csv::split(csv::quote("a,\"b\"")), std::vector<std::string>{"a,\"b\""});
  EXPECT_THROW(csv::parse_bool("yes"), Error);
}

TEST(LoadInventory, WellFormedFile) {
  const auto inv = four();
  ASSERT_EQ(inv.signals.size(), 4u);
  EXPECT_EQ(inv.signals[1].component, ComponentKind::TRANSMISSION_LINE);
  EXPECT_TRUE(inv.signals[1].in_instruction);
  EXPECT_FALSE(inv.signals[2].weighted_scope);
  EXPECT_EQ(inv.signals[3].quantity, QuantityKind::MVAR);
}

TEST(LoadInventory, CrlfAndBomAreTolerated) {
  std::string text = "\xEF\xBB\xBF" + kFourRows;
  std::string crlf;
  for (char c : text) {
    if (c == '\n') crlf += '\r';
    crlf += c;
  }
  std::istringstream in(crlf);
  EXPECT_EQ(parse_inventory(in).signals, four().signals);
}

TEST(LoadInventory, ErrorsCarryLineNumbers) {
  const std::string header = "signal_id,area,station,component,quantity,in_instruction,weighted_scope\n";
  EXPECT_EQ(inventory_error(header + "g1,A,S1,GENERATOR,MW,0,1\nb1,A,S1,BUSBAR,TAP,0,1\n"),
            "inv.csv:3: BUSBAR does not report TAP (applicable: KV, STATUS)");
  EXPECT_EQ(inventory_error(header + "g1,A,S1,GENERATOR,MW,0,1\ng1,A,S1,GENERATOR,KV,0,1\n"),
            "inv.csv:3: duplicate signal_id 'g1'");
  EXPECT_EQ(inventory_error(header + "g1,A,S1,GENERATOR,MW,0\n"), "inv.csv:2: expected 7 fields, got 6");
  EXPECT_NE(inventory_error("id,area\n").find("inv.csv:1: expected header"), std::string::npos);
  EXPECT_NE(inventory_error(header + "g1,A,S1,PUMP,MW,0,1\n").find("inv.csv:2:"), std::string::npos);
}

TEST(LoadInventory, TaxonomyErrorKind) {
  std::istringstream in("signal_id,area,station,component,quantity,in_instruction,weighted_scope\n"
                        "b1,A,S1,BUSBAR,TAP,0,1\n");
  try {
    parse_inventory(in);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Taxonomy);
  }
}

TEST(LoadInventory, MissingFileIsIoError) {
  try {
    load_inventory("/nonexistent/inventory.csv");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Io);
    EXPECT_EQ(exit_code_for(e.kind()), 2);
  }
}

TEST(Snapshot, CompleteSnapshot) {
  const auto set = reconcile_snapshot("s1",
                                      records("g1,V,0,2024-03-01T10:00:00Z\n"
                                              "l1,F,0,2024-03-01T10:00:05Z\n"
                                              "b1,M,0,2024-03-01T10:00:01Z\n"
                                              "r1,V,1,2024-03-01T10:00:02Z\n"),
                                      four());
  ASSERT_EQ(set.records.size(), 4u);
  EXPECT_EQ(set.records[3].se_flagged, true);
  EXPECT_EQ(format_rfc3339(set.taken_at), "2024-03-01T10:00:05Z");
}

TEST(Snapshot, MissingSignalBecomesFaulty) {
  const auto set = reconcile_snapshot("s1",
                                      records("r1,V,0,2024-03-01T10:00:00Z\n"
                                              "g1,V,0,2024-03-01T10:00:00Z\n"
                                              "b1,V,0,2024-03-01T10:00:00Z\n"),
                                      four());
  ASSERT_EQ(set.records.size(), 4u);
  // Inventory order, with the gap filled.
  EXPECT_EQ(set.records[0].signal_id, "g1");
  EXPECT_EQ(set.records[1].signal_id, "l1");
  EXPECT_EQ(set.records[1].tag, ValidityTag::FAULTY);
  EXPECT_THROW(reconcile_snapshot("s1", records("g1,V,0,2024-03-01T10:00:00Z\n"), four(), MissingRecords::Error),
               Error);
}

TEST(Snapshot, OrphansAreListed) {
  try {
    reconcile_snapshot("s1",
                       records("g1,V,0,2024-03-01T10:00:00Z\n"
                               "zz,V,0,2024-03-01T10:00:00Z\n"),
                       four());
    FAIL();
  } catch (const ListError& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Reconciliation);
    EXPECT_EQ(e.items(), std::vector<std::string>{"zz"});
  }
}

TEST(Snapshot, ParseErrors) {
  EXPECT_THROW(records("g1,Q,0,2024-03-01T10:00:00Z\n"), Error);
  EXPECT_THROW(records("g1,F,1,2024-03-01T10:00:00Z\n"), Error);
  EXPECT_THROW(records("g1,V,0,2024-03-01 10:00:00\n"), Error);
  try {
    records("g1,V,0,2024-03-01T10:00:00Z\ng2,X,0,2024-03-01T10:00:00Z\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Parse);
    EXPECT_EQ(std::string(e.what()).rfind("snap.csv:3:", 0), 0u) << e.what();
  }
}

TEST(Time, Rfc3339) {
  EXPECT_EQ(format_rfc3339(parse_rfc3339("2024-02-29T23:59:59Z")), "2024-02-29T23:59:59Z");
  EXPECT_EQ(format_rfc3339(parse_rfc3339("2024-02-29T23:59:59.120Z")), "2024-02-29T23:59:59.120Z");
  EXPECT_EQ(parse_rfc3339("2024-01-01T00:00:00+00:00"), parse_rfc3339("2024-01-01T00:00:00Z"));
  EXPECT_THROW(parse_rfc3339("2024-01-01T00:00:00+03:30"), Error);
  EXPECT_THROW(parse_rfc3339("2024-13-01T00:00:00Z"), Error);
}

TEST(RoundTrip, InventoryAndSnapshotFiles) {
  FixtureConfig cfg;
  cfg.seed = 99;
  cfg.areas = 3;
  cfg.stations_per_area = 2;
  cfg.signals_per_station = 10;
  cfg.out_of_scope_rate = 0.2;
  cfg.se_flag_rate = 0.1;
  const auto f = generate_fixture(cfg);
  const auto dir = temp_dir("roundtrip");
  save_inventory(dir / "inv.csv", f.inventory);
  save_snapshot(dir / "snap.csv", f.snapshot);
  const auto inv = load_inventory(dir / "inv.csv");
  EXPECT_EQ(inv.signals, f.inventory);
  const auto snap = load_snapshot(dir / "snap.csv", inv);
  EXPECT_EQ(snap.records, f.snapshot);
  EXPECT_EQ(snap.snapshot_id, "snap");
  // Re-serialization is byte-identical.
  save_inventory(dir / "inv2.csv", inv.signals);
  EXPECT_EQ(read_file(dir / "inv.csv"), read_file(dir / "inv2.csv"));
  std::filesystem::remove_all(dir);
}

TEST(RoundTrip, QuotedIdentifiers) {
  std::vector<SignalDescriptor> sigs = {{"a,1", "North \"X\"", "S 1", ComponentKind::BUSBAR, QuantityKind::KV, false, true}};
  std::ostringstream out;
  write_inventory(out, sigs);
  std::istringstream in(out.str());
  EXPECT_EQ(parse_inventory(in).signals, sigs);
}

TEST(History, AppendThenReadIsBitIdentical) {
  FixtureConfig cfg;
  cfg.areas = 5;
  const auto f = generate_fixture(cfg);
  const auto scores = score_by_area(f.inventory, f.snapshot, bundled_tables());
  const auto dir = temp_dir("history");
  {
    HistoryStore store(dir);
    store.append("2024-q1", parse_rfc3339("2024-01-01T00:00:00Z"), scores);
    const auto back = store.read("2024-q1");
    EXPECT_EQ(back.scores, scores);
    EXPECT_EQ(read_file(dir / "2024-q1.json"), read_file(dir / "2024-q1.json"));
  }
  HistoryStore reopened(dir);
  EXPECT_EQ(reopened.read("2024-q1").scores, scores);
  std::filesystem::remove_all(dir);
}

TEST(History, DuplicateIdIsConflict) {
  const auto dir = temp_dir("history-dup");
  HistoryStore store(dir);
  std::vector<ObservabilityScore> s = {{"A", 10, 1, 90, 100, 5, 95}};
  store.append("x", parse_rfc3339("2024-01-01T00:00:00Z"), s);
  try {
    store.append("x", parse_rfc3339("2024-02-01T00:00:00Z"), s);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Conflict);
  }
  EXPECT_THROW(store.read("nope"), Error);
  EXPECT_THROW(store.append("../evil", parse_rfc3339("2024-01-01T00:00:00Z"), s), Error);
  std::filesystem::remove_all(dir);
}

TEST(History, OutOfOrderAppendsAreSorted) {
  const auto dir = temp_dir("history-order");
  {
    HistoryStore store(dir);
    std::vector<ObservabilityScore> s = {{"A", 10, 1, 90, 100, 5, 95}};
    store.append("late", parse_rfc3339("2024-04-01T00:00:00Z"), s);
    store.append("early", parse_rfc3339("2024-01-01T00:00:00Z"), s);
    store.append("mid", parse_rfc3339("2024-02-01T00:00:00Z"), s);
  }
  HistoryStore store(dir);
  const auto e = store.entries();
  ASSERT_EQ(e.size(), 3u);
  EXPECT_EQ(e[0].snapshot_id, "early");
  EXPECT_EQ(e[1].snapshot_id, "mid");
  EXPECT_EQ(e[2].snapshot_id, "late");
  EXPECT_EQ(store.latest()->snapshot_id, "late");
  std::filesystem::remove_all(dir);
}

TEST(Fixtures, DeterministicPerSeed) {
  FixtureConfig cfg;
  cfg.seed = 1234;
  const auto a = generate_fixture(cfg);
  const auto b = generate_fixture(cfg);
  EXPECT_EQ(a.inventory, b.inventory);
  EXPECT_EQ(a.snapshot, b.snapshot);
  cfg.seed = 1235;
  EXPECT_NE(generate_fixture(cfg).snapshot, a.snapshot);
  EXPECT_EQ(a.inventory.size(), 16u * 10 * 20);
  EXPECT_EQ(a.inventory.front().signal_id, "A-S001-0001");
  EXPECT_EQ(area_name(0), "A");
  EXPECT_EQ(area_name(25), "Z");
  EXPECT_EQ(area_name(26), "AA");
}

TEST(Fixtures, ConfigJson) {
  const auto j = nlohmann::json::parse(
      R"({"seed": 7, "areas": 2, "stations_per_area": 3, "signals_per_station": 4,
          "fault_rate": 0.1, "instruction_rate": 0.2})");
  const auto c = fixture_config_from_json(j);
  EXPECT_EQ(c.seed, 7u);
  EXPECT_EQ(c.out_of_scope_rate, 0.0);
  const auto back = fixture_config_from_json(fixture_config_to_json(c));
  EXPECT_EQ(generate_fixture(back).snapshot, generate_fixture(c).snapshot);
  EXPECT_THROW(fixture_config_from_json(nlohmann::json::parse(R"({"seed": 1})")), Error);
}
