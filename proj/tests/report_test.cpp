#include <gtest/gtest.h>

#include <sstream>

#include "obsweight/fixtures.hpp"
#include "obsweight/report.hpp"
#include "test_support.hpp"

using namespace obsweight;
using testing_support::bundled_tables;

namespace {

std::vector<ObservabilityScore> sample_scores() {
  FixtureConfig cfg;
  cfg.seed = 22;
  cfg.areas = 4;
  cfg.stations_per_area = 5;
  cfg.signals_per_station = 20;
  cfg.fault_rate = 0.03;
  cfg.instruction_rate = 0.1;
  const auto f = generate_fixture(cfg);
  return score_by_area(f.inventory, f.snapshot, bundled_tables());
}

const Timestamp kWhen = parse_rfc3339("2024-05-01T12:00:00Z");

}  // namespace

TEST(ScoresReport, BodyLayout) {
  const auto doc = scores_report(sample_scores(), "q1", "area", kWhen);
  const auto& b = doc.body;
  EXPECT_EQ(b["snapshot_id"], "q1");
  ASSERT_EQ(b["ranking_unweighted"].size(), 4u);
  ASSERT_EQ(b["ranking_weighted"].size(), 4u);
  EXPECT_EQ(b["ranking_weighted"][0]["rank"], 1);
  // B and C share 97% before weighting; B ranks first on the tie-break.
  EXPECT_EQ(b["ranking_unweighted"][1]["scope"], "B");
  EXPECT_EQ(b["ranking_unweighted"][2]["scope"], "C");
  ASSERT_EQ(b["divergences"].size(), 1u);
  EXPECT_EQ(b["divergences"][0]["higher"], "B");
  EXPECT_EQ(b["divergences"][0]["lower"], "C");
  EXPECT_EQ(b["divergences"][0]["unweighted"], 97);
  EXPECT_EQ(b["totals"]["total_raw"], 400);
}

TEST(ScoresReport, RenderingsAgree) {
  const auto doc = scores_report(sample_scores(), "q1", "area", kWhen);
  const auto j = nlohmann::json::parse(render_json(doc));
  EXPECT_EQ(j["kind"], "scores");
  EXPECT_EQ(j["generated_at"], "2024-05-01T12:00:00Z");

  const std::string csv = render_csv(doc);
  std::istringstream lines(csv);
  std::string line;
  std::getline(lines, line);
  for (const auto& s : j["body"]["scores"]) {
    ASSERT_TRUE(std::getline(lines, line));
    const auto fields = csv::split(line);
    EXPECT_EQ(fields[1], s["scope"].get<std::string>());
    EXPECT_DOUBLE_EQ(std::stod(fields[4]), s["unweighted"].get<double>());
    EXPECT_DOUBLE_EQ(std::stod(fields[7]), s["weighted"].get<double>());
  }

  const std::string text = render_text(doc);
  for (const auto& r : j["body"]["ranking_weighted"]) {
    EXPECT_NE(text.find("%" + std::to_string(r["indicator"].get<int>())), std::string::npos);
  }
  EXPECT_NE(text.find("B and C tie at %97 without weighting"), std::string::npos) << text;
}

TEST(ScoresReport, ScoresRoundTripThroughTheDocument) {
  const auto scores = sample_scores();
  const auto doc = scores_report(scores, "q1", "area", kWhen);
  const auto [id, back] = scores_from_document(nlohmann::json::parse(render_json(doc)));
  EXPECT_EQ(id, "q1");
  ASSERT_EQ(back.size(), scores.size());
  for (std::size_t i = 0; i < back.size(); ++i) EXPECT_EQ(back[i].weighted, round_to(scores[i].weighted, 2));
}

TEST(WeightsReport, RoundsToTwoDecimals) {
  WeightDerivation d;
  d.tables = bundled_tables();
  d.tables.m_table[ComponentKind::BUSBAR][QuantityKind::KV] = 71.104999;
  const auto doc = weights_report(d, kWhen);
  EXPECT_EQ(doc.body["m_table"]["BUSBAR"]["KV"].get<double>(), 71.1);
  const auto csv = render_csv(doc);
  EXPECT_NE(csv.find("M,TRANSMISSION_LINE,KV,6.27\n"), std::string::npos);
  EXPECT_NE(csv.find("N,KV,TRANSMISSION_LINE,14.53\n"), std::string::npos);
}

TEST(ComparisonReport, CountsTrends) {
  std::vector<ObservabilityScore> before = {{"J", 100, 20, 80, 1000, 200, 80}, {"K", 100, 3, 97, 100, 3, 97}};
  std::vector<ObservabilityScore> after = {{"J", 100, 16, 84, 1000, 160, 84}, {"K", 100, 3, 97, 100, 3, 96}};
  const auto doc = comparison_report(compare_snapshots(before, after), "q1", "q2", kWhen);
  EXPECT_EQ(doc.body["weighted_summary"]["improved"], 1);
  EXPECT_EQ(doc.body["weighted_summary"]["declined"], 1);
  EXPECT_EQ(doc.body["entries"][0]["weighted_delta"], 4.0);
  EXPECT_NE(render_csv(doc).find("J,80.00,84.00,4.00,improved,80.00,84.00,4.00,improved"), std::string::npos);
  EXPECT_NE(render_text(doc).find("improved"), std::string::npos);
}

TEST(ReportFormat, Parse) {
  EXPECT_EQ(parse_format("json"), ReportFormat::Json);
  EXPECT_EQ(parse_format("csv"), ReportFormat::Csv);
  EXPECT_THROW(parse_format("xml"), Error);
}
