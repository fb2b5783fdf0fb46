#pragma once

// Seeded synthetic inventories and snapshots shaped like a national grid:
// areas of stations, each station with a random mix of applicable signals.
// Only raw mt19937_64 output is used, so fixtures are identical across
// standard libraries.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "obsweight/error.hpp"
#include "obsweight/observability.hpp"
#include "obsweight/taxonomy.hpp"
#include "obsweight/time.hpp"
#include "obsweight/weight_tables.hpp"

namespace obsweight {

struct FixtureConfig {
  std::uint64_t seed = 1;
  std::size_t areas = 16;
  std::size_t stations_per_area = 10;
  std::size_t signals_per_station = 20;
  double fault_rate = 0.05;
  double instruction_rate = 0.1;
  // Optional extras, absent from most configs.
  double out_of_scope_rate = 0.0;
  double se_flag_rate = 0.0;
  Timestamp taken_at = parse_rfc3339("2024-01-01T00:00:00Z");
};

struct Fixture {
  std::vector<SignalDescriptor> inventory;
  std::vector<SnapshotRecord> snapshot;
};

/// Spreadsheet-style names: A..Z, AA, AB, ...
inline std::string area_name(std::size_t index) {
  std::string out;
  ++index;
  while (index > 0) {
    --index;
    out.insert(out.begin(), static_cast<char>('A' + index % 26));
    index /= 26;
  }
  return out;
}

inline Fixture generate_fixture(const FixtureConfig& cfg) {
  auto check_rate = [](double r, const char* name) {
    if (!(r >= 0.0 && r <= 1.0)) {
      throw Error(ErrorKind::Validation, std::string("fixture ") + name + " must be in [0, 1]");
    }
  };
  check_rate(cfg.fault_rate, "fault_rate");
  check_rate(cfg.instruction_rate, "instruction_rate");
  check_rate(cfg.out_of_scope_rate, "out_of_scope_rate");
  check_rate(cfg.se_flag_rate, "se_flag_rate");

  std::mt19937_64 rng(cfg.seed);
  auto uniform = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  auto pick = [&](std::size_t n) {
    return std::min(n - 1, static_cast<std::size_t>(uniform() * static_cast<double>(n)));
  };
  constexpr auto pairs = applicability_pairs();
  constexpr ValidityTag bad_tags[] = {ValidityTag::FAULTY, ValidityTag::NON_CURRENT,
                                      ValidityTag::INVALID};

  Fixture f;
  f.inventory.reserve(cfg.areas * cfg.stations_per_area * cfg.signals_per_station);
  f.snapshot.reserve(f.inventory.capacity());
  char buf[64];
  for (std::size_t a = 0; a < cfg.areas; ++a) {
    const std::string area = area_name(a);
    for (std::size_t st = 0; st < cfg.stations_per_area; ++st) {
      std::snprintf(buf, sizeof(buf), "S%03zu", st + 1);
      const std::string station = buf;
      for (std::size_t k = 0; k < cfg.signals_per_station; ++k) {
        std::snprintf(buf, sizeof(buf), "-%04zu", k + 1);
        SignalDescriptor s;
        s.signal_id = area + "-" + station + buf;
        s.area = area;
        s.station = station;
        const auto pair = pairs[pick(pairs.size())];
        s.component = pair.component;
        s.quantity = pair.quantity;
        s.in_instruction = uniform() < cfg.instruction_rate;
        s.weighted_scope = !(uniform() < cfg.out_of_scope_rate);

        SnapshotRecord r{s.signal_id, ValidityTag::VALID, false, cfg.taken_at};
        if (uniform() < cfg.fault_rate) {
          r.tag = bad_tags[pick(3)];
        } else if (uniform() < cfg.se_flag_rate) {
          r.se_flagged = true;
        }
        f.inventory.push_back(std::move(s));
        f.snapshot.push_back(std::move(r));
      }
    }
  }
  return f;
}

inline nlohmann::json fixture_config_to_json(const FixtureConfig& c) {
  return {{"seed", c.seed},
          {"areas", c.areas},
          {"stations_per_area", c.stations_per_area},
          {"signals_per_station", c.signals_per_station},
          {"fault_rate", c.fault_rate},
          {"instruction_rate", c.instruction_rate},
          {"out_of_scope_rate", c.out_of_scope_rate},
          {"se_flag_rate", c.se_flag_rate},
          {"taken_at", format_rfc3339(c.taken_at)}};
}

/// {seed, areas, stations_per_area, signals_per_station, fault_rate,
/// instruction_rate} are required; out_of_scope_rate, se_flag_rate and
/// taken_at are optional.
inline FixtureConfig fixture_config_from_json(const nlohmann::json& j) {
  const std::string where = "fixture config";
  FixtureConfig c;
  c.seed = detail::require_index(detail::require_field(j, "seed", where), where + ".seed");
  c.areas = detail::require_index(detail::require_field(j, "areas", where), where + ".areas");
  c.stations_per_area = detail::require_index(detail::require_field(j, "stations_per_area", where),
                                              where + ".stations_per_area");
  c.signals_per_station = detail::require_index(
      detail::require_field(j, "signals_per_station", where), where + ".signals_per_station");
  c.fault_rate =
      detail::require_number(detail::require_field(j, "fault_rate", where), where + ".fault_rate");
  c.instruction_rate = detail::require_number(detail::require_field(j, "instruction_rate", where),
                                              where + ".instruction_rate");
  if (j.contains("out_of_scope_rate")) {
    c.out_of_scope_rate = detail::require_number(j.at("out_of_scope_rate"), where + ".out_of_scope_rate");
  }
  if (j.contains("se_flag_rate")) {
    c.se_flag_rate = detail::require_number(j.at("se_flag_rate"), where + ".se_flag_rate");
  }
  if (j.contains("taken_at")) {
    c.taken_at = parse_rfc3339(detail::require_string(j.at("taken_at"), where + ".taken_at"));
  }
  return c;
}

}  // namespace obsweight
