#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "obsweight/ingestion.hpp"
#include "obsweight/weight_tables.hpp"

namespace testing_support {

inline std::filesystem::path data_dir() { return OBSWEIGHT_DATA_DIR; }

inline const obsweight::WeightTables& bundled_tables() {
  static const obsweight::WeightTables t = obsweight::load_tables(data_dir() / "tables_reference.json");
  return t;
}

// Fresh empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& name) {
  static std::mt19937_64 rng(std::random_device{}());
  auto p = std::filesystem::temp_directory_path() / ("obsweight-" + name + "-" + std::to_string(rng()));
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace testing_support
