#pragma once

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include "genui/post/chain.h"
#include "genui/util/files.h"

namespace genui::testing {

inline std::filesystem::path data_dir() { return GENUI_TEST_DATA; }

inline std::vector<std::filesystem::path> files_in(const std::filesystem::path& dir,
                                                   const std::string& ext) {
  std::vector<std::filesystem::path> out;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (e.path().extension() == ext) out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

// Chain config used by fixtures: one placeholder has a secret, the others
// are left unconfigured so they get flagged.
inline post::ChainConfig fixture_chain_config() {
  post::ChainConfig cfg = post::ChainConfig::defaults();
  cfg.secret_env["YOUR_API_KEY"] = "GENUI_TEST_MAPS_KEY";
  cfg.getenv = [](const std::string& name) -> std::optional<std::string> {
    if (name == "GENUI_TEST_MAPS_KEY") return "K123";
    return std::nullopt;
  };
  return cfg;
}

// Compares against a golden file; GENUI_UPDATE_GOLDENS=1 rewrites it.
inline bool matches_golden(const std::filesystem::path& golden, const std::string& actual) {
  const char* update = std::getenv("GENUI_UPDATE_GOLDENS");
  if (update && std::string(update) == "1") {
    write_file_atomic(golden, actual);
    return true;
  }
  if (!std::filesystem::exists(golden)) return false;
  return read_file(golden) == actual;
}

}  // namespace genui::testing
