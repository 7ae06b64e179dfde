#pragma once

#include <cstdlib>
#include <filesystem>
#include <string>
#include <unistd.h>

#include "genui/serve/service.h"
#include "genui/util/resources.h"

namespace genui::testing {

inline std::filesystem::path fresh_dir(const std::string& name) {
  static int counter = 0;
  auto p = std::filesystem::temp_directory_path() /
           ("genui_" + name + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
  std::filesystem::remove_all(p);
  return p;
}

// Mock fixtures plus scripted backends for failure injection.
inline serve::ServeConfig test_serve_config(const std::filesystem::path& store) {
  ::setenv("GENUI_TEST_MAPS_KEY", "K123", 1);
  auto mock_dir = resource_dir() / "mock";
  nlohmann::json j = {
      {"store", store.string()},
      {"workers", 4},
      {"backends",
       {{{"name", "mock"}, {"kind", "mock"}, {"params", {{"fixtures", mock_dir.string()}}}},
        {{"name", "slow"},
         {"kind", "mock"},
         {"params", {{"fixtures", mock_dir.string()}, {"chunk_delay_ms", "150"}}}},
        {{"name", "malformed"},
         {"kind", "scripted"},
         {"params",
          {{"transcript", (mock_dir / "scripted_good.txt").string()},
           {"malformed_transcript", (mock_dir / "scripted_malformed.txt").string()},
           {"failure_rate", "1"}}}},
        {{"name", "stalled"},
         {"kind", "scripted"},
         {"params",
          {{"transcript", (mock_dir / "scripted_good.txt").string()}, {"stall_ms", "5000"}}}}}},
      {"chain", {{"secrets", {{"YOUR_API_KEY", "GENUI_TEST_MAPS_KEY"}}}}},
      {"deadlines", {{"generation_ms", 1500}}},
  };
  return serve::ServeConfig::from_json(j);
}

inline const char* kFractalsPrompt = "Explain fractals with an interactive Mandelbrot explorer";
inline const char* kSingaporePrompt = "Plan a weekend in Singapore near the Intercontinental";

}  // namespace genui::testing
