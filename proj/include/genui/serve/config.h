#pragma once

// Server configuration: a JSON file plus GENUI_* environment overrides.
//
//   {
//     "host": "127.0.0.1", "port": 8080, "workers": 4,
//     "store": "genui-store", "prompt_dir": "...", "static_dir": "...",
//     "default_backend": "mock", "default_style": "default", "default_profile": "full",
//     "backends": [{"name": "mock", "kind": "mock", "params": {"fixtures": "..."}}],
//     "search": {"provider": "mock", "fixtures": "...",
//                "providers": [{"name", "endpoint", "key_env"}]},
//     "images": {"search": {"name", "endpoint", "key_env"}, "gen": {...},
//                "long_edge": 512, "cache_dir": "", "ttl_days": 7},
//     "chain": { post-chain overrides },
//     "caps": {"client_errors": 200},
//     "deadlines": {"generation_ms": 180000, "search_ms": 20000},
//     "location": "Zurich, Switzerland"
//   }
//
// Credentials are always environment variable names, never values.

#include <chrono>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "genui/gateway/backend.h"

namespace genui::serve {

struct ProviderSpec {
  std::string name = "mock";  // "mock" selects the built-in provider
  std::string endpoint;
  std::string key_env;
};

struct ServeConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  int workers = 4;
  std::filesystem::path store_dir = "genui-store";
  std::filesystem::path prompt_dir;
  std::filesystem::path static_dir;
  std::string default_backend = "mock";
  std::string default_style = "default";
  std::string default_profile = "full";
  std::vector<gateway::BackendDescriptor> backends;

  std::string search_provider = "mock";
  std::filesystem::path search_fixtures;
  std::vector<ProviderSpec> search_providers;

  ProviderSpec image_search;
  ProviderSpec image_gen;
  int image_long_edge = 512;
  std::filesystem::path image_cache_dir;  // empty: <store>/assets
  int image_ttl_days = 7;

  nlohmann::json chain = nlohmann::json::object();
  std::size_t max_client_errors = 200;
  std::chrono::milliseconds generation_deadline{180000};
  std::chrono::milliseconds search_timeout{20000};
  std::optional<std::string> location;

  // Mock backend over the bundled fixtures, resources from resource_dir().
  static ServeConfig defaults();
  // Throws std::invalid_argument on bad values.
  static ServeConfig from_json(const nlohmann::json& j, ServeConfig base = defaults());

  using Getenv = std::function<std::optional<std::string>(const std::string&)>;
  // GENUI_HOST, GENUI_PORT, GENUI_WORKERS, GENUI_STORE, GENUI_BACKEND,
  // GENUI_MAX_CLIENT_ERRORS, GENUI_DEADLINE_MS.
  void apply_env(const Getenv& getenv);

  // Defaults, then the file (when given), then the process environment.
  static ServeConfig load(const std::optional<std::filesystem::path>& file);
};

}  // namespace genui::serve
