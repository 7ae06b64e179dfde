#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace genui::gateway {

struct Snippet {
  std::string title;
  std::string url;  // always absolute
  std::string text;
};

struct SearchResult {
  std::string query;
  std::vector<Snippet> snippets;
  bool error = false;
  std::string error_message;
};

nlohmann::json to_json(const SearchResult& r);

class SearchError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class SearchProvider {
 public:
  virtual ~SearchProvider() = default;
  virtual std::string name() const = 0;
  // May throw; SearchService turns failures into error-flagged results.
  virtual SearchResult search(const std::string& query) = 0;
  // Deterministic providers are not cached (they are already pure).
  virtual bool deterministic() const { return false; }
};

// Fixture snippets for known queries (case-insensitive), hash-derived
// snippets for everything else.
class MockSearchProvider final : public SearchProvider {
 public:
  MockSearchProvider() = default;
  explicit MockSearchProvider(std::map<std::string, std::vector<Snippet>> fixtures);
  // JSON object: {"<query>": [{"title","url","text"}, ...], ...}
  static std::shared_ptr<MockSearchProvider> from_file(const std::filesystem::path& path);

  std::string name() const override { return "mock"; }
  SearchResult search(const std::string& query) override;
  bool deterministic() const override { return true; }

 private:
  std::map<std::string, std::vector<Snippet>> fixtures_;  // keyed by lowercased query
};

// GET <endpoint>?q=<query> with an optional bearer token read from an
// environment variable. Expects {"results":[{"title","url","snippet"}]}.
class HttpSearchProvider final : public SearchProvider {
 public:
  HttpSearchProvider(std::string name, std::string endpoint, std::string key_env,
                     std::chrono::milliseconds timeout);
  std::string name() const override { return name_; }
  SearchResult search(const std::string& query) override;

 private:
  std::string name_;
  std::string endpoint_;
  std::string key_env_;
  std::chrono::milliseconds timeout_;
};

class SearchService {
 public:
  explicit SearchService(std::chrono::milliseconds timeout = std::chrono::seconds(20))
      : timeout_(timeout) {}

  void register_provider(std::shared_ptr<SearchProvider> provider);
  std::vector<std::string> provider_names() const;

  // Throws SearchError for an empty query. Every other failure (unknown
  // provider, provider exception, deadline) yields an error-flagged empty
  // result.
  SearchResult search(const std::string& query, const std::string& provider);

  void set_timeout(std::chrono::milliseconds t) { timeout_ = t; }

 private:
  mutable std::mutex mu_;
  std::map<std::string, std::shared_ptr<SearchProvider>> providers_;
  std::map<std::pair<std::string, std::string>, SearchResult> cache_;
  std::chrono::milliseconds timeout_;
};

}  // namespace genui::gateway
