#include "genui/gateway/search.h"

#include <cstdlib>
#include <future>
#include <thread>

#include "genui/net/http_client.h"
#include "genui/util/files.h"
#include "genui/util/strings.h"

namespace genui::gateway {

nlohmann::json to_json(const SearchResult& r) {
  nlohmann::json snippets = nlohmann::json::array();
  for (const auto& s : r.snippets) {
    snippets.push_back({{"title", s.title}, {"url", s.url}, {"text", s.text}});
  }
  nlohmann::json j = {{"query", r.query}, {"snippets", snippets}, {"error", r.error}};
  if (r.error) j["message"] = r.error_message;
  return j;
}

MockSearchProvider::MockSearchProvider(std::map<std::string, std::vector<Snippet>> fixtures) {
  for (auto& [q, s] : fixtures) fixtures_[to_lower(trim(q))] = std::move(s);
}

std::shared_ptr<MockSearchProvider> MockSearchProvider::from_file(
    const std::filesystem::path& path) {
  auto doc = nlohmann::json::parse(read_file(path));
  std::map<std::string, std::vector<Snippet>> fixtures;
  for (const auto& [query, items] : doc.items()) {
    auto& list = fixtures[query];
    for (const auto& it : items) {
      list.push_back({it.at("title").get<std::string>(), it.at("url").get<std::string>(),
                      it.at("text").get<std::string>()});
    }
  }
  return std::make_shared<MockSearchProvider>(std::move(fixtures));
}

SearchResult MockSearchProvider::search(const std::string& query) {
  SearchResult r;
  r.query = query;
  auto it = fixtures_.find(to_lower(trim(query)));
  if (it != fixtures_.end()) {
    r.snippets = it->second;
    return r;
  }
  std::uint64_t h = fnv1a64(to_lower(trim(query)));
  int n = 1 + static_cast<int>(h % 3);
  for (int i = 0; i < n; ++i) {
    std::uint64_t hi = splitmix64(h + static_cast<std::uint64_t>(i));
    std::string id = hex64(hi).substr(0, 10);
    r.snippets.push_back(
        {query + " - result " + std::to_string(i + 1),
         "https://search.example.org/" + id,
         "Reference entry " + id + " about " + query + "."});
  }
  return r;
}

HttpSearchProvider::HttpSearchProvider(std::string name, std::string endpoint,
                                       std::string key_env,
                                       std::chrono::milliseconds timeout)
    : name_(std::move(name)),
      endpoint_(std::move(endpoint)),
      key_env_(std::move(key_env)),
      timeout_(timeout) {}

SearchResult HttpSearchProvider::search(const std::string& query) {
  net::Headers headers;
  if (!key_env_.empty()) {
    const char* key = std::getenv(key_env_.c_str());
    if (key == nullptr) throw std::runtime_error("search key env var " + key_env_ + " unset");
    headers["Authorization"] = std::string("Bearer ") + key;
  }
  char sep = endpoint_.find('?') == std::string::npos ? '?' : '&';
  auto res = net::http_get(endpoint_ + sep + "q=" + url_encode(query), headers, timeout_);
  if (!res.ok()) {
    throw std::runtime_error("search provider: " +
                             (res.error.empty() ? "HTTP " + std::to_string(res.status) : res.error));
  }
  auto doc = nlohmann::json::parse(res.body);
  SearchResult r;
  r.query = query;
  for (const auto& it : doc.value("results", nlohmann::json::array())) {
    Snippet s{it.value("title", ""), it.value("url", ""), it.value("snippet", "")};
    if (s.url.find("://") == std::string::npos) continue;  // absolute urls only
    r.snippets.push_back(std::move(s));
  }
  return r;
}

void SearchService::register_provider(std::shared_ptr<SearchProvider> provider) {
  std::lock_guard lock(mu_);
  providers_[provider->name()] = std::move(provider);
}

std::vector<std::string> SearchService::provider_names() const {
  std::lock_guard lock(mu_);
  std::vector<std::string> out;
  for (const auto& [name, p] : providers_) out.push_back(name);
  return out;
}

SearchResult SearchService::search(const std::string& query, const std::string& provider_name) {
  if (is_blank(query)) throw SearchError("empty search query");

  std::shared_ptr<SearchProvider> provider;
  {
    std::lock_guard lock(mu_);
    auto it = providers_.find(provider_name);
    if (it != providers_.end()) provider = it->second;
    auto cached = cache_.find({provider_name, query});
    if (cached != cache_.end()) return cached->second;
  }
  SearchResult failed;
  failed.query = query;
  failed.error = true;
  if (!provider) {
    failed.error_message = "provider unavailable: " + provider_name;
    return failed;
  }

  // The call runs on its own thread so a hung provider cannot hold the
  // caller past the deadline; the thread owns everything it touches.
  auto promise = std::make_shared<std::promise<SearchResult>>();
  auto future = promise->get_future();
  std::thread([provider, query, promise] {
    try {
      promise->set_value(provider->search(query));
    } catch (...) {
      promise->set_exception(std::current_exception());
    }
  }).detach();

  if (future.wait_for(timeout_) != std::future_status::ready) {
    failed.error_message = "provider timeout";
    return failed;
  }
  SearchResult result;
  try {
    result = future.get();
  } catch (const std::exception& e) {
    failed.error_message = e.what();
    return failed;
  }
  result.query = query;
  if (!provider->deterministic()) {
    std::lock_guard lock(mu_);
    cache_[{provider_name, query}] = result;
  }
  return result;
}

}  // namespace genui::gateway
