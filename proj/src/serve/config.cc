#include "genui/serve/config.h"

#include <cstdlib>
#include <stdexcept>

#include "genui/util/files.h"
#include "genui/util/resources.h"

namespace genui::serve {

using Json = nlohmann::json;

namespace {

ProviderSpec provider_from_json(const Json& j) {
  ProviderSpec p;
  p.name = j.value("name", "mock");
  p.endpoint = j.value("endpoint", "");
  p.key_env = j.value("key_env", "");
  if (p.name != "mock" && p.endpoint.empty()) {
    throw std::invalid_argument("provider " + p.name + " needs an endpoint");
  }
  if (j.contains("key")) throw std::invalid_argument("provider credentials must be given as key_env");
  return p;
}

int parse_int(const std::string& name, const std::string& v) {
  try {
    std::size_t used = 0;
    int n = std::stoi(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return n;
  } catch (const std::exception&) {
    throw std::invalid_argument(name + " must be an integer, got \"" + v + "\"");
  }
}

}  // namespace

ServeConfig ServeConfig::defaults() {
  ServeConfig c;
  auto res = resource_dir();
  c.prompt_dir = res / "prompt";
  c.static_dir = res / "static";
  c.search_fixtures = res / "search" / "fixtures.json";
  gateway::BackendDescriptor mock;
  mock.name = "mock";
  mock.kind = gateway::BackendKind::kMock;
  mock.params["fixtures"] = (res / "mock").string();
  c.backends.push_back(mock);
  return c;
}

ServeConfig ServeConfig::from_json(const Json& j, ServeConfig c) {
  if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
  c.host = j.value("host", c.host);
  c.port = j.value("port", c.port);
  c.workers = j.value("workers", c.workers);
  if (j.contains("store")) c.store_dir = j.at("store").get<std::string>();
  if (j.contains("prompt_dir")) c.prompt_dir = j.at("prompt_dir").get<std::string>();
  if (j.contains("static_dir")) c.static_dir = j.at("static_dir").get<std::string>();
  c.default_backend = j.value("default_backend", c.default_backend);
  c.default_style = j.value("default_style", c.default_style);
  c.default_profile = j.value("default_profile", c.default_profile);
  if (j.contains("backends")) {
    c.backends.clear();
    for (const auto& b : j.at("backends")) {
      gateway::BackendDescriptor d;
      d.name = b.at("name").get<std::string>();
      auto kind = gateway::backend_kind_from_string(b.at("kind").get<std::string>());
      if (!kind) throw std::invalid_argument("unknown backend kind for " + d.name);
      d.kind = *kind;
      const Json params = b.value("params", Json::object());
      for (const auto& [k, v] : params.items()) {
        d.params[k] = v.is_string() ? v.get<std::string>() : v.dump();
      }
      d.validate();
      c.backends.push_back(std::move(d));
    }
  }
  if (j.contains("search")) {
    const Json& s = j.at("search");
    c.search_provider = s.value("provider", c.search_provider);
    if (s.contains("fixtures")) c.search_fixtures = s.at("fixtures").get<std::string>();
    for (const auto& p : s.value("providers", Json::array())) {
      c.search_providers.push_back(provider_from_json(p));
    }
  }
  if (j.contains("images")) {
    const Json& im = j.at("images");
    if (im.contains("search")) c.image_search = provider_from_json(im.at("search"));
    if (im.contains("gen")) c.image_gen = provider_from_json(im.at("gen"));
    c.image_long_edge = im.value("long_edge", c.image_long_edge);
    if (im.contains("cache_dir")) c.image_cache_dir = im.at("cache_dir").get<std::string>();
    c.image_ttl_days = im.value("ttl_days", c.image_ttl_days);
  }
  if (j.contains("chain")) c.chain = j.at("chain");
  if (j.contains("caps")) {
    c.max_client_errors = j.at("caps").value("client_errors", c.max_client_errors);
  }
  if (j.contains("deadlines")) {
    const Json& d = j.at("deadlines");
    c.generation_deadline = std::chrono::milliseconds(
        d.value("generation_ms", static_cast<long>(c.generation_deadline.count())));
    c.search_timeout =
        std::chrono::milliseconds(d.value("search_ms", static_cast<long>(c.search_timeout.count())));
  }
  if (j.contains("location")) c.location = j.at("location").get<std::string>();
  if (c.workers < 1) throw std::invalid_argument("workers must be at least 1");
  if (c.image_long_edge < 16) throw std::invalid_argument("images.long_edge is too small");
  return c;
}

void ServeConfig::apply_env(const Getenv& getenv) {
  if (auto v = getenv("GENUI_HOST")) host = *v;
  if (auto v = getenv("GENUI_PORT")) port = parse_int("GENUI_PORT", *v);
  if (auto v = getenv("GENUI_WORKERS")) workers = parse_int("GENUI_WORKERS", *v);
  if (auto v = getenv("GENUI_STORE")) store_dir = *v;
  if (auto v = getenv("GENUI_BACKEND")) default_backend = *v;
  if (auto v = getenv("GENUI_MAX_CLIENT_ERRORS")) {
    max_client_errors = static_cast<std::size_t>(parse_int("GENUI_MAX_CLIENT_ERRORS", *v));
  }
  if (auto v = getenv("GENUI_DEADLINE_MS")) {
    generation_deadline = std::chrono::milliseconds(parse_int("GENUI_DEADLINE_MS", *v));
  }
}

ServeConfig ServeConfig::load(const std::optional<std::filesystem::path>& file) {
  ServeConfig c = defaults();
  if (file) c = from_json(Json::parse(read_file(*file)), std::move(c));
  c.apply_env([](const std::string& name) -> std::optional<std::string> {
    const char* v = std::getenv(name.c_str());
    if (!v) return std::nullopt;
    return std::string(v);
  });
  return c;
}

}  // namespace genui::serve
