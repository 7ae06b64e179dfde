#include "genui/gateway/backend.h"

#include <condition_variable>
#include <cstdlib>
#include <deque>
#include <mutex>

#include <json.hpp>

#include "genui/net/http_client.h"
#include "genui/util/files.h"
#include "genui/util/strings.h"

namespace genui::gateway {

namespace {

using Json = nlohmann::json;

// Sleeps unless stop is requested first. Returns false when stopped.
bool interruptible_sleep(std::chrono::milliseconds d, std::stop_token stop) {
  if (d.count() <= 0) return !stop.stop_requested();
  std::mutex m;
  std::condition_variable_any cv;
  std::unique_lock lock(m);
  return !cv.wait_for(lock, stop, d, [] { return false; });
}

std::string require_param(const BackendDescriptor& d, const std::string& key) {
  auto it = d.params.find(key);
  if (it == d.params.end() || it->second.empty()) {
    throw BackendError(BackendError::Code::kInvalidDescriptor,
                       "backend '" + d.name + "' (" + std::string(to_string(d.kind)) +
                           ") requires param '" + key + "'");
  }
  return it->second;
}

std::string param_or(const BackendDescriptor& d, const std::string& key, std::string fallback) {
  auto it = d.params.find(key);
  return it == d.params.end() ? fallback : it->second;
}

std::chrono::milliseconds ms_param(const BackendDescriptor& d, const std::string& key,
                                   long fallback) {
  return std::chrono::milliseconds(std::stol(param_or(d, key, std::to_string(fallback))));
}

class ReplayRun final : public BackendRun {
 public:
  ReplayRun(std::vector<TranscriptRecord> records, std::chrono::milliseconds delay,
            std::chrono::milliseconds stall)
      : records_(std::move(records)), delay_(delay), stall_(stall) {}

  BackendStep next(const std::optional<std::string>&, std::stop_token stop) override {
    if (!stalled_) {
      stalled_ = true;
      if (!interruptible_sleep(stall_, stop)) return {};
    }
    while (pos_ < records_.size()) {
      const TranscriptRecord& r = records_[pos_++];
      switch (r.kind) {
        case TranscriptRecord::Kind::kToolResult:
          // Recorded results document the original conversation; live
          // results come from the gateway's search tool.
          continue;
        case TranscriptRecord::Kind::kToolCall:
          return {BackendStep::Kind::kToolCall, r.payload, r.tool_name};
        case TranscriptRecord::Kind::kChunk:
          if (!interruptible_sleep(delay_, stop)) return {};
          return {BackendStep::Kind::kChunk, r.payload, {}};
      }
    }
    return {};
  }

 private:
  std::vector<TranscriptRecord> records_;
  std::size_t pos_ = 0;
  std::chrono::milliseconds delay_;
  std::chrono::milliseconds stall_;
  bool stalled_ = false;
};

std::string latest_user_message(const prompt::PromptBundle& bundle) {
  for (auto it = bundle.history.rbegin(); it != bundle.history.rend(); ++it) {
    if (it->role == prompt::Role::kUser) return it->content;
  }
  return {};
}

}  // namespace

std::string_view to_string(BackendKind k) {
  switch (k) {
    case BackendKind::kMock: return "mock";
    case BackendKind::kScripted: return "scripted";
    case BackendKind::kExternal: return "external";
  }
  return "unknown";
}

std::optional<BackendKind> backend_kind_from_string(std::string_view s) {
  if (s == "mock") return BackendKind::kMock;
  if (s == "scripted") return BackendKind::kScripted;
  if (s == "external") return BackendKind::kExternal;
  return std::nullopt;
}

void BackendDescriptor::validate() const {
  if (name.empty()) {
    throw BackendError(BackendError::Code::kInvalidDescriptor, "backend name is empty");
  }
  for (const auto& [k, v] : params) {
    if (k == "api_key" || k == "key") {
      throw BackendError(BackendError::Code::kInvalidDescriptor,
                         "backend '" + name + "': credentials must be referenced via key_env");
    }
  }
  switch (kind) {
    case BackendKind::kMock:
      break;
    case BackendKind::kScripted: {
      require_param(*this, "transcript");
      double rate = std::stod(param_or(*this, "failure_rate", "0"));
      if (rate < 0.0 || rate > 1.0) {
        throw BackendError(BackendError::Code::kInvalidDescriptor,
                           "failure_rate must be within [0, 1]");
      }
      break;
    }
    case BackendKind::kExternal:
      require_param(*this, "endpoint");
      require_param(*this, "key_env");
      break;
  }
}

std::shared_ptr<Backend> make_backend(const BackendDescriptor& d) {
  d.validate();
  switch (d.kind) {
    case BackendKind::kMock: {
      auto delay = ms_param(d, "chunk_delay_ms", 0);
      auto it = d.params.find("fixtures");
      if (it == d.params.end()) return std::make_shared<MockBackend>(
          std::map<std::string, std::vector<TranscriptRecord>>{}, delay);
      return MockBackend::from_directory(it->second, delay);
    }
    case BackendKind::kScripted: {
      auto good = parse_transcript(read_file(require_param(d, "transcript")));
      std::optional<std::vector<TranscriptRecord>> bad;
      if (auto it = d.params.find("malformed_transcript"); it != d.params.end()) {
        bad = parse_transcript(read_file(it->second));
      }
      ScriptedOptions opts;
      opts.failure_rate = std::stod(param_or(d, "failure_rate", "0"));
      opts.seed = std::stoull(param_or(d, "seed", std::to_string(opts.seed)));
      opts.chunk_delay = ms_param(d, "chunk_delay_ms", 0);
      opts.stall = ms_param(d, "stall_ms", 0);
      return std::make_shared<ScriptedBackend>(std::move(good), std::move(bad), opts);
    }
    case BackendKind::kExternal:
      return std::make_shared<ExternalBackend>(require_param(d, "endpoint"),
                                               require_param(d, "key_env"),
                                               param_or(d, "model", "default"),
                                               ms_param(d, "timeout_ms", 170000));
  }
  throw BackendError(BackendError::Code::kInvalidDescriptor, "unknown backend kind");
}

// ---------------------------------------------------------------------------
// Mock

MockBackend::MockBackend(std::map<std::string, std::vector<TranscriptRecord>> by_hash,
                         std::chrono::milliseconds chunk_delay)
    : by_hash_(std::move(by_hash)), chunk_delay_(chunk_delay) {}

std::shared_ptr<MockBackend> MockBackend::from_directory(const std::filesystem::path& dir,
                                                         std::chrono::milliseconds chunk_delay) {
  auto manifest = Json::parse(read_file(dir / "manifest.json"));
  std::map<std::string, std::vector<TranscriptRecord>> by_hash;
  for (const auto& f : manifest.at("fixtures")) {
    auto prompt = f.at("prompt").get<std::string>();
    auto records = parse_transcript(read_file(dir / f.at("transcript").get<std::string>()));
    by_hash[prompt_key(prompt)] = std::move(records);
  }
  return std::make_shared<MockBackend>(std::move(by_hash), chunk_delay);
}

std::string MockBackend::prompt_key(std::string_view prompt) {
  return hex64(fnv1a64(trim(prompt)));
}

std::string MockBackend::prompt_key(const prompt::PromptBundle& bundle) {
  return prompt_key(latest_user_message(bundle));
}

bool MockBackend::has_fixture(std::string_view prompt) const {
  return by_hash_.count(prompt_key(prompt)) != 0;
}

std::vector<TranscriptRecord> MockBackend::synthesize(std::string_view prompt) {
  std::string title = html_escape(trim(prompt));
  std::string page =
      "```html\n<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\">\n"
      "<meta name=\"viewport\" content=\"width=device-width, initial-scale=1\">\n"
      "<title>" + title + "</title>\n"
      "<script src=\"https://cdn.tailwindcss.com\"></script>\n"
      "</head>\n<body class=\"bg-slate-50 text-slate-800\">\n"
      "<main class=\"max-w-3xl mx-auto p-6\">\n"
      "<h1 class=\"text-3xl font-bold mb-4\">" + title + "</h1>\n"
      "<img src=\"/gen?prompt=" + url_encode(trim(prompt)) +
      "&amp;aspect=16:9\" alt=\"" + title + "\" class=\"w-full rounded-lg\">\n"
      "<p class=\"mt-4\" id=\"stamp\"></p>\n"
      "</main>\n<script>\ndocument.addEventListener('DOMContentLoaded', function () {\n"
      "  document.getElementById('stamp').textContent = new Date().toDateString();\n"
      "});\n</script>\n</body>\n</html>\n```";
  std::vector<TranscriptRecord> out;
  constexpr std::size_t kChunk = 96;
  for (std::size_t i = 0; i < page.size(); i += kChunk) {
    out.push_back({TranscriptRecord::Kind::kChunk, {}, page.substr(i, kChunk)});
  }
  return out;
}

std::unique_ptr<BackendRun> MockBackend::start(const prompt::PromptBundle& bundle) {
  auto it = by_hash_.find(prompt_key(bundle));
  if (it != by_hash_.end()) {
    return std::make_unique<ReplayRun>(it->second, chunk_delay_, std::chrono::milliseconds(0));
  }
  return std::make_unique<ReplayRun>(synthesize(latest_user_message(bundle)), chunk_delay_,
                                     std::chrono::milliseconds(0));
}

// ---------------------------------------------------------------------------
// Scripted

ScriptedBackend::ScriptedBackend(std::vector<TranscriptRecord> good,
                                 std::optional<std::vector<TranscriptRecord>> malformed,
                                 ScriptedOptions opts)
    : good_(std::move(good)), opts_(opts) {
  malformed_ = malformed ? std::move(*malformed) : strip_fences(good_);
}

std::vector<TranscriptRecord> ScriptedBackend::strip_fences(
    const std::vector<TranscriptRecord>& records) {
  std::vector<TranscriptRecord> out;
  for (const auto& r : records) {
    if (r.kind != TranscriptRecord::Kind::kChunk) out.push_back(r);
  }
  std::string text = transcript_output(records);
  replace_all(text, "```html", "");
  replace_all(text, "```", "");
  constexpr std::size_t kChunk = 256;
  for (std::size_t i = 0; i < text.size(); i += kChunk) {
    out.push_back({TranscriptRecord::Kind::kChunk, {}, text.substr(i, kChunk)});
  }
  return out;
}

std::unique_ptr<BackendRun> ScriptedBackend::start(const prompt::PromptBundle&) {
  std::uint64_t n = counter_.fetch_add(1);
  std::uint64_t bits = splitmix64(opts_.seed ^ splitmix64(n));
  double u = static_cast<double>(bits >> 11) * 0x1.0p-53;
  const auto& records = u < opts_.failure_rate ? malformed_ : good_;
  return std::make_unique<ReplayRun>(records, opts_.chunk_delay, opts_.stall);
}

// ---------------------------------------------------------------------------
// External

namespace {

class ExternalRun final : public BackendRun {
 public:
  ExternalRun(std::string endpoint, net::Headers headers, std::string model,
              std::chrono::milliseconds timeout, Json messages)
      : endpoint_(std::move(endpoint)),
        headers_(std::move(headers)),
        model_(std::move(model)),
        timeout_(timeout),
        messages_(std::move(messages)) {}

  BackendStep next(const std::optional<std::string>& tool_result, std::stop_token stop) override {
    if (tool_result && !pending_ids_.empty()) {
      messages_.push_back({{"role", "tool"},
                           {"tool_call_id", pending_ids_.front()},
                           {"content", *tool_result}});
      pending_ids_.pop_front();
    }
    if (!queued_calls_.empty()) {
      BackendStep s = std::move(queued_calls_.front());
      queued_calls_.pop_front();
      return s;
    }
    if (finished_ || stop.stop_requested()) return {};
    call_model();
    if (!queued_calls_.empty()) {
      BackendStep s = std::move(queued_calls_.front());
      queued_calls_.pop_front();
      return s;
    }
    finished_ = true;
    if (content_.empty()) return {};
    return {BackendStep::Kind::kChunk, std::move(content_), {}};
  }

 private:
  void call_model() {
    Json tools = Json::array({{{"type", "function"},
                               {"function",
                                {{"name", "search"},
                                 {"description", "Web search for grounding facts."},
                                 {"parameters",
                                  {{"type", "object"},
                                   {"properties", {{"query", {{"type", "string"}}}}},
                                   {"required", Json::array({"query"})}}}}}}});
    Json body = {{"model", model_}, {"messages", messages_}, {"tools", tools}};
    auto res = net::http_post(endpoint_, body.dump(), "application/json", headers_, timeout_);
    if (!res.ok()) {
      throw BackendError(BackendError::Code::kUnavailable,
                         "external backend: " +
                             (res.error.empty() ? "HTTP " + std::to_string(res.status) : res.error));
    }
    Json doc = Json::parse(res.body);
    const Json& msg = doc.at("choices").at(0).at("message");
    if (msg.contains("tool_calls") && msg["tool_calls"].is_array() && !msg["tool_calls"].empty()) {
      messages_.push_back(msg);
      for (const auto& call : msg["tool_calls"]) {
        const Json& fn = call.at("function");
        std::string arg;
        try {
          Json args = Json::parse(fn.value("arguments", "{}"));
          arg = args.value("query", "");
        } catch (const Json::exception&) {
          arg = fn.value("arguments", "");
        }
        pending_ids_.push_back(call.value("id", ""));
        queued_calls_.push_back({BackendStep::Kind::kToolCall, arg, fn.value("name", "")});
      }
      return;
    }
    if (msg.contains("content") && msg["content"].is_string()) {
      content_ = msg["content"].get<std::string>();
    }
  }

  std::string endpoint_;
  net::Headers headers_;
  std::string model_;
  std::chrono::milliseconds timeout_;
  Json messages_;
  std::deque<BackendStep> queued_calls_;
  std::deque<std::string> pending_ids_;
  std::string content_;
  bool finished_ = false;
};

}  // namespace

ExternalBackend::ExternalBackend(std::string endpoint, std::string key_env, std::string model,
                                 std::chrono::milliseconds timeout)
    : endpoint_(std::move(endpoint)),
      key_env_(std::move(key_env)),
      model_(std::move(model)),
      timeout_(timeout) {}

std::unique_ptr<BackendRun> ExternalBackend::start(const prompt::PromptBundle& bundle) {
  const char* key = std::getenv(key_env_.c_str());
  if (key == nullptr) {
    throw BackendError(BackendError::Code::kUnavailable,
                       "credential env var " + key_env_ + " is not set");
  }
  net::Headers headers{{"Authorization", std::string("Bearer ") + key}};
  Json messages = Json::array();
  messages.push_back({{"role", "system"}, {"content", bundle.system_text}});
  for (const auto& m : bundle.history) {
    messages.push_back(
        {{"role", m.role == prompt::Role::kUser ? "user" : "assistant"}, {"content", m.content}});
  }
  return std::make_unique<ExternalRun>(endpoint_, std::move(headers), model_, timeout_,
                                       std::move(messages));
}

}  // namespace genui::gateway
