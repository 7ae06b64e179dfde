#pragma once

// Drives a backend with a PromptBundle and turns its steps into a numbered
// event stream. Search tool calls are answered in-line (model-visible);
// image endpoints are left for the browser to resolve.

#include <chrono>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "genui/gateway/backend.h"
#include "genui/gateway/search.h"
#include "genui/prompt/forge.h"

namespace genui::gateway {

enum class EventKind { kChunk, kToolCall, kToolResult, kDone, kBackendError };

std::string_view to_string(EventKind k);

struct GenerationEvent {
  EventKind kind = EventKind::kChunk;
  std::string payload;  // chunk text, or JSON for tool events and errors
  std::uint64_t seq = 0;

  bool terminal() const { return kind == EventKind::kDone || kind == EventKind::kBackendError; }
  bool operator==(const GenerationEvent&) const = default;
};

struct GatewayOptions {
  std::chrono::milliseconds deadline{std::chrono::seconds(180)};
  int max_tool_rounds = 8;
  std::string search_provider = "mock";
};

namespace detail {
struct StreamState;
}

// Pull side of one generation. Exactly one terminal event is delivered;
// next() returns nullopt afterwards. Destroying the stream cancels the run.
class EventStream {
 public:
  explicit EventStream(std::shared_ptr<detail::StreamState> state);
  EventStream(EventStream&&) noexcept = default;
  EventStream& operator=(EventStream&&) noexcept = default;
  ~EventStream();

  std::optional<GenerationEvent> next();

 private:
  std::shared_ptr<detail::StreamState> state_;
};

class Gateway {
 public:
  explicit Gateway(std::shared_ptr<SearchService> search, GatewayOptions opts = {});

  // Validates the descriptor; replaces any backend with the same name.
  void register_backend(const BackendDescriptor& d, std::shared_ptr<Backend> backend);
  void register_backend(const BackendDescriptor& d);
  bool has_backend(const std::string& name) const;

  // An unknown backend yields a stream holding a single backend_error.
  EventStream generate(const prompt::PromptBundle& bundle, const std::string& backend);

  const GatewayOptions& options() const { return opts_; }
  SearchService& search() { return *search_; }

 private:
  struct Entry {
    std::shared_ptr<Backend> backend;
    std::shared_ptr<std::mutex> exclusive_mu;
  };
  std::shared_ptr<SearchService> search_;
  GatewayOptions opts_;
  mutable std::mutex mu_;
  std::map<std::string, Entry> backends_;
};

// Drains a stream.
std::vector<GenerationEvent> collect(EventStream& stream);

// Concatenated chunk payloads.
std::string raw_output(const std::vector<GenerationEvent>& events);

}  // namespace genui::gateway
