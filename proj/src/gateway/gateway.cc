#include "genui/gateway/gateway.h"

#include <condition_variable>
#include <deque>
#include <stop_token>
#include <thread>

#include <json.hpp>

namespace genui::gateway {

namespace detail {

struct StreamState {
  std::mutex mu;
  std::condition_variable cv;
  std::deque<GenerationEvent> queue;
  std::uint64_t next_seq = 0;
  bool terminal_pushed = false;
  bool terminal_delivered = false;
  std::chrono::steady_clock::time_point deadline;
  std::stop_source stop;

  // Returns false once a terminal event has been queued; later pushes are
  // dropped so each stream carries exactly one terminal event.
  bool push(EventKind kind, std::string payload) {
    std::lock_guard lock(mu);
    if (terminal_pushed) return false;
    GenerationEvent ev{kind, std::move(payload), next_seq++};
    if (ev.terminal()) terminal_pushed = true;
    queue.push_back(std::move(ev));
    cv.notify_all();
    return true;
  }
};

}  // namespace detail

namespace {

using Json = nlohmann::json;

std::string error_payload(const std::string& message) {
  return Json{{"error", true}, {"message", message}}.dump();
}

void drive(std::shared_ptr<detail::StreamState> state, std::shared_ptr<Backend> backend,
           std::shared_ptr<std::mutex> exclusive_mu, std::shared_ptr<SearchService> search,
           GatewayOptions opts, prompt::PromptBundle bundle) {
  std::stop_token stop = state->stop.get_token();
  std::unique_lock<std::mutex> exclusive;
  if (exclusive_mu) exclusive = std::unique_lock(*exclusive_mu);
  try {
    auto run = backend->start(bundle);
    std::optional<std::string> tool_result;
    int rounds = 0;
    while (!stop.stop_requested()) {
      BackendStep step = run->next(tool_result, stop);
      tool_result.reset();
      if (stop.stop_requested()) return;
      switch (step.kind) {
        case BackendStep::Kind::kChunk:
          if (!state->push(EventKind::kChunk, std::move(step.text))) return;
          break;
        case BackendStep::Kind::kToolCall: {
          state->push(EventKind::kToolCall,
                      Json{{"name", step.tool_name}, {"arguments", step.text}}.dump());
          std::string result;
          if (rounds >= opts.max_tool_rounds) {
            result = error_payload("tool round limit reached");
          } else if (step.tool_name == "search") {
            try {
              result = to_json(search->search(step.text, opts.search_provider)).dump();
            } catch (const std::exception& e) {
              result = error_payload(e.what());
            }
          } else {
            result = error_payload("unknown tool: " + step.tool_name);
          }
          ++rounds;
          if (!state->push(EventKind::kToolResult, result)) return;
          tool_result = std::move(result);
          break;
        }
        case BackendStep::Kind::kEnd:
          state->push(EventKind::kDone, "");
          return;
      }
    }
  } catch (const std::exception& e) {
    state->push(EventKind::kBackendError, error_payload(e.what()));
  }
}

}  // namespace

std::string_view to_string(EventKind k) {
  switch (k) {
    case EventKind::kChunk: return "chunk";
    case EventKind::kToolCall: return "tool_call";
    case EventKind::kToolResult: return "tool_result";
    case EventKind::kDone: return "done";
    case EventKind::kBackendError: return "backend_error";
  }
  return "unknown";
}

EventStream::EventStream(std::shared_ptr<detail::StreamState> state) : state_(std::move(state)) {}

EventStream::~EventStream() {
  if (state_) state_->stop.request_stop();
}

std::optional<GenerationEvent> EventStream::next() {
  if (!state_) return std::nullopt;
  std::unique_lock lock(state_->mu);
  if (state_->terminal_delivered) return std::nullopt;
  bool ready = state_->cv.wait_until(lock, state_->deadline,
                                     [&] { return !state_->queue.empty(); });
  if (!ready) {
    // Deadline: synthesize the terminal event ourselves and cancel the run.
    lock.unlock();
    state_->push(EventKind::kBackendError, error_payload("generation deadline exceeded"));
    state_->stop.request_stop();
    lock.lock();
  }
  GenerationEvent ev = std::move(state_->queue.front());
  state_->queue.pop_front();
  if (ev.terminal()) state_->terminal_delivered = true;
  return ev;
}

Gateway::Gateway(std::shared_ptr<SearchService> search, GatewayOptions opts)
    : search_(std::move(search)), opts_(std::move(opts)) {}

void Gateway::register_backend(const BackendDescriptor& d, std::shared_ptr<Backend> backend) {
  d.validate();
  Entry e{std::move(backend), nullptr};
  if (e.backend->exclusive()) e.exclusive_mu = std::make_shared<std::mutex>();
  std::lock_guard lock(mu_);
  backends_[d.name] = std::move(e);
}

void Gateway::register_backend(const BackendDescriptor& d) {
  register_backend(d, make_backend(d));
}

bool Gateway::has_backend(const std::string& name) const {
  std::lock_guard lock(mu_);
  return backends_.count(name) != 0;
}

EventStream Gateway::generate(const prompt::PromptBundle& bundle, const std::string& backend) {
  auto state = std::make_shared<detail::StreamState>();
  state->deadline = std::chrono::steady_clock::now() + opts_.deadline;
  Entry entry;
  {
    std::lock_guard lock(mu_);
    auto it = backends_.find(backend);
    if (it != backends_.end()) entry = it->second;
  }
  if (!entry.backend) {
    state->push(EventKind::kBackendError, error_payload("backend unavailable: " + backend));
    return EventStream(state);
  }
  std::thread(drive, state, entry.backend, entry.exclusive_mu, search_, opts_, bundle).detach();
  return EventStream(state);
}

std::vector<GenerationEvent> collect(EventStream& stream) {
  std::vector<GenerationEvent> out;
  while (auto ev = stream.next()) out.push_back(std::move(*ev));
  return out;
}

std::string raw_output(const std::vector<GenerationEvent>& events) {
  std::string out;
  for (const auto& ev : events) {
    if (ev.kind == EventKind::kChunk) out += ev.payload;
  }
  return out;
}

}  // namespace genui::gateway
