#pragma once

// Generation runs, sessions and the pipeline that ties the modules together:
// assemble -> generate -> extract -> post-process -> store.

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "genui/arena/records.h"
#include "genui/asset/proxy.h"
#include "genui/gateway/gateway.h"
#include "genui/post/chain.h"
#include "genui/prompt/forge.h"
#include "genui/serve/config.h"
#include "genui/serve/store.h"

namespace genui::serve {

enum class Phase { kQueued, kGenerating, kExtracting, kPostprocessing, kReady, kFailed };

std::string_view to_string(Phase p);

// Event kinds: phase {phase, detail}, tool_call, tool_result, preview
// {html}, swap {page_id}, failure {kind, error_kind, detail, page_id}.
// swap and failure are terminal.
struct RunEvent {
  std::uint64_t seq = 0;
  std::string kind;
  nlohmann::json payload;

  nlohmann::json to_json() const;
};

class Run {
 public:
  Run(std::string id, std::string session);

  const std::string& id() const { return id_; }
  const std::string& session() const { return session_; }

  void emit(std::string kind, nlohmann::json payload);
  // Throws std::logic_error unless `p` is strictly after the current phase.
  void set_phase(Phase p, std::string detail = {});

  Phase phase() const;
  bool finished() const;
  std::vector<RunEvent> events() const;
  // Events with seq >= from, waiting up to `timeout` when there are none.
  std::vector<RunEvent> wait_events(std::uint64_t from, std::chrono::milliseconds timeout) const;
  // Blocks until the terminal event.
  void wait() const;

 private:
  std::string id_;
  std::string session_;
  mutable std::mutex mu_;
  mutable std::condition_variable cv_;
  std::vector<RunEvent> events_;
  std::optional<Phase> phase_;
  bool finished_ = false;
};

struct Session {
  std::string id;
  std::vector<prompt::Message> history;
  std::string style;
  std::string profile;
  std::string backend;
  std::vector<std::string> pages;  // ready pages, in order
  bool busy = false;

  nlohmann::json to_json() const;
};

class UnknownSession : public std::out_of_range {
 public:
  explicit UnknownSession(const std::string& id) : std::out_of_range("unknown session: " + id) {}
};
class UnknownRun : public std::out_of_range {
 public:
  explicit UnknownRun(const std::string& id) : std::out_of_range("unknown run: " + id) {}
};
// The session already has a run in flight, or a follow-up has no page yet.
class SessionConflict : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GenerateRequest {
  std::string prompt;
  std::optional<std::string> session_id;
  std::optional<std::string> style;
  std::optional<std::string> profile;
  std::optional<std::string> backend;
  std::optional<std::string> arm;
};

struct RunHandle {
  std::string run_id;
  std::string session_id;
};

// Rater verdicts posted by the studio, appended to <store>/records.jsonl.
class RecordLog {
 public:
  explicit RecordLog(std::filesystem::path file);
  // Returns the stored record. A repeated idempotency key returns the
  // first result without appending. Throws arena::MalformedRecord or
  // arena::ConflictingDuplicate.
  nlohmann::json submit(const nlohmann::json& body, const std::string& idempotency_key);
  std::size_t size() const;

 private:
  std::filesystem::path file_;
  mutable std::mutex mu_;
  arena::Dataset dataset_;
  std::map<std::string, nlohmann::json> by_key_;
};

class WorkerPool {
 public:
  explicit WorkerPool(int threads);
  ~WorkerPool();
  void submit(std::function<void()> job);

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<std::function<void()>> jobs_;
  bool stopping_ = false;
  std::vector<std::thread> threads_;
};

struct ServiceParts {
  std::shared_ptr<gateway::Gateway> gateway;
  std::shared_ptr<asset::AssetService> assets;
  std::shared_ptr<prompt::PromptRegistry> prompts;
  post::ChainConfig chain;
};

// Builds the gateway, asset service, prompt registry and chain config the
// config describes.
ServiceParts build_parts(const ServeConfig& cfg);

class GenUiService {
 public:
  explicit GenUiService(ServeConfig cfg);
  GenUiService(ServeConfig cfg, ServiceParts parts);
  ~GenUiService();

  // Throws std::invalid_argument for an empty prompt or unknown style,
  // profile or backend; UnknownSession; SessionConflict while busy.
  RunHandle start_generation(const GenerateRequest& req);
  // Throws SessionConflict when the session has no ready page yet.
  RunHandle follow_up(const std::string& session_id, const std::string& instruction);

  std::shared_ptr<Run> run(const std::string& id) const;  // throws UnknownRun
  Session session(const std::string& id) const;            // throws UnknownSession

  PageStore& store() { return store_; }
  RecordLog& records() { return records_; }
  asset::AssetService& assets() { return *parts_.assets; }
  const post::ChainConfig& chain_config() const { return parts_.chain; }
  const ServeConfig& config() const { return cfg_; }

 private:
  RunHandle launch(Session& s, const std::string& prompt, const std::string& arm);
  void execute(std::shared_ptr<Run> run, Session snapshot, std::string prompt, std::string arm);
  void finish_session(const std::string& id, const std::optional<std::string>& page,
                      const std::string& prompt, const std::string& raw);

  ServeConfig cfg_;
  ServiceParts parts_;
  PageStore store_;
  RecordLog records_;
  mutable std::mutex mu_;
  std::map<std::string, Session> sessions_;
  std::map<std::string, std::shared_ptr<Run>> runs_;
  WorkerPool pool_;  // last: joins before the members above go away
};

}  // namespace genui::serve
