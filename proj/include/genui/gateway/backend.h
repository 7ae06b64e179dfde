#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <stop_token>
#include <string>
#include <string_view>
#include <vector>

#include "genui/gateway/transcript.h"
#include "genui/prompt/forge.h"

namespace genui::gateway {

enum class BackendKind { kMock, kScripted, kExternal };

std::string_view to_string(BackendKind k);
std::optional<BackendKind> backend_kind_from_string(std::string_view s);

struct BackendDescriptor {
  std::string name;
  BackendKind kind = BackendKind::kMock;
  std::map<std::string, std::string> params;

  // mock:     fixtures=<dir>  [chunk_delay_ms]
  // scripted: transcript=<file> [malformed_transcript] [failure_rate] [seed]
  //           [chunk_delay_ms] [stall_ms]
  // external: endpoint=<url> key_env=<ENV VAR NAME> [model] [timeout_ms]
  // A literal `api_key` param is always rejected.
  void validate() const;
};

class BackendError : public std::runtime_error {
 public:
  enum class Code { kInvalidDescriptor, kUnavailable };
  BackendError(Code code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Code code() const { return code_; }

 private:
  Code code_;
};

struct BackendStep {
  enum class Kind { kChunk, kToolCall, kEnd };
  Kind kind = Kind::kEnd;
  std::string text;       // chunk text, or the tool call argument
  std::string tool_name;  // kToolCall only
};

// One generation in progress. `tool_result` carries the JSON answer to the
// previous kToolCall step and is empty otherwise.
class BackendRun {
 public:
  virtual ~BackendRun() = default;
  virtual BackendStep next(const std::optional<std::string>& tool_result,
                           std::stop_token stop) = 0;
};

class Backend {
 public:
  virtual ~Backend() = default;
  // Throws BackendError(kUnavailable) when the backend cannot serve.
  virtual std::unique_ptr<BackendRun> start(const prompt::PromptBundle& bundle) = 0;
  // Exclusive backends are driven by one generation at a time.
  virtual bool exclusive() const { return false; }
};

std::shared_ptr<Backend> make_backend(const BackendDescriptor& d);

// Lookup table from prompt hash to canned transcript. Prompts with no fixture
// get a small synthesized page so the mock always answers.
class MockBackend final : public Backend {
 public:
  explicit MockBackend(std::map<std::string, std::vector<TranscriptRecord>> by_hash,
                       std::chrono::milliseconds chunk_delay = {});

  // <dir>/manifest.json: {"fixtures":[{"name","prompt","transcript"}]}
  static std::shared_ptr<MockBackend> from_directory(const std::filesystem::path& dir,
                                                     std::chrono::milliseconds chunk_delay = {});

  // Hex FNV-1a of the latest user message.
  static std::string prompt_key(const prompt::PromptBundle& bundle);
  static std::string prompt_key(std::string_view prompt);
  static std::vector<TranscriptRecord> synthesize(std::string_view prompt);

  std::unique_ptr<BackendRun> start(const prompt::PromptBundle& bundle) override;
  bool has_fixture(std::string_view prompt) const;

 private:
  std::map<std::string, std::vector<TranscriptRecord>> by_hash_;
  std::chrono::milliseconds chunk_delay_;
};

struct ScriptedOptions {
  double failure_rate = 0.0;
  std::uint64_t seed = 0x5eedULL;
  std::chrono::milliseconds chunk_delay{0};
  std::chrono::milliseconds stall{0};
};

// Replays one transcript per generation. With probability failure_rate a
// generation replays the malformed transcript instead (or, if none is given,
// the good transcript with its code fences removed).
class ScriptedBackend final : public Backend {
 public:
  ScriptedBackend(std::vector<TranscriptRecord> good,
                  std::optional<std::vector<TranscriptRecord>> malformed,
                  ScriptedOptions opts);

  std::unique_ptr<BackendRun> start(const prompt::PromptBundle& bundle) override;
  std::uint64_t generations() const { return counter_.load(); }

  static std::vector<TranscriptRecord> strip_fences(const std::vector<TranscriptRecord>& records);

 private:
  std::vector<TranscriptRecord> good_;
  std::vector<TranscriptRecord> malformed_;
  ScriptedOptions opts_;
  std::atomic<std::uint64_t> counter_{0};
};

// OpenAI-compatible chat completions endpoint (non-streaming). The search
// tool is offered as a function; tool calls round-trip through the gateway.
class ExternalBackend final : public Backend {
 public:
  ExternalBackend(std::string endpoint, std::string key_env, std::string model,
                  std::chrono::milliseconds timeout);
  std::unique_ptr<BackendRun> start(const prompt::PromptBundle& bundle) override;

 private:
  std::string endpoint_;
  std::string key_env_;
  std::string model_;
  std::chrono::milliseconds timeout_;
};

}  // namespace genui::gateway
