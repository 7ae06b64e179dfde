#pragma once

// Append-only page artifact store.
//
//   <dir>/index.jsonl               one line per saved page
//   <dir>/pages/<id>/meta.json      everything except the bodies below
//   <dir>/pages/<id>/raw.txt        raw model output
//   <dir>/pages/<id>/final.html     post-processed page (ready pages only)
//   <dir>/pages/<id>/report.json    post-chain report (ready pages only)
//   <dir>/pages/<id>/errors.jsonl   client errors, capped
//   <dir>/pages/<id>/errors.count   total client errors received
//
// Artifacts never change after save except for their client errors.

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "genui/extract/extractor.h"
#include "genui/post/chain.h"

namespace genui::serve {

struct ClientError {
  std::string message;
  std::string source;
  int line = 0;
  std::string at;  // server timestamp, RFC 3339
};

struct Failure {
  std::string kind;        // backend, prompt, extraction, postprocess
  std::string error_kind;  // extraction failures: the extractor's error kind
  std::string detail;
};

struct Timings {
  std::int64_t generate_ms = 0;
  std::int64_t postprocess_ms = 0;
};

struct PageArtifact {
  std::string id;
  std::string session;
  std::string prompt;
  std::string style;
  std::string profile;
  std::string backend;
  std::string arm;  // eval label; defaults to the backend name
  std::string created;
  std::string raw_output;
  extract::ExtractedPage extracted;
  std::optional<std::string> final_html;
  std::optional<post::PostReport> report;
  std::optional<Failure> failure;
  Timings timings;

  bool ready() const { return final_html.has_value(); }
};

class UnknownPage : public std::out_of_range {
 public:
  explicit UnknownPage(const std::string& id) : std::out_of_range("unknown page: " + id) {}
};

bool is_valid_id(std::string_view id);
std::string new_id();
std::string now_rfc3339();

class PageStore {
 public:
  PageStore(std::filesystem::path dir, std::size_t max_client_errors = 200);

  // Throws std::invalid_argument for a bad or reused id.
  void save(const PageArtifact& a);
  std::shared_ptr<const PageArtifact> get(const std::string& id) const;  // throws UnknownPage
  bool contains(const std::string& id) const;
  std::vector<std::string> ids() const;  // save order

  // Keeps the first max_client_errors entries; the total keeps counting.
  void record_client_error(const std::string& id, ClientError e);
  std::vector<ClientError> client_errors(const std::string& id) const;
  std::size_t client_error_total(const std::string& id) const;

  nlohmann::json artifact_json(const std::string& id) const;
  const std::filesystem::path& dir() const { return dir_; }

 private:
  struct Slot {
    std::shared_ptr<const PageArtifact> artifact;
    mutable std::mutex mu;
    std::vector<ClientError> errors;
    std::size_t total = 0;
  };
  std::shared_ptr<Slot> slot(const std::string& id) const;
  std::shared_ptr<Slot> load(const std::string& id) const;

  std::filesystem::path dir_;
  std::size_t cap_;
  mutable std::shared_mutex mu_;
  mutable std::map<std::string, std::shared_ptr<Slot>> slots_;  // null until loaded
  std::vector<std::string> order_;
};

}  // namespace genui::serve
