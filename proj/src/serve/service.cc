#include "genui/serve/service.h"

#include <fstream>

#include "genui/gateway/search.h"
#include "genui/html/dom.h"
#include "genui/util/files.h"
#include "genui/util/strings.h"

namespace genui::serve {

using Json = nlohmann::json;
using Clock = std::chrono::steady_clock;

std::string_view to_string(Phase p) {
  switch (p) {
    case Phase::kQueued: return "queued";
    case Phase::kGenerating: return "generating";
    case Phase::kExtracting: return "extracting";
    case Phase::kPostprocessing: return "postprocessing";
    case Phase::kReady: return "ready";
    case Phase::kFailed: return "failed";
  }
  return "failed";
}

Json RunEvent::to_json() const { return Json{{"seq", seq}, {"kind", kind}, {"payload", payload}}; }

Run::Run(std::string id, std::string session) : id_(std::move(id)), session_(std::move(session)) {}

void Run::emit(std::string kind, Json payload) {
  {
    std::lock_guard lock(mu_);
    if (finished_) throw std::logic_error("run " + id_ + " already finished");
    bool terminal = kind == "swap" || kind == "failure";
    events_.push_back({events_.size(), std::move(kind), std::move(payload)});
    finished_ = terminal;
  }
  cv_.notify_all();
}

void Run::set_phase(Phase p, std::string detail) {
  {
    std::lock_guard lock(mu_);
    if (phase_ && static_cast<int>(p) <= static_cast<int>(*phase_)) {
      throw std::logic_error("phase " + std::string(to_string(p)) + " after " +
                             std::string(to_string(*phase_)));
    }
    if (phase_ == Phase::kFailed || phase_ == Phase::kReady) {
      throw std::logic_error("run " + id_ + " already in a final phase");
    }
    phase_ = p;
  }
  emit("phase", Json{{"phase", to_string(p)}, {"detail", std::move(detail)}});
}

Phase Run::phase() const {
  std::lock_guard lock(mu_);
  return phase_.value_or(Phase::kQueued);
}

bool Run::finished() const {
  std::lock_guard lock(mu_);
  return finished_;
}

std::vector<RunEvent> Run::events() const {
  std::lock_guard lock(mu_);
  return events_;
}

std::vector<RunEvent> Run::wait_events(std::uint64_t from, std::chrono::milliseconds timeout) const {
  std::unique_lock lock(mu_);
  cv_.wait_for(lock, timeout, [&] { return events_.size() > from || finished_; });
  if (from >= events_.size()) return {};
  return {events_.begin() + static_cast<std::ptrdiff_t>(from), events_.end()};
}

void Run::wait() const {
  std::unique_lock lock(mu_);
  cv_.wait(lock, [&] { return finished_; });
}

Json Session::to_json() const {
  Json hist = Json::array();
  for (const auto& m : history) hist.push_back(Json{{"role", prompt::to_string(m.role)}, {"content", m.content}});
  return Json{{"id", id},           {"style", style}, {"profile", profile}, {"backend", backend},
              {"pages", pages},     {"busy", busy},   {"history", std::move(hist)}};
}

RecordLog::RecordLog(std::filesystem::path file) : file_(std::move(file)) {
  if (std::filesystem::exists(file_)) {
    std::ifstream in(file_);
    dataset_ = arena::ingest(in);
  }
}

Json RecordLog::submit(const Json& body, const std::string& key) {
  std::lock_guard lock(mu_);
  if (!key.empty()) {
    auto it = by_key_.find(key);
    if (it != by_key_.end()) return it->second;
  }
  arena::ComparisonRecord r = arena::record_from_json(body);
  dataset_.add(r);
  Json stored = arena::to_json(r);
  append_line(file_, stored.dump());
  if (!key.empty()) by_key_[key] = stored;
  return stored;
}

std::size_t RecordLog::size() const {
  std::lock_guard lock(mu_);
  return dataset_.size();
}

WorkerPool::WorkerPool(int threads) {
  for (int i = 0; i < threads; ++i) {
    threads_.emplace_back([this] {
      for (;;) {
        std::function<void()> job;
        {
          std::unique_lock lock(mu_);
          cv_.wait(lock, [&] { return stopping_ || !jobs_.empty(); });
          if (jobs_.empty()) return;
          job = std::move(jobs_.front());
          jobs_.pop_front();
        }
        job();
      }
    });
  }
}

WorkerPool::~WorkerPool() {
  {
    std::lock_guard lock(mu_);
    stopping_ = true;
  }
  cv_.notify_all();
  for (auto& t : threads_) t.join();
}

void WorkerPool::submit(std::function<void()> job) {
  {
    std::lock_guard lock(mu_);
    jobs_.push_back(std::move(job));
  }
  cv_.notify_one();
}

namespace {

std::shared_ptr<asset::ImageProvider> image_provider(const ProviderSpec& p) {
  if (p.name == "mock") return std::make_shared<asset::MockImageProvider>();
  return std::make_shared<asset::HttpImageProvider>(p.name, p.endpoint, p.key_env);
}

std::int64_t ms_since(Clock::time_point t) {
  return std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - t).count();
}

}  // namespace

ServiceParts build_parts(const ServeConfig& cfg) {
  ServiceParts parts;
  auto search = std::make_shared<gateway::SearchService>(cfg.search_timeout);
  if (!cfg.search_fixtures.empty() && std::filesystem::exists(cfg.search_fixtures)) {
    search->register_provider(gateway::MockSearchProvider::from_file(cfg.search_fixtures));
  } else {
    search->register_provider(std::make_shared<gateway::MockSearchProvider>());
  }
  for (const auto& p : cfg.search_providers) {
    search->register_provider(std::make_shared<gateway::HttpSearchProvider>(
        p.name, p.endpoint, p.key_env, cfg.search_timeout));
  }
  gateway::GatewayOptions gopts;
  gopts.deadline = cfg.generation_deadline;
  gopts.search_provider = cfg.search_provider;
  parts.gateway = std::make_shared<gateway::Gateway>(search, gopts);
  for (const auto& d : cfg.backends) parts.gateway->register_backend(d);

  asset::AssetOptions aopts;
  aopts.long_edge = cfg.image_long_edge;
  aopts.cache_dir = cfg.image_cache_dir.empty() ? cfg.store_dir / "assets" : cfg.image_cache_dir;
  aopts.ttl = std::chrono::hours(24 * cfg.image_ttl_days);
  parts.assets = std::make_shared<asset::AssetService>(image_provider(cfg.image_search),
                                                       image_provider(cfg.image_gen), aopts);
  parts.prompts = std::make_shared<prompt::PromptRegistry>(prompt::PromptRegistry::load(cfg.prompt_dir));
  parts.chain = post::ChainConfig::from_json(cfg.chain);
  return parts;
}

GenUiService::GenUiService(ServeConfig cfg) : GenUiService(cfg, build_parts(cfg)) {}

GenUiService::GenUiService(ServeConfig cfg, ServiceParts parts)
    : cfg_(std::move(cfg)),
      parts_(std::move(parts)),
      store_(cfg_.store_dir, cfg_.max_client_errors),
      records_(cfg_.store_dir / "records.jsonl"),
      pool_(cfg_.workers) {}

GenUiService::~GenUiService() = default;

RunHandle GenUiService::start_generation(const GenerateRequest& req) {
  if (is_blank(req.prompt)) throw std::invalid_argument("prompt must not be empty");
  std::string style = req.style.value_or(cfg_.default_style);
  std::string profile = req.profile.value_or(cfg_.default_profile);
  if (!parts_.prompts->has_style(style)) throw std::invalid_argument("unknown style: " + style);
  if (!parts_.prompts->has_profile(profile)) throw std::invalid_argument("unknown profile: " + profile);

  std::lock_guard lock(mu_);
  Session* s = nullptr;
  if (req.session_id) {
    auto it = sessions_.find(*req.session_id);
    if (it == sessions_.end()) throw UnknownSession(*req.session_id);
    s = &it->second;
  } else {
    std::string backend = req.backend.value_or(cfg_.default_backend);
    if (!parts_.gateway->has_backend(backend)) throw std::invalid_argument("unknown backend: " + backend);
    Session fresh;
    fresh.id = new_id();
    fresh.backend = backend;
    s = &sessions_.emplace(fresh.id, fresh).first->second;
  }
  if (s->busy) throw SessionConflict("session " + s->id + " already has a run in flight");
  if (req.backend && *req.backend != s->backend) {
    if (!parts_.gateway->has_backend(*req.backend)) {
      throw std::invalid_argument("unknown backend: " + *req.backend);
    }
    s->backend = *req.backend;
  }
  s->style = style;
  s->profile = profile;
  return launch(*s, req.prompt, req.arm.value_or(s->backend));
}

RunHandle GenUiService::follow_up(const std::string& session_id, const std::string& instruction) {
  if (is_blank(instruction)) throw std::invalid_argument("instruction must not be empty");
  std::lock_guard lock(mu_);
  auto it = sessions_.find(session_id);
  if (it == sessions_.end()) throw UnknownSession(session_id);
  Session& s = it->second;
  if (s.busy) throw SessionConflict("session " + s.id + " already has a run in flight");
  if (s.pages.empty()) throw SessionConflict("session " + s.id + " has no ready page to follow up on");
  return launch(s, instruction, s.backend);
}

RunHandle GenUiService::launch(Session& s, const std::string& prompt, const std::string& arm) {
  auto run = std::make_shared<Run>(new_id(), s.id);
  run->set_phase(Phase::kQueued);
  s.busy = true;
  runs_[run->id()] = run;
  pool_.submit([this, run, snapshot = s, prompt, arm] { execute(run, snapshot, prompt, arm); });
  return {run->id(), s.id};
}

std::shared_ptr<Run> GenUiService::run(const std::string& id) const {
  std::lock_guard lock(mu_);
  auto it = runs_.find(id);
  if (it == runs_.end()) throw UnknownRun(id);
  return it->second;
}

Session GenUiService::session(const std::string& id) const {
  std::lock_guard lock(mu_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw UnknownSession(id);
  return it->second;
}

void GenUiService::finish_session(const std::string& id, const std::optional<std::string>& page,
                                  const std::string& prompt, const std::string& raw) {
  std::lock_guard lock(mu_);
  Session& s = sessions_.at(id);
  s.busy = false;
  if (!page) return;
  s.history.push_back({prompt::Role::kUser, prompt});
  s.history.push_back({prompt::Role::kModel, raw});
  s.pages.push_back(*page);
}

void GenUiService::execute(std::shared_ptr<Run> run, Session snapshot, std::string prompt_text,
                           std::string arm) {
  PageArtifact a;
  a.id = new_id();
  a.session = snapshot.id;
  a.prompt = prompt_text;
  a.style = snapshot.style;
  a.profile = snapshot.profile;
  a.backend = snapshot.backend;
  a.arm = arm;
  a.created = now_rfc3339();

  auto fail = [&](Failure f) {
    a.failure = f;
    try {
      store_.save(a);
    } catch (const std::exception& e) {
      f.detail += " (artifact not stored: " + std::string(e.what()) + ")";
    }
    run->set_phase(Phase::kFailed, f.kind);
    Json payload{{"kind", f.kind}, {"detail", f.detail}, {"page_id", a.id}};
    payload["error_kind"] = f.error_kind.empty() ? Json() : Json(f.error_kind);
    run->emit("failure", payload);
    finish_session(snapshot.id, std::nullopt, prompt_text, a.raw_output);
  };

  try {
    run->set_phase(Phase::kGenerating, a.backend);
    auto start = Clock::now();
    prompt::PromptBundle bundle;
    try {
      prompt::DynamicContext ctx;
      ctx.now = std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now());
      ctx.user_location = cfg_.location;
      auto history = snapshot.history;
      history.push_back({prompt::Role::kUser, prompt_text});
      bundle = parts_.prompts->assemble(a.profile, a.style, ctx, std::move(history));
    } catch (const std::exception& e) {
      a.extracted = extract::extract(a.raw_output);
      return fail({"prompt", "", e.what()});
    }

    extract::IncrementalExtractor preview;
    auto stream = parts_.gateway->generate(bundle, a.backend);
    std::optional<std::string> backend_error;
    while (auto ev = stream.next()) {
      switch (ev->kind) {
        case gateway::EventKind::kChunk: {
          a.raw_output += ev->payload;
          std::string frag = preview.feed(ev->payload);
          if (!frag.empty()) run->emit("preview", Json{{"html", frag}});
          break;
        }
        case gateway::EventKind::kToolCall:
        case gateway::EventKind::kToolResult:
          run->emit(std::string(gateway::to_string(ev->kind)),
                    Json::parse(ev->payload, nullptr, false));
          break;
        case gateway::EventKind::kDone:
          break;
        case gateway::EventKind::kBackendError: {
          Json err = Json::parse(ev->payload, nullptr, false);
          backend_error = err.is_object() ? err.value("message", ev->payload) : ev->payload;
          break;
        }
      }
    }
    a.timings.generate_ms = ms_since(start);
    a.extracted = extract::extract(a.raw_output);
    if (backend_error) return fail({"backend", "", *backend_error});
    if (std::string tail = preview.finish(); !tail.empty()) run->emit("preview", Json{{"html", tail}});

    run->set_phase(Phase::kExtracting);
    if (a.extracted.status == extract::Status::kError) {
      std::string kind(extract::to_string(*a.extracted.error_kind));
      return fail({"extraction", kind, "extraction failed: " + kind});
    }

    run->set_phase(Phase::kPostprocessing);
    auto post_start = Clock::now();
    try {
      post::ChainResult result = post::run_chain(a.extracted, parts_.chain);
      a.final_html = std::move(result.html);
      a.report = std::move(result.report);
    } catch (const html::ParseError& e) {
      return fail({"postprocess", "", e.what()});
    }
    a.timings.postprocess_ms = ms_since(post_start);
    store_.save(a);
    finish_session(snapshot.id, a.id, prompt_text, a.raw_output);
    run->set_phase(Phase::kReady, a.id);
    run->emit("swap", Json{{"page_id", a.id}, {"changed", a.report->changed}});
  } catch (const std::exception& e) {
    if (!run->finished()) fail({"internal", "", e.what()});
  }
}

}  // namespace genui::serve
