#include "genui/serve/http.h"

#include <httplib.h>

#include "genui/util/strings.h"

namespace genui::serve {

using Json = nlohmann::json;

namespace {

constexpr int kHttpThreads = 32;

void send_json(httplib::Response& res, int status, const Json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& message) {
  send_json(res, status, Json{{"error", message}});
}

std::string raw_query(const httplib::Request& req) {
  auto q = req.target.find('?');
  return q == std::string::npos ? std::string() : req.target.substr(q + 1);
}

Json parse_body(const httplib::Request& req) {
  Json j = Json::parse(req.body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw std::invalid_argument("body must be a JSON object");
  return j;
}

std::optional<std::string> opt_string(const Json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) throw std::invalid_argument(std::string(key) + " must be a string");
  return it->get<std::string>();
}

void cors(httplib::Response& res) {
  res.set_header("Access-Control-Allow-Origin", "*");
  res.set_header("Access-Control-Allow-Methods", "POST, OPTIONS");
  res.set_header("Access-Control-Allow-Headers", "Content-Type");
}

// Maps service exceptions onto status codes.
template <class F>
void guarded(httplib::Response& res, F&& f) {
  try {
    f();
  } catch (const asset::BadRequest& e) {
    send_error(res, 400, e.what());
  } catch (const arena::MalformedRecord& e) {
    send_error(res, 400, e.what());
  } catch (const arena::ConflictingDuplicate& e) {
    send_error(res, 409, e.what());
  } catch (const SessionConflict& e) {
    send_error(res, 409, e.what());
  } catch (const UnknownPage& e) {
    send_error(res, 404, e.what());
  } catch (const UnknownSession& e) {
    send_error(res, 404, e.what());
  } catch (const UnknownRun& e) {
    send_error(res, 404, e.what());
  } catch (const std::invalid_argument& e) {
    send_error(res, 400, e.what());
  } catch (const Json::exception& e) {
    send_error(res, 400, e.what());
  }
}

void send_asset(httplib::Response& res, const asset::AssetRecord& rec) {
  res.status = 200;
  res.set_content(*rec.bytes, rec.media_type);
  res.set_header("X-Genui-Provider", rec.provider);
  res.set_header("Cache-Control", rec.fallback ? "no-store" : "public, max-age=86400");
}

}  // namespace

struct HttpServer::Impl {
  GenUiService& svc;
  httplib::Server server;

  explicit Impl(GenUiService& s) : svc(s) {
    server.new_task_queue = [] { return new httplib::ThreadPool(kHttpThreads); };
    routes();
  }

  void routes() {
    server.Get("/healthz", [](const httplib::Request&, httplib::Response& res) {
      send_json(res, 200, Json{{"ok", true}});
    });

    server.Get("/image", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] { send_asset(res, svc.assets().handle_image(raw_query(req))); });
    });
    server.Get("/gen", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] { send_asset(res, svc.assets().handle_gen(raw_query(req))); });
    });

    server.Post("/api/generate", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        Json j = parse_body(req);
        GenerateRequest g;
        g.prompt = opt_string(j, "prompt").value_or("");
        g.session_id = opt_string(j, "session_id");
        g.style = opt_string(j, "style");
        g.profile = opt_string(j, "profile");
        g.backend = opt_string(j, "backend");
        g.arm = opt_string(j, "arm");
        RunHandle h = svc.start_generation(g);
        send_json(res, 202, Json{{"run_id", h.run_id}, {"session_id", h.session_id}});
      });
    });

    server.Post("/api/follow_up", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        Json j = parse_body(req);
        auto session = opt_string(j, "session_id");
        if (!session) throw std::invalid_argument("session_id is required");
        RunHandle h = svc.follow_up(*session, opt_string(j, "instruction").value_or(""));
        send_json(res, 202, Json{{"run_id", h.run_id}, {"session_id", h.session_id}});
      });
    });

    server.Get(R"(/api/runs/([^/]+)/events)", [this](const httplib::Request& req,
                                                     httplib::Response& res) {
      guarded(res, [&] {
        auto run = svc.run(req.matches[1]);
        std::uint64_t from = 0;
        if (req.has_param("from")) from = std::stoull(req.get_param_value("from"));
        res.set_header("Cache-Control", "no-store");
        res.set_chunked_content_provider(
            "application/x-ndjson", [run, next = from](std::size_t, httplib::DataSink& sink) mutable {
              auto events = run->wait_events(next, std::chrono::milliseconds(500));
              for (const auto& e : events) {
                std::string line = e.to_json().dump() + "\n";
                if (!sink.write(line.data(), line.size())) return false;
                next = e.seq + 1;
              }
              bool terminal = !events.empty() &&
                              (events.back().kind == "swap" || events.back().kind == "failure");
              if (terminal || (events.empty() && run->finished())) sink.done();
              return true;
            });
      });
    });

    server.Get(R"(/api/sessions/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] { send_json(res, 200, svc.session(req.matches[1]).to_json()); });
    });

    server.Get(R"(/api/pages/([^/]+)/artifact)", [this](const httplib::Request& req,
                                                        httplib::Response& res) {
      guarded(res, [&] { send_json(res, 200, svc.store().artifact_json(req.matches[1])); });
    });

    server.Get(R"(/page/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        std::string id = req.matches[1];
        if (!is_valid_id(id)) throw UnknownPage(id);
        auto page = svc.store().get(id);
        if (!page->final_html) {
          send_error(res, 404, "page " + id + " failed and has no final HTML");
          return;
        }
        res.status = 200;
        res.set_content(*page->final_html, "text/html; charset=utf-8");
        res.set_header("Content-Security-Policy", "frame-ancestors 'self'");
        res.set_header("X-Frame-Options", "SAMEORIGIN");
      });
    });

    server.Options("/client-errors", [](const httplib::Request&, httplib::Response& res) {
      cors(res);
      res.status = 204;
    });
    server.Post("/client-errors", [this](const httplib::Request& req, httplib::Response& res) {
      cors(res);
      guarded(res, [&] {
        // Beacons arrive as text/plain; the body is JSON regardless.
        Json j = parse_body(req);
        auto page = opt_string(j, "page_id");
        if (!page || !is_valid_id(*page)) throw std::invalid_argument("page_id is required");
        ClientError e;
        e.message = opt_string(j, "message").value_or("");
        e.source = opt_string(j, "source").value_or("");
        if (j.contains("line") && j["line"].is_number_integer()) e.line = j["line"].get<int>();
        svc.store().record_client_error(*page, std::move(e));
        res.status = 204;
      });
    });

    server.Post("/api/records", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        Json j = parse_body(req);
        std::string key = req.get_header_value("Idempotency-Key");
        if (key.empty()) key = opt_string(j, "idempotency_key").value_or("");
        std::size_t before = svc.records().size();
        Json stored = svc.records().submit(j, key);
        send_json(res, svc.records().size() > before ? 201 : 200, stored);
      });
    });

    const auto& dir = svc.config().static_dir;
    if (!dir.empty() && std::filesystem::is_directory(dir)) server.set_mount_point("/", dir.string());
  }
};

HttpServer::HttpServer(GenUiService& svc) : impl_(std::make_unique<Impl>(svc)) {}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  if (port == 0) return impl_->server.bind_to_any_port(host);
  return impl_->server.bind_to_port(host, port) ? port : -1;
}

bool HttpServer::serve() { return impl_->server.listen_after_bind(); }

void HttpServer::start() {
  thread_ = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
}

void HttpServer::stop() {
  impl_->server.stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace genui::serve
