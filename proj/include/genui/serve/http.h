#pragma once

// HTTP binding of GenUiService.
//
//   POST /api/generate               {prompt, style?, profile?, session_id?, backend?, arm?}
//   POST /api/follow_up              {session_id, instruction}
//   GET  /api/runs/{id}/events       chunked NDJSON, one {seq, kind, payload} per line
//   GET  /api/sessions/{id}
//   GET  /api/pages/{id}/artifact
//   GET  /page/{id}                  final HTML, frame-embeddable by same origin only
//   POST /client-errors              {page_id, message, source, line}, any content type
//   POST /api/records                ComparisonRecord; Idempotency-Key header honored
//   GET  /image?query=...            GET /gen?prompt=...[&aspect=...]
//   GET  /healthz
//   everything else                  static files from the configured directory

#include <memory>
#include <string>
#include <thread>

#include "genui/serve/service.h"

namespace genui::serve {

class HttpServer {
 public:
  explicit HttpServer(GenUiService& svc);
  ~HttpServer();

  // Binds without accepting yet. Port 0 picks a free port; returns the
  // bound port or -1.
  int bind(const std::string& host, int port);
  // Accepts on the calling thread until stop().
  bool serve();
  // Accepts on a background thread.
  void start();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::thread thread_;
};

}  // namespace genui::serve
