#pragma once

#include <chrono>
#include <map>
#include <optional>
#include <string>

namespace genui::net {

struct HttpResponse {
  int status = 0;
  std::string body;
  std::string content_type;
  std::string error;  // transport failure; status is 0 when set

  bool ok() const { return error.empty() && status >= 200 && status < 300; }
};

using Headers = std::map<std::string, std::string>;

// `url` is absolute: scheme://host[:port]/path?query. https requires the
// build to have TLS support.
HttpResponse http_get(const std::string& url, const Headers& headers,
                      std::chrono::milliseconds timeout);
HttpResponse http_post(const std::string& url, const std::string& body,
                       const std::string& content_type, const Headers& headers,
                       std::chrono::milliseconds timeout);

}  // namespace genui::net
