#include "genui/net/http_client.h"

#include <httplib.h>

namespace genui::net {

namespace {

struct UrlParts {
  std::string origin;  // scheme://host[:port]
  std::string path;    // /path?query
};

std::optional<UrlParts> split_url(const std::string& url) {
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) return std::nullopt;
  auto path_begin = url.find('/', scheme_end + 3);
  UrlParts parts;
  if (path_begin == std::string::npos) {
    parts.origin = url;
    parts.path = "/";
  } else {
    parts.origin = url.substr(0, path_begin);
    parts.path = url.substr(path_begin);
  }
  return parts;
}

template <typename Fn>
HttpResponse with_client(const std::string& url, std::chrono::milliseconds timeout,
                         Fn&& fn) {
  HttpResponse out;
  auto parts = split_url(url);
  if (!parts) {
    out.error = "malformed url: " + url;
    return out;
  }
  httplib::Client cli(parts->origin);
  if (!cli.is_valid()) {
    out.error = "unsupported url: " + url;
    return out;
  }
  auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout);
  auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout - secs);
  cli.set_connection_timeout(secs.count(), usecs.count());
  cli.set_read_timeout(secs.count(), usecs.count());
  cli.set_write_timeout(secs.count(), usecs.count());
  auto res = fn(cli, parts->path);
  if (!res) {
    out.error = httplib::to_string(res.error());
    return out;
  }
  out.status = res->status;
  out.body = res->body;
  out.content_type = res->get_header_value("Content-Type");
  return out;
}

httplib::Headers to_headers(const Headers& headers) {
  httplib::Headers h;
  for (const auto& [k, v] : headers) h.emplace(k, v);
  return h;
}

}  // namespace

HttpResponse http_get(const std::string& url, const Headers& headers,
                      std::chrono::milliseconds timeout) {
  return with_client(url, timeout, [&](httplib::Client& cli, const std::string& path) {
    return cli.Get(path, to_headers(headers));
  });
}

HttpResponse http_post(const std::string& url, const std::string& body,
                       const std::string& content_type, const Headers& headers,
                       std::chrono::milliseconds timeout) {
  return with_client(url, timeout, [&](httplib::Client& cli, const std::string& path) {
    return cli.Post(path, to_headers(headers), body, content_type);
  });
}

}  // namespace genui::net
