#include "genui/extract/extractor.h"

#include "genui/util/strings.h"

namespace genui::extract {

namespace {

constexpr std::string_view kBom = "\xEF\xBB\xBF";

std::string_view skip_bom_and_space(std::string_view s) {
  while (true) {
    std::string_view t = trim_left(s);
    if (t.substr(0, kBom.size()) == kBom) {
      s = t.substr(kBom.size());
      continue;
    }
    return t;
  }
}

bool has_doctype(std::string_view html) {
  std::string_view s = skip_bom_and_space(html);
  constexpr std::string_view kDoctype = "<!doctype";
  if (!istarts_with(s, kDoctype)) return false;
  s.remove_prefix(kDoctype.size());
  if (s.empty() || !is_ascii_space(s.front())) return false;
  s = trim_left(s);
  if (!istarts_with(s, "html")) return false;
  s.remove_prefix(4);
  return !s.empty() && (s.front() == '>' || is_ascii_space(s.front()));
}

bool has_close_tag(std::string_view html) {
  return iends_with(trim_right(html), "</html>");
}

// Position just past the '>' closing the tag that starts at `lt`.
std::size_t after_tag(std::string_view s, std::size_t lt) {
  std::size_t gt = s.find('>', lt);
  return gt == std::string_view::npos ? s.size() : gt + 1;
}

std::size_t find_open_tag(std::string_view s, std::string_view name, std::size_t from = 0) {
  std::string needle = "<" + std::string(name);
  std::size_t pos = from;
  while ((pos = ifind(s, needle, pos)) != std::string_view::npos) {
    std::size_t next = pos + needle.size();
    if (next >= s.size()) return std::string_view::npos;
    char c = s[next];
    if (c == '>' || c == '/' || is_ascii_space(c)) return pos;
    pos = next;
  }
  return std::string_view::npos;
}

bool body_is_empty(std::string_view html) {
  std::size_t end = html.size();
  for (std::size_t p = 0; (p = ifind(html, "</html", p)) != std::string_view::npos; ++p) end = p;

  std::size_t start;
  std::size_t body = find_open_tag(html, "body");
  if (body != std::string_view::npos) {
    start = after_tag(html, body);
    std::size_t close = ifind(html, "</body", start);
    if (close != std::string_view::npos) end = close;
  } else if (std::size_t head_close = ifind(html, "</head"); head_close != std::string_view::npos) {
    start = after_tag(html, head_close);
  } else if (std::size_t root = find_open_tag(html, "html"); root != std::string_view::npos) {
    start = after_tag(html, root);
  } else {
    start = after_tag(html, ifind(html, "<!doctype"));
  }
  if (start >= end) return true;
  return is_blank(html.substr(start, end - start));
}

}  // namespace

std::string_view to_string(Status s) {
  switch (s) {
    case Status::kClean: return "clean";
    case Status::kNoisyOk: return "noisy_ok";
    case Status::kError: return "error";
  }
  return "unknown";
}

std::string_view to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::kMarkerMissing: return "marker_missing";
    case ErrorKind::kMarkerUnterminated: return "marker_unterminated";
    case ErrorKind::kDoctypeMissing: return "doctype_missing";
    case ErrorKind::kCloseTagMissing: return "close_tag_missing";
    case ErrorKind::kEmptyBody: return "empty_body";
  }
  return "unknown";
}

std::optional<Status> status_from_string(std::string_view s) {
  for (Status v : {Status::kClean, Status::kNoisyOk, Status::kError}) {
    if (to_string(v) == s) return v;
  }
  return std::nullopt;
}

std::optional<ErrorKind> error_kind_from_string(std::string_view s) {
  for (ErrorKind v : {ErrorKind::kMarkerMissing, ErrorKind::kMarkerUnterminated,
                      ErrorKind::kDoctypeMissing, ErrorKind::kCloseTagMissing,
                      ErrorKind::kEmptyBody}) {
    if (to_string(v) == s) return v;
  }
  return std::nullopt;
}

ExtractedPage extract(std::string_view raw) {
  ExtractedPage page;
  std::size_t open = raw.find(kOpenFence);
  if (open == std::string_view::npos) {
    page.leading_noise = std::string(raw);
    page.error_kind = ErrorKind::kMarkerMissing;
    return page;
  }
  page.leading_noise = std::string(raw.substr(0, open));
  std::size_t html_start = open + kOpenFence.size();
  std::size_t close = raw.find(kCloseFence, html_start);
  if (close == std::string_view::npos) {
    page.html = std::string(raw.substr(html_start));
    page.error_kind = ErrorKind::kMarkerUnterminated;
    return page;
  }
  page.html = std::string(raw.substr(html_start, close - html_start));
  page.trailing_noise = std::string(raw.substr(close + kCloseFence.size()));

  if (!has_doctype(page.html)) {
    page.error_kind = ErrorKind::kDoctypeMissing;
  } else if (!has_close_tag(page.html)) {
    page.error_kind = ErrorKind::kCloseTagMissing;
  } else if (body_is_empty(page.html)) {
    page.error_kind = ErrorKind::kEmptyBody;
  }
  if (page.error_kind) return page;

  page.status = page.leading_noise.empty() && page.trailing_noise.empty() ? Status::kClean
                                                                          : Status::kNoisyOk;
  return page;
}

bool is_output_error(const ExtractedPage& page) { return page.status == Status::kError; }

std::string reconstruct(const ExtractedPage& page) {
  std::string out = page.leading_noise;
  out += kOpenFence;
  out += page.html;
  out += kCloseFence;
  out += page.trailing_noise;
  return out;
}

std::string IncrementalExtractor::feed(std::string_view chunk) {
  std::string out;
  if (state_ == State::kClosed) return out;
  pending_.append(chunk);
  if (state_ == State::kBeforeOpen) {
    std::size_t open = pending_.find(kOpenFence);
    if (open == std::string::npos) {
      // Only a suffix shorter than the fence can still begin a match.
      if (pending_.size() >= kOpenFence.size()) {
        pending_.erase(0, pending_.size() - (kOpenFence.size() - 1));
      }
      return out;
    }
    pending_.erase(0, open + kOpenFence.size());
    state_ = State::kInside;
  }
  std::size_t close = pending_.find(kCloseFence);
  if (close != std::string::npos) {
    out = pending_.substr(0, close);
    pending_.clear();
    state_ = State::kClosed;
    return out;
  }
  std::size_t hold = 0;
  while (hold < kCloseFence.size() - 1 && hold < pending_.size() &&
         pending_[pending_.size() - 1 - hold] == '`') {
    ++hold;
  }
  out = pending_.substr(0, pending_.size() - hold);
  pending_.erase(0, pending_.size() - hold);
  return out;
}

std::string IncrementalExtractor::finish() {
  std::string out;
  if (state_ == State::kInside) out = std::move(pending_);
  pending_.clear();
  return out;
}

}  // namespace genui::extract
