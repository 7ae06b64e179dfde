#pragma once

// Pulls the fenced HTML document out of raw model output.
//
// Grammar: the page starts right after the first "```html" token and ends
// right before the next "```". Everything outside is noise, kept verbatim.
// A fence inside the page (e.g. in a <pre>) ends the page early; that is a
// known, deterministic limitation.

#include <optional>
#include <string>
#include <string_view>

namespace genui::extract {

inline constexpr std::string_view kOpenFence = "```html";
inline constexpr std::string_view kCloseFence = "```";

enum class Status { kClean, kNoisyOk, kError };

enum class ErrorKind {
  kMarkerMissing,
  kMarkerUnterminated,
  kDoctypeMissing,
  kCloseTagMissing,
  kEmptyBody,
};

std::string_view to_string(Status s);
std::string_view to_string(ErrorKind k);
std::optional<Status> status_from_string(std::string_view s);
std::optional<ErrorKind> error_kind_from_string(std::string_view s);

struct ExtractedPage {
  std::string html;
  std::string leading_noise;
  std::string trailing_noise;
  Status status = Status::kError;
  std::optional<ErrorKind> error_kind;

  bool operator==(const ExtractedPage&) const = default;
};

// Total and pure; every failure is encoded in status/error_kind.
ExtractedPage extract(std::string_view raw);

bool is_output_error(const ExtractedPage& page);

// Inverse of a successful extract: leading + fence + html + fence + trailing.
std::string reconstruct(const ExtractedPage& page);

// Streaming counterpart of extract(): feed raw chunks as they arrive and get
// back the bytes of the fenced region seen so far. The concatenation of all
// returned fragments equals extract(<all chunks>).html whenever the opening
// fence is present.
class IncrementalExtractor {
 public:
  std::string feed(std::string_view chunk);
  // Flushes held-back bytes at end of input.
  std::string finish();

  bool opened() const { return state_ != State::kBeforeOpen; }
  bool closed() const { return state_ == State::kClosed; }

 private:
  enum class State { kBeforeOpen, kInside, kClosed };
  State state_ = State::kBeforeOpen;
  std::string pending_;  // bytes that might begin a fence token
};

}  // namespace genui::extract
