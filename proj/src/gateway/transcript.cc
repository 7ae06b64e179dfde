#include "genui/gateway/transcript.h"

#include "genui/util/strings.h"

namespace genui::gateway {

namespace {

void flush(std::vector<TranscriptRecord>& out, TranscriptRecord& rec,
           std::vector<std::string_view>& lines) {
  std::string payload;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (i) payload += '\n';
    payload += lines[i];
  }
  rec.payload = std::move(payload);
  out.push_back(std::move(rec));
  lines.clear();
}

}  // namespace

std::vector<TranscriptRecord> parse_transcript(std::string_view text) {
  std::vector<TranscriptRecord> out;
  if (text.empty()) return out;
  if (text.back() == '\n') text.remove_suffix(1);
  std::vector<std::string_view> all = split(text, '\n');

  bool expect_header = true;
  TranscriptRecord current;
  std::vector<std::string_view> payload;
  for (std::size_t i = 0; i < all.size(); ++i) {
    std::string_view line = all[i];
    std::size_t lineno = i + 1;
    if (expect_header) {
      std::string_view h = trim_right(line);
      current = TranscriptRecord{};
      if (h == "#chunk") {
        current.kind = TranscriptRecord::Kind::kChunk;
      } else if (h == "#tool_result") {
        current.kind = TranscriptRecord::Kind::kToolResult;
      } else if (h.substr(0, 11) == "#tool_call ") {
        current.kind = TranscriptRecord::Kind::kToolCall;
        current.tool_name = std::string(trim(h.substr(11)));
        if (current.tool_name.empty()) throw TranscriptError(lineno, "tool_call without a name");
      } else {
        throw TranscriptError(lineno, "expected #chunk, #tool_call <name> or #tool_result");
      }
      expect_header = false;
      continue;
    }
    if (trim_right(line) == "---") {
      flush(out, current, payload);
      expect_header = true;
      continue;
    }
    payload.push_back(line);
  }
  if (expect_header) {
    if (!all.empty() && !out.empty()) {
      throw TranscriptError(all.size(), "separator without a following record");
    }
  } else {
    flush(out, current, payload);
  }
  return out;
}

std::string format_transcript(const std::vector<TranscriptRecord>& records) {
  std::string out;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    if (i) out += "---\n";
    switch (r.kind) {
      case TranscriptRecord::Kind::kChunk: out += "#chunk\n"; break;
      case TranscriptRecord::Kind::kToolCall: out += "#tool_call " + r.tool_name + "\n"; break;
      case TranscriptRecord::Kind::kToolResult: out += "#tool_result\n"; break;
    }
    out += r.payload;
    out += '\n';
  }
  return out;
}

std::string transcript_output(const std::vector<TranscriptRecord>& records) {
  std::string out;
  for (const auto& r : records) {
    if (r.kind == TranscriptRecord::Kind::kChunk) out += r.payload;
  }
  return out;
}

}  // namespace genui::gateway
