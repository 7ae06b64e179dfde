#pragma once

// Transcript files replay a model conversation exactly.
//
//   #chunk
//   <raw payload lines>
//   ---
//   #tool_call search
//   Intercontinental Singapore
//   ---
//   #tool_result
//   <recorded result, informational>
//
// Records are separated by a line that is exactly `---`. A record's payload
// is its lines after the header joined with '\n'; end a payload with an empty
// line to keep a trailing newline. A payload line equal to `---` cannot be
// represented.

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace genui::gateway {

struct TranscriptRecord {
  enum class Kind { kChunk, kToolCall, kToolResult };
  Kind kind = Kind::kChunk;
  std::string tool_name;  // kToolCall only
  std::string payload;

  bool operator==(const TranscriptRecord&) const = default;
};

class TranscriptError : public std::runtime_error {
 public:
  TranscriptError(std::size_t line, const std::string& what)
      : std::runtime_error("transcript line " + std::to_string(line) + ": " + what),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

std::vector<TranscriptRecord> parse_transcript(std::string_view text);
std::string format_transcript(const std::vector<TranscriptRecord>& records);

// Concatenation of all chunk payloads: the model's complete raw output.
std::string transcript_output(const std::vector<TranscriptRecord>& records);

}  // namespace genui::gateway
