#pragma once

// Just enough JavaScript lexing to tell strings and comments from code.
// Regex literals are not recognized; single- and double-quoted strings end
// at a newline so one stray quote cannot hide the rest of a script. A line
// starting with a markdown fence (```) is lexed as a comment.

#include <string_view>
#include <vector>

namespace genui::html {

enum class JsMode : unsigned char {
  kCode,
  kSingle,
  kDouble,
  kTemplate,
  kLineComment,
  kBlockComment,
};

// Mode in effect at each byte, i.e. before that byte is consumed.
std::vector<JsMode> js_modes(std::string_view src);

inline bool is_string_mode(JsMode m) {
  return m == JsMode::kSingle || m == JsMode::kDouble || m == JsMode::kTemplate;
}

}  // namespace genui::html
