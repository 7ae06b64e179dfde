#include "genui/html/js_scan.h"

namespace genui::html {

std::vector<JsMode> js_modes(std::string_view s) {
  std::vector<JsMode> out(s.size(), JsMode::kCode);
  std::vector<JsMode> stack{JsMode::kCode};
  std::vector<int> braces{0};  // open '{' count per code level
  auto peek = [&](std::size_t i) { return i + 1 < s.size() ? s[i + 1] : '\0'; };
  auto at_line_start = [&](std::size_t i) {
    while (i > 0 && (s[i - 1] == ' ' || s[i - 1] == '\t')) --i;
    return i == 0 || s[i - 1] == '\n';
  };
  for (std::size_t i = 0; i < s.size(); ++i) {
    JsMode m = stack.back();
    out[i] = m;
    char c = s[i];
    auto mark_next = [&] {
      if (i + 1 < s.size()) out[i + 1] = m;
      ++i;
    };
    switch (m) {
      case JsMode::kCode:
        if (c == '`' && s.compare(i, 3, "```") == 0 && at_line_start(i)) {
          // A markdown fence line left in the script; not a template literal.
          stack.push_back(JsMode::kLineComment);
        } else if (c == '\'') {
          stack.push_back(JsMode::kSingle);
        } else if (c == '"') {
          stack.push_back(JsMode::kDouble);
        } else if (c == '`') {
          stack.push_back(JsMode::kTemplate);
        } else if (c == '/' && peek(i) == '/') {
          stack.push_back(JsMode::kLineComment);
          m = JsMode::kLineComment;
          mark_next();
        } else if (c == '/' && peek(i) == '*') {
          stack.push_back(JsMode::kBlockComment);
          m = JsMode::kBlockComment;
          mark_next();
        } else if (c == '{') {
          ++braces.back();
        } else if (c == '}') {
          if (braces.back() > 0) {
            --braces.back();
          } else if (stack.size() > 1) {
            // Ends a ${...} substitution inside a template literal.
            stack.pop_back();
            braces.pop_back();
          }
        }
        break;
      case JsMode::kSingle:
      case JsMode::kDouble:
        if (c == '\\' && peek(i) != '\n') {
          mark_next();
        } else if (c == '\n' || (c == '\'' && m == JsMode::kSingle) ||
                   (c == '"' && m == JsMode::kDouble)) {
          stack.pop_back();
        }
        break;
      case JsMode::kTemplate:
        if (c == '\\') {
          mark_next();
        } else if (c == '`') {
          stack.pop_back();
        } else if (c == '$' && peek(i) == '{') {
          mark_next();
          stack.push_back(JsMode::kCode);
          braces.push_back(0);
        }
        break;
      case JsMode::kLineComment:
        if (c == '\n') stack.pop_back();
        break;
      case JsMode::kBlockComment:
        if (c == '*' && peek(i) == '/') {
          mark_next();
          stack.pop_back();
        }
        break;
    }
  }
  return out;
}

}  // namespace genui::html
