#include <algorithm>
#include <cctype>

#include "genui/html/dom.h"
#include "genui/html/js_scan.h"
#include "genui/util/strings.h"

namespace genui::html {

namespace {

bool is_letter(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }

bool in_list(std::string_view tag, std::initializer_list<std::string_view> list) {
  return std::find(list.begin(), list.end(), tag) != list.end();
}

// Start tags that implicitly close an open <p>.
bool closes_p(std::string_view tag) {
  return in_list(tag, {"address", "article", "aside",  "blockquote", "details", "dialog",
                       "div",     "dl",      "fieldset", "figcaption", "figure", "footer",
                       "form",    "h1",      "h2",     "h3",         "h4",      "h5",
                       "h6",      "header",  "hgroup", "hr",         "main",    "menu",
                       "nav",     "ol",      "p",      "pre",        "section", "table",
                       "ul",      "li",      "dd",     "dt"});
}

bool is_heading(std::string_view tag) {
  return tag.size() == 2 && tag[0] == 'h' && tag[1] >= '1' && tag[1] <= '6';
}

bool is_scope_boundary(std::string_view tag) {
  return in_list(tag, {"html", "table", "td", "th", "caption", "template", "object", "applet",
                       "marquee", "svg", "math"});
}

// Elements that stop the search for a matching end tag of a phrasing element.
bool is_special(std::string_view tag) {
  return is_scope_boundary(tag) || closes_p(tag) ||
         in_list(tag, {"body", "head", "button", "tbody", "thead", "tfoot", "tr", "select",
                       "textarea", "iframe", "noscript", "script", "style", "center"});
}

bool closing_tag_at(std::string_view s, std::size_t pos, std::string_view tag) {
  if (s.compare(pos, 2, "</") != 0) return false;
  if (!istarts_with(s.substr(pos + 2), tag)) return false;
  std::size_t after = pos + 2 + tag.size();
  if (after >= s.size()) return true;
  char c = s[after];
  return c == '>' || c == '/' || is_ascii_space(c);
}

std::size_t find_closing_tag(std::string_view s, std::size_t from, std::string_view tag) {
  for (std::size_t pos = s.find("</", from); pos != std::string_view::npos;
       pos = s.find("</", pos + 1)) {
    if (closing_tag_at(s, pos, tag)) return pos;
  }
  return std::string_view::npos;
}

// True when the quoted string around `i` closes before the end of its line.
bool string_closes_on_line(std::string_view s, std::size_t i, char quote) {
  for (std::size_t j = i; j < s.size() && s[j] != '\n'; ++j) {
    if (s[j] == '\\') {
      ++j;
    } else if (s[j] == quote) {
      return true;
    }
  }
  return false;
}

// End of a script body: the first "</script" that is not inside a quoted JS
// string closing on the same line. Template literals and comments do not
// shield, matching what a browser would do with them.
std::size_t find_script_end(std::string_view s, std::size_t from) {
  std::string_view body = s.substr(from);
  std::vector<JsMode> modes = js_modes(body);
  for (std::size_t i = body.find("</"); i != std::string_view::npos; i = body.find("</", i + 1)) {
    if (!closing_tag_at(body, i, "script")) continue;
    if (modes[i] == JsMode::kSingle && string_closes_on_line(body, i, '\'')) continue;
    if (modes[i] == JsMode::kDouble && string_closes_on_line(body, i, '"')) continue;
    return from + i;
  }
  return std::string_view::npos;
}

class Parser {
 public:
  explicit Parser(std::string_view src) : src_(src) { stack_.push_back(&doc_.root()); }

  Document run() {
    if (src_.find('\0') != std::string_view::npos) throw ParseError("input contains a NUL byte");
    while (pos_ < src_.size()) {
      if (src_[pos_] == '<') {
        if (!markup()) text(pos_, pos_ + 1);
      } else {
        std::size_t lt = src_.find('<', pos_);
        if (lt == std::string_view::npos) lt = src_.size();
        text(pos_, lt);
      }
    }
    if (!saw_element_) throw ParseError("no elements found");
    return std::move(doc_);
  }

 private:
  Node& current() { return *stack_.back(); }

  void text(std::size_t from, std::size_t to) {
    pos_ = to;
    if (to <= from) return;
    Node& cur = current();
    if (!cur.children.empty() && cur.children.back()->kind == NodeKind::kText) {
      cur.children.back()->data.append(src_.substr(from, to - from));
    } else {
      cur.append_child(Node::make_text(std::string(src_.substr(from, to - from))));
    }
  }

  // Consumes one markup construct at pos_. Returns false when the '<' is
  // plain text.
  bool markup() {
    std::string_view rest = src_.substr(pos_);
    if (rest.substr(0, 4) == "<!--") {
      comment();
      return true;
    }
    if (rest.size() >= 2 && (rest[1] == '!' || rest[1] == '?')) {
      declaration();
      return true;
    }
    if (rest.size() >= 2 && rest[1] == '/') {
      if (rest.size() >= 3 && is_letter(rest[2])) {
        end_tag();
      } else if (rest.size() >= 3 && rest[2] == '>') {
        pos_ += 3;
      } else if (rest.size() >= 3) {
        bogus_comment(2);
      } else {
        return false;
      }
      return true;
    }
    if (rest.size() >= 2 && is_letter(rest[1])) {
      start_tag();
      return true;
    }
    return false;
  }

  void comment() {
    std::size_t body = pos_ + 4;
    std::string_view after = src_.substr(body);
    if (after.substr(0, 1) == ">") {
      current().append_child(Node::make_comment(""));
      pos_ = body + 1;
      return;
    }
    if (after.substr(0, 2) == "->") {
      current().append_child(Node::make_comment(""));
      pos_ = body + 2;
      return;
    }
    std::size_t end = src_.find("-->", body);
    if (end == std::string_view::npos) {
      current().append_child(Node::make_comment(std::string(src_.substr(body))));
      pos_ = src_.size();
      return;
    }
    current().append_child(Node::make_comment(std::string(src_.substr(body, end - body))));
    pos_ = end + 3;
  }

  // <!DOCTYPE ...>, <!something> and <?...?> are kept as verbatim
  // declarations; only a doctype is distinguished by its content.
  void declaration() {
    if (src_[pos_ + 1] == '?') {
      bogus_comment(1);
      return;
    }
    std::size_t end = src_.find('>', pos_);
    if (end == std::string_view::npos) end = src_.size();
    std::string data(src_.substr(pos_ + 2, end - pos_ - 2));
    if (istarts_with(data, "doctype")) {
      auto n = std::make_unique<Node>(NodeKind::kDoctype);
      n->data = std::move(data);
      current().append_child(std::move(n));
    } else {
      current().append_child(Node::make_comment(std::move(data)));
    }
    pos_ = std::min(end + 1, src_.size());
  }

  void bogus_comment(std::size_t skip) {
    std::size_t end = src_.find('>', pos_);
    if (end == std::string_view::npos) end = src_.size();
    current().append_child(Node::make_comment(std::string(src_.substr(pos_ + skip, end - pos_ - skip))));
    pos_ = std::min(end + 1, src_.size());
  }

  std::size_t read_name(std::size_t i, std::string& out) {
    std::size_t start = i;
    while (i < src_.size() && !is_ascii_space(src_[i]) && src_[i] != '/' && src_[i] != '>') ++i;
    out.assign(src_.substr(start, i - start));
    return i;
  }

  void end_tag() {
    std::string raw_name;
    std::size_t i = read_name(pos_ + 2, raw_name);
    std::size_t gt = src_.find('>', i);
    if (gt == std::string_view::npos) {
      pos_ = src_.size();  // truncated end tag: dropped
      return;
    }
    pos_ = gt + 1;
    close_element(to_lower(raw_name));
  }

  void start_tag() {
    auto el = std::make_unique<Node>(NodeKind::kElement);
    std::size_t i = read_name(pos_ + 1, el->source_name);
    el->name = to_lower(el->source_name);
    bool complete = false;
    while (i < src_.size()) {
      char c = src_[i];
      if (is_ascii_space(c)) {
        ++i;
      } else if (c == '>') {
        ++i;
        complete = true;
        break;
      } else if (c == '/') {
        ++i;
        if (i < src_.size() && src_[i] == '>') {
          el->self_closing = true;
          ++i;
          complete = true;
          break;
        }
      } else {
        i = attribute(i, *el);
      }
    }
    if (!complete) {
      pos_ = src_.size();  // tag truncated by end of input: dropped
      return;
    }
    pos_ = i;
    saw_element_ = true;
    insert(std::move(el));
  }

  std::size_t attribute(std::size_t i, Node& el) {
    std::size_t start = i;
    ++i;  // the first character may be '='
    while (i < src_.size() && !is_ascii_space(src_[i]) && src_[i] != '/' && src_[i] != '>' &&
           src_[i] != '=') {
      ++i;
    }
    Attribute a;
    a.name.assign(src_.substr(start, i - start));
    std::size_t j = i;
    while (j < src_.size() && is_ascii_space(src_[j])) ++j;
    if (j < src_.size() && src_[j] == '=') {
      ++j;
      while (j < src_.size() && is_ascii_space(src_[j])) ++j;
      if (j < src_.size() && (src_[j] == '"' || src_[j] == '\'')) {
        char q = src_[j];
        std::size_t close = src_.find(q, j + 1);
        if (close == std::string_view::npos) close = src_.size();
        a.raw = std::string(src_.substr(j + 1, close - j - 1));
        a.quote = q;
        i = std::min(close + 1, src_.size());
      } else {
        std::size_t v = j;
        while (j < src_.size() && !is_ascii_space(src_[j]) && src_[j] != '>') ++j;
        a.raw = std::string(src_.substr(v, j - v));
        a.quote = 0;
        i = j;
      }
      a.value = decode_entities(*a.raw);
      a.has_value = true;
    } else {
      a.has_value = false;
    }
    if (!el.attr(a.name)) el.attributes.push_back(std::move(a));
    return i;
  }

  bool in_foreign_content() const {
    for (const Node* n : stack_) {
      if (n->is_element("svg") || n->is_element("math")) return true;
    }
    return false;
  }

  bool has_in_scope(std::string_view tag, std::initializer_list<std::string_view> extra = {}) const {
    for (auto it = stack_.rbegin(); it != stack_.rend(); ++it) {
      const Node* n = *it;
      if (n->is_element(tag)) return true;
      if (n->kind != NodeKind::kElement) return false;
      if (is_scope_boundary(n->name) || in_list(n->name, extra)) return false;
    }
    return false;
  }

  void pop_until(std::string_view tag) {
    while (stack_.size() > 1) {
      bool match = current().is_element(tag);
      stack_.pop_back();
      if (match) return;
    }
  }

  // Pops through the nearest open element named in `tags`, unless a
  // boundary element comes first. Scope boundaries always stop the search
  // when `default_scope` is set.
  void pop_until_any(std::initializer_list<std::string_view> tags,
                     std::initializer_list<std::string_view> boundaries, bool default_scope = true) {
    for (auto it = stack_.rbegin(); it != stack_.rend(); ++it) {
      const Node* n = *it;
      if (n->kind != NodeKind::kElement) return;
      if (in_list(n->name, tags)) {
        std::string name = n->name;
        pop_until(name);
        return;
      }
      if (in_list(n->name, boundaries) || (default_scope && is_scope_boundary(n->name))) return;
    }
  }

  Node* find_open(std::string_view tag) {
    for (Node* n : stack_) {
      if (n->is_element(tag)) return n;
    }
    return nullptr;
  }

  void merge_attributes(Node& into, const Node& from) {
    for (const auto& a : from.attributes) {
      if (!into.attr(a.name)) into.attributes.push_back(a);
    }
  }

  void insert(std::unique_ptr<Node> el) {
    const std::string name = el->name;
    bool foreign = in_foreign_content();

    if (name == "html" || name == "body" || name == "head") {
      Node* existing = nullptr;
      if (name == "html") {
        existing = doc_.html_element();
      } else if (name == "head") {
        existing = seen_head_;
      } else {
        existing = seen_body_;
      }
      if (existing) {
        merge_attributes(*existing, *el);
        return;
      }
    }

    if (!foreign) {
      if (closes_p(name) && has_in_scope("p", {"button"})) pop_until("p");
      if (name == "li") pop_until_any({"li"}, {"ul", "ol"});
      if (name == "dd" || name == "dt") pop_until_any({"dd", "dt"}, {"dl"});
      if (name == "option" && current().is_element("option")) stack_.pop_back();
      if (name == "optgroup") {
        if (current().is_element("option")) stack_.pop_back();
        if (current().is_element("optgroup")) stack_.pop_back();
      }
      if (name == "tr") pop_until_any({"tr"}, {"table", "tbody", "thead", "tfoot", "html"}, false);
      if (name == "td" || name == "th") pop_until_any({"td", "th"}, {"tr", "table", "html"}, false);
      if (name == "thead" || name == "tbody" || name == "tfoot") {
        pop_until_any({"thead", "tbody", "tfoot"}, {"table", "html"}, false);
      }
      if (is_heading(name) && is_heading(current().name)) stack_.pop_back();
      if (name == "a" && has_in_scope("a")) pop_until("a");
    }

    Node* node = current().append_child(std::move(el));
    if (name == "head") seen_head_ = node;
    if (name == "body") seen_body_ = node;

    if (!foreign && is_raw_text_element(name)) {
      raw_text_body(*node);
      return;
    }
    if (is_void_element(name) || (foreign && node->self_closing)) return;
    if (stack_.size() > kMaxDepth) throw ParseError("element nesting exceeds depth limit");
    stack_.push_back(node);
  }

  void raw_text_body(Node& node) {
    std::size_t end = node.name == "script" ? find_script_end(src_, pos_)
                                            : find_closing_tag(src_, pos_, node.name);
    if (end == std::string_view::npos) end = src_.size();
    if (end > pos_) node.append_child(Node::make_text(std::string(src_.substr(pos_, end - pos_))));
    if (end >= src_.size()) {
      pos_ = src_.size();
      return;
    }
    std::size_t gt = src_.find('>', end);
    pos_ = gt == std::string_view::npos ? src_.size() : gt + 1;
  }

  void close_element(const std::string& name) {
    if (name == "br") return;
    if (name == "html" || name == "body" || name == "head") {
      if (find_open(name)) pop_until(name);
      return;
    }
    if (is_special(name) || name == "a" || in_foreign_content()) {
      if (name == "li") {
        if (has_in_scope("li", {"ul", "ol"})) pop_until("li");
        return;
      }
      if (name == "p") {
        if (has_in_scope("p", {"button"})) pop_until("p");
        return;
      }
      if (has_in_scope(name)) pop_until(name);
      return;
    }
    for (auto it = stack_.rbegin(); it != stack_.rend(); ++it) {
      Node* n = *it;
      if (n->kind != NodeKind::kElement) return;
      if (n->name == name) {
        pop_until(name);
        return;
      }
      if (is_special(n->name)) return;
    }
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  Document doc_;
  std::vector<Node*> stack_;
  Node* seen_head_ = nullptr;
  Node* seen_body_ = nullptr;
  bool saw_element_ = false;
};

}  // namespace

Document parse(std::string_view source) { return Parser(source).run(); }

}  // namespace genui::html
