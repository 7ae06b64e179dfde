#include "genui/html/dom.h"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>

#include "genui/util/strings.h"

namespace genui::html {

namespace {

struct NamedEntity {
  std::string_view name;
  std::string_view text;
};

// A small table covering what generated pages actually use. Unknown named
// references are left as written.
constexpr std::array<NamedEntity, 40> kEntities{{
    {"amp", "&"},        {"lt", "<"},         {"gt", ">"},         {"quot", "\""},
    {"apos", "'"},       {"nbsp", "\xC2\xA0"},  {"copy", "©"},  {"reg", "®"},
    {"trade", "™"}, {"hellip", "…"}, {"mdash", "—"}, {"ndash", "–"},
    {"laquo", "«"}, {"raquo", "»"}, {"middot", "·"}, {"bull", "•"},
    {"times", "×"}, {"divide", "÷"}, {"deg", "°"},  {"euro", "€"},
    {"pound", "£"}, {"yen", "¥"},   {"cent", "¢"},  {"sect", "§"},
    {"para", "¶"},  {"lsquo", "‘"}, {"rsquo", "’"}, {"ldquo", "“"},
    {"rdquo", "”"}, {"hearts", "♥"}, {"larr", "←"}, {"rarr", "→"},
    {"uarr", "↑"},  {"darr", "↓"},  {"plusmn", "±"}, {"frac12", "½"},
    {"sup2", "²"},  {"micro", "µ"}, {"star", "☆"},  {"check", "✓"},
}};

void append_utf8(std::string& out, std::uint32_t cp) {
  if (cp == 0 || cp > 0x10ffff || (cp >= 0xd800 && cp <= 0xdfff)) cp = 0xfffd;
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xc0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xe0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3f)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
  } else {
    out.push_back(static_cast<char>(0xf0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3f)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3f)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
  }
}

bool is_alnum(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
}

// Length of the character reference starting at s[0] == '&' (including the
// ';'), or 0 when it is not a well-formed reference.
std::size_t reference_length(std::string_view s) {
  if (s.size() < 3 || s[0] != '&') return 0;
  std::size_t i = 1;
  if (s[i] == '#') {
    ++i;
    bool hex = i < s.size() && (s[i] == 'x' || s[i] == 'X');
    if (hex) ++i;
    std::size_t digits = 0;
    while (i < s.size() && (hex ? std::isxdigit(static_cast<unsigned char>(s[i]))
                                : std::isdigit(static_cast<unsigned char>(s[i])))) {
      ++i;
      ++digits;
    }
    return (digits > 0 && i < s.size() && s[i] == ';') ? i + 1 : 0;
  }
  if (!std::isalpha(static_cast<unsigned char>(s[i]))) return 0;
  while (i < s.size() && is_alnum(s[i])) ++i;
  return (i < s.size() && s[i] == ';') ? i + 1 : 0;
}

void collect(Node& node, std::string_view tag, std::vector<Node*>& out) {
  for (auto& c : node.children) {
    if (c->kind == NodeKind::kElement) {
      if (tag.empty() || c->name == tag) out.push_back(c.get());
      collect(*c, tag, out);
    }
  }
}

Node* first_child_element(Node& node, std::string_view tag) {
  for (auto& c : node.children) {
    if (c->is_element(tag)) return c.get();
  }
  return nullptr;
}

}  // namespace

std::unique_ptr<Node> Node::make_element(std::string_view tag) {
  auto n = std::make_unique<Node>(NodeKind::kElement);
  n->name = to_lower(tag);
  n->source_name = std::string(tag);
  return n;
}

std::unique_ptr<Node> Node::make_text(std::string data) {
  auto n = std::make_unique<Node>(NodeKind::kText);
  n->data = std::move(data);
  return n;
}

std::unique_ptr<Node> Node::make_comment(std::string data) {
  auto n = std::make_unique<Node>(NodeKind::kComment);
  n->data = std::move(data);
  return n;
}

Attribute* Node::attr(std::string_view n) {
  for (auto& a : attributes) {
    if (iequals(a.name, n)) return &a;
  }
  return nullptr;
}

const Attribute* Node::attr(std::string_view n) const {
  for (const auto& a : attributes) {
    if (iequals(a.name, n)) return &a;
  }
  return nullptr;
}

std::optional<std::string> Node::get_attr(std::string_view n) const {
  const Attribute* a = attr(n);
  if (!a) return std::nullopt;
  return a->value;
}

void Node::set_attr(std::string_view n, std::string value) {
  if (Attribute* a = attr(n)) {
    a->set(std::move(value));
    return;
  }
  Attribute a;
  a.name = std::string(n);
  a.set(std::move(value));
  attributes.push_back(std::move(a));
}

void Node::set_bool_attr(std::string_view n) {
  if (attr(n)) return;
  Attribute a;
  a.name = std::string(n);
  a.has_value = false;
  a.raw.reset();
  attributes.push_back(std::move(a));
}

std::vector<std::string> Node::classes() const {
  std::vector<std::string> out;
  const Attribute* a = attr("class");
  if (!a) return out;
  std::string_view v = a->value;
  std::size_t i = 0;
  while (i < v.size()) {
    while (i < v.size() && is_ascii_space(v[i])) ++i;
    std::size_t start = i;
    while (i < v.size() && !is_ascii_space(v[i])) ++i;
    if (i > start) out.emplace_back(v.substr(start, i - start));
  }
  return out;
}

Node* Node::append_child(std::unique_ptr<Node> child) {
  child->parent = this;
  children.push_back(std::move(child));
  return children.back().get();
}

Node* Node::insert_child(std::size_t index, std::unique_ptr<Node> child) {
  child->parent = this;
  index = std::min(index, children.size());
  auto it = children.insert(children.begin() + static_cast<std::ptrdiff_t>(index), std::move(child));
  return it->get();
}

std::unique_ptr<Node> Node::detach() {
  if (!parent) return nullptr;
  auto& siblings = parent->children;
  auto it = std::find_if(siblings.begin(), siblings.end(),
                         [this](const auto& p) { return p.get() == this; });
  std::unique_ptr<Node> self = std::move(*it);
  siblings.erase(it);
  parent = nullptr;
  return self;
}

std::size_t Node::index_in_parent() const {
  if (!parent) return 0;
  const auto& siblings = parent->children;
  for (std::size_t i = 0; i < siblings.size(); ++i) {
    if (siblings[i].get() == this) return i;
  }
  return 0;
}

bool Node::has_ancestor(std::string_view tag) const {
  for (const Node* p = parent; p; p = p->parent) {
    if (p->is_element(tag)) return true;
  }
  return false;
}

std::string Node::raw_text() const {
  std::string out;
  for (const auto& c : children) {
    if (c->kind == NodeKind::kText) out += c->data;
  }
  return out;
}

void Node::set_raw_text(std::string body) {
  children.clear();
  if (!body.empty()) append_child(make_text(std::move(body)));
}

Document::Document() : root_(std::make_unique<Node>(NodeKind::kDocument)) {}

Node* Document::html_element() { return first_child_element(*root_, "html"); }

Node* Document::head() {
  Node* h = html_element();
  return h ? first_child_element(*h, "head") : nullptr;
}

Node* Document::body() {
  Node* h = html_element();
  return h ? first_child_element(*h, "body") : nullptr;
}

Node& Document::ensure_head() {
  Node* html = html_element();
  if (!html) {
    auto el = Node::make_element("html");
    std::size_t first = 0;
    while (first < root_->children.size() &&
           (root_->children[first]->kind == NodeKind::kDoctype ||
            root_->children[first]->kind == NodeKind::kComment ||
            (root_->children[first]->kind == NodeKind::kText &&
             is_blank(root_->children[first]->data)))) {
      ++first;
    }
    while (root_->children.size() > first) {
      auto child = std::move(root_->children[first]);
      root_->children.erase(root_->children.begin() + static_cast<std::ptrdiff_t>(first));
      el->append_child(std::move(child));
    }
    html = root_->append_child(std::move(el));
  }
  if (Node* h = first_child_element(*html, "head")) return *h;
  std::size_t pos = 0;
  while (pos < html->children.size() && html->children[pos]->kind != NodeKind::kElement) ++pos;
  return *html->insert_child(pos, Node::make_element("head"));
}

std::vector<Node*> Document::elements(std::string_view tag) {
  std::vector<Node*> out;
  collect(*root_, tag, out);
  return out;
}

std::vector<const Node*> Document::elements(std::string_view tag) const {
  std::vector<Node*> tmp;
  collect(*root_, tag, tmp);
  return {tmp.begin(), tmp.end()};
}

bool is_void_element(std::string_view tag) {
  static constexpr std::string_view kVoid[] = {"area", "base", "br",    "col",  "embed",
                                               "hr",   "img",  "input", "link", "meta",
                                               "param", "source", "track", "wbr"};
  return std::find(std::begin(kVoid), std::end(kVoid), tag) != std::end(kVoid);
}

bool is_raw_text_element(std::string_view tag) {
  return tag == "script" || tag == "style" || tag == "textarea" || tag == "title";
}

std::string escape_attribute(std::string_view value) {
  std::string out;
  out.reserve(value.size());
  for (char c : value) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string decode_entities(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    if (s[i] != '&') {
      out.push_back(s[i++]);
      continue;
    }
    std::size_t len = reference_length(s.substr(i));
    if (len == 0) {
      out.push_back(s[i++]);
      continue;
    }
    std::string_view ref = s.substr(i + 1, len - 2);
    if (ref[0] == '#') {
      bool hex = ref.size() > 1 && (ref[1] == 'x' || ref[1] == 'X');
      std::string_view digits = ref.substr(hex ? 2 : 1);
      std::uint32_t cp = 0;
      auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), cp, hex ? 16 : 10);
      if (ec != std::errc{}) cp = 0xfffd;
      append_utf8(out, cp);
    } else {
      auto it = std::find_if(kEntities.begin(), kEntities.end(),
                             [&](const NamedEntity& e) { return e.name == ref; });
      if (it == kEntities.end()) {
        out.append(s.substr(i, len));
      } else {
        out.append(it->text);
      }
    }
    i += len;
  }
  return out;
}

bool attribute_source_is_safe(const Attribute& a) {
  if (!a.has_value || !a.raw) return true;
  std::string_view raw = *a.raw;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    char c = raw[i];
    if (c == '<' || c == '>' || c == '"') return false;
    if (c == '&' && reference_length(raw.substr(i)) == 0) return false;
  }
  return true;
}

std::string visible_text(const Document& doc) {
  std::string out;
  std::function<void(const Node&)> walk = [&](const Node& n) {
    for (const auto& c : n.children) {
      if (c->kind == NodeKind::kText) {
        out += c->data;
      } else if (c->kind == NodeKind::kElement && c->name != "script" && c->name != "style") {
        walk(*c);
      }
    }
  };
  walk(doc.root());
  return out;
}

std::string locus_of(const Node& node) {
  std::vector<std::string> parts;
  for (const Node* n = &node; n && n->kind == NodeKind::kElement; n = n->parent) {
    std::size_t idx = 0;
    if (n->parent) {
      for (const auto& sib : n->parent->children) {
        if (sib.get() == n) break;
        if (sib->is_element(n->name)) ++idx;
      }
    }
    parts.push_back(n->name + "[" + std::to_string(idx) + "]");
  }
  std::string out;
  for (auto it = parts.rbegin(); it != parts.rend(); ++it) out += "/" + *it;
  return out.empty() ? "/" : out;
}

Node* resolve_locus(Document& doc, std::string_view path) {
  Node* cur = &doc.root();
  if (path.empty() || path[0] != '/') return nullptr;
  if (path == "/") return cur;
  for (std::string_view part : split(path.substr(1), '/')) {
    std::size_t lb = part.find('[');
    if (lb == std::string_view::npos || part.back() != ']') return nullptr;
    std::string_view tag = part.substr(0, lb);
    std::string_view idx_text = part.substr(lb + 1, part.size() - lb - 2);
    std::size_t idx = 0;
    auto [p, ec] = std::from_chars(idx_text.data(), idx_text.data() + idx_text.size(), idx);
    if (ec != std::errc{}) return nullptr;
    Node* next = nullptr;
    std::size_t seen = 0;
    for (auto& c : cur->children) {
      if (c->is_element(tag)) {
        if (seen == idx) {
          next = c.get();
          break;
        }
        ++seen;
      }
    }
    if (!next) return nullptr;
    cur = next;
  }
  return cur;
}

void for_each_element(Node& node, const std::function<void(Node&)>& fn) {
  for (std::size_t i = 0; i < node.children.size(); ++i) {
    Node& c = *node.children[i];
    if (c.kind == NodeKind::kElement) {
      fn(c);
      for_each_element(c, fn);
    }
  }
}

void for_each_element(const Node& node, const std::function<void(const Node&)>& fn) {
  for (const auto& c : node.children) {
    if (c->kind == NodeKind::kElement) {
      fn(*c);
      for_each_element(static_cast<const Node&>(*c), fn);
    }
  }
}

}  // namespace genui::html
