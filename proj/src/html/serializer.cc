#include "genui/html/dom.h"

namespace genui::html {

namespace {

void write_attribute(std::string& out, const Attribute& a) {
  out += ' ';
  out += a.name;
  if (!a.has_value) return;
  out += '=';
  if (a.raw) {
    if (a.quote == 0) {
      out += *a.raw;
    } else {
      out += a.quote;
      out += *a.raw;
      out += a.quote;
    }
    return;
  }
  out += '"';
  out += escape_attribute(a.value);
  out += '"';
}

bool in_raw_text(const Node& text) {
  const Node* p = text.parent;
  return p && p->kind == NodeKind::kElement && is_raw_text_element(p->name) &&
         !p->has_ancestor("svg") && !p->has_ancestor("math");
}

// Text is written as stored, except that a '<' which would now open markup
// (left behind when the parser dropped a construct) is escaped.
void write_text(std::string& out, const Node& n) {
  if (in_raw_text(n)) {
    out += n.data;
    return;
  }
  const std::string& d = n.data;
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (d[i] == '<' && i + 1 < d.size()) {
      char c = d[i + 1];
      if ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '!' || c == '/' || c == '?') {
        out += "&lt;";
        continue;
      }
    }
    out.push_back(d[i]);
  }
}

void write(std::string& out, const Node& n) {
  switch (n.kind) {
    case NodeKind::kDocument:
      for (const auto& c : n.children) write(out, *c);
      return;
    case NodeKind::kDoctype:
      out += "<!";
      out += n.data;
      out += '>';
      return;
    case NodeKind::kText:
      write_text(out, n);
      return;
    case NodeKind::kComment:
      out += "<!--";
      out += n.data;
      out += "-->";
      return;
    case NodeKind::kElement:
      break;
  }
  const std::string& tag = n.source_name.empty() ? n.name : n.source_name;
  out += '<';
  out += tag;
  for (const auto& a : n.attributes) write_attribute(out, a);
  if (n.self_closing) {
    // An unquoted last value would swallow the slash.
    bool unquoted_tail = !n.attributes.empty() && n.attributes.back().has_value &&
                         n.attributes.back().raw && n.attributes.back().quote == 0;
    out += unquoted_tail ? " />" : "/>";
  } else {
    out += '>';
  }
  if (is_void_element(n.name)) return;
  for (const auto& c : n.children) write(out, *c);
  if (n.self_closing && n.children.empty() && !is_raw_text_element(n.name) &&
      (n.has_ancestor("svg") || n.has_ancestor("math"))) {
    return;
  }
  out += "</";
  out += tag;
  out += '>';
}

}  // namespace

std::string serialize(const Node& node) {
  std::string out;
  write(out, node);
  return out;
}

std::string serialize(const Document& doc) { return serialize(doc.root()); }

}  // namespace genui::html
