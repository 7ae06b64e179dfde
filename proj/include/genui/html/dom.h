#pragma once

// Minimal DOM for post-processing generated pages.
//
// The tree keeps source text wherever it can: text nodes, comments, raw-text
// element bodies and untouched attribute values are serialized exactly as
// they were read. Serialization is a fixed point:
//   serialize(parse(serialize(doc))) == serialize(doc).

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace genui::html {

enum class NodeKind { kDocument, kDoctype, kElement, kText, kComment };

struct Attribute {
  std::string name;                // as written in the source
  std::string value;               // entity-decoded
  std::optional<std::string> raw;  // source form; emitted verbatim when set
  char quote = '"';                // quote used for `raw`; 0 means unquoted
  bool has_value = true;           // false for bare boolean attributes

  // Replaces the value; the attribute is re-emitted in canonical form.
  void set(std::string v) {
    value = std::move(v);
    raw.reset();
    quote = '"';
    has_value = true;
  }
};

class Node {
 public:
  explicit Node(NodeKind kind) : kind(kind) {}
  Node(const Node&) = delete;
  Node& operator=(const Node&) = delete;

  static std::unique_ptr<Node> make_element(std::string_view tag);
  static std::unique_ptr<Node> make_text(std::string data);
  static std::unique_ptr<Node> make_comment(std::string data);

  NodeKind kind;
  std::string name;         // lowercase tag name (elements)
  std::string source_name;  // tag name as written; used for serialization
  std::string data;         // text, comment or doctype contents
  std::vector<Attribute> attributes;
  bool self_closing = false;
  Node* parent = nullptr;
  std::vector<std::unique_ptr<Node>> children;

  bool is_element() const { return kind == NodeKind::kElement; }
  bool is_element(std::string_view tag) const { return kind == NodeKind::kElement && name == tag; }

  Attribute* attr(std::string_view name);
  const Attribute* attr(std::string_view name) const;
  std::optional<std::string> get_attr(std::string_view name) const;
  bool has_attr(std::string_view name) const { return attr(name) != nullptr; }
  void set_attr(std::string_view name, std::string value);
  void set_bool_attr(std::string_view name);

  std::vector<std::string> classes() const;

  Node* append_child(std::unique_ptr<Node> child);
  Node* insert_child(std::size_t index, std::unique_ptr<Node> child);
  std::unique_ptr<Node> detach();
  std::size_t index_in_parent() const;
  bool has_ancestor(std::string_view tag) const;

  // For raw-text elements (script, style, ...): the single text child.
  std::string raw_text() const;
  void set_raw_text(std::string body);
};

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class Document {
 public:
  Document();
  Document(Document&&) noexcept = default;
  Document& operator=(Document&&) noexcept = default;

  Node& root() { return *root_; }
  const Node& root() const { return *root_; }

  Node* html_element();
  Node* head();
  Node* body();
  // Creates <html> and <head> as needed. A missing <html> wraps the
  // document's content after any doctype and leading comments.
  Node& ensure_head();

  std::vector<Node*> elements(std::string_view tag = {});
  std::vector<const Node*> elements(std::string_view tag = {}) const;

 private:
  std::unique_ptr<Node> root_;
};

inline constexpr std::size_t kMaxDepth = 1024;

bool is_void_element(std::string_view tag);
bool is_raw_text_element(std::string_view tag);

// Lenient, browser-style parse. Throws ParseError only when the input nests
// deeper than kMaxDepth, contains a NUL byte, or has no element at all.
// Script bodies end at the first "</script" that is not inside a quoted JS
// string closing on the same line, so `"</script>"` stays part of the script.
Document parse(std::string_view source);
std::string serialize(const Document& doc);
std::string serialize(const Node& node);

std::string escape_attribute(std::string_view value);
std::string decode_entities(std::string_view s);
// True when the source form needs no re-escaping: no raw quotes or angle
// brackets and every '&' begins a character reference.
bool attribute_source_is_safe(const Attribute& a);

// Concatenated text outside script and style elements.
std::string visible_text(const Document& doc);

// Element path such as "/html[0]/body[0]/div[2]", indexed among same-tag
// siblings. resolve_locus returns nullptr when the path does not resolve.
std::string locus_of(const Node& node);
Node* resolve_locus(Document& doc, std::string_view path);

void for_each_element(Node& node, const std::function<void(Node&)>& fn);
void for_each_element(const Node& node, const std::function<void(const Node&)>& fn);

}  // namespace genui::html
