#include <algorithm>
#include <cctype>
#include <functional>
#include <map>
#include <set>
#include <regex>

#include "genui/html/js_scan.h"
#include "genui/post/chain.h"
#include "genui/util/strings.h"

namespace genui::post {

namespace {

using html::Document;
using html::Node;
using Out = std::vector<PendingDiagnostic>;

// Short excerpts around the first difference, for diagnostics.
std::pair<std::string, std::string> excerpt(std::string_view before, std::string_view after) {
  std::size_t p = 0;
  while (p < before.size() && p < after.size() && before[p] == after[p]) ++p;
  std::size_t start = p > 24 ? p - 24 : 0;
  auto cut = [&](std::string_view s) { return std::string(s.substr(start, 96)); };
  return {cut(before), cut(after)};
}

void fixed(Out& out, const Node* node, std::string before, std::string after) {
  out.push_back({Severity::kFixed, node, std::move(before), std::move(after)});
}

void flagged(Out& out, const Node* node, std::string before) {
  out.push_back({Severity::kFlagged, node, std::move(before), std::nullopt});
}

bool set_body(Node& n, const std::string& body, Out& out) {
  std::string old = n.raw_text();
  if (old == body) return false;
  auto [b, a] = excerpt(old, body);
  n.set_raw_text(body);
  fixed(out, &n, std::move(b), std::move(a));
  return true;
}

// 1. Placeholder API keys.
void api_key_injector(Document& doc, const ChainConfig& cfg, Out& out) {
  std::vector<std::string> tokens = cfg.placeholders;
  std::sort(tokens.begin(), tokens.end(),
            [](const auto& a, const auto& b) { return a.size() > b.size(); });
  std::map<std::string, std::optional<std::string>> secrets;
  for (const auto& t : tokens) {
    auto env = cfg.secret_env.find(t);
    std::optional<std::string> secret;
    if (env != cfg.secret_env.end()) secret = cfg.getenv(env->second);
    if (secret && secret->empty()) secret.reset();
    secrets[t] = secret;
  }
  auto substitute = [&](Node& n, std::string text, std::vector<std::string>& replaced) {
    for (const auto& t : tokens) {
      if (text.find(t) == std::string::npos) continue;
      if (const auto& s = secrets[t]) {
        replace_all(text, t, *s);
        replaced.push_back(t);
      } else {
        flagged(out, &n, t + " has no configured secret");
      }
    }
    return text;
  };
  auto describe = [&](const std::vector<std::string>& replaced) {
    std::string after;
    for (const auto& t : replaced) {
      if (!after.empty()) after += ", ";
      after += "$" + cfg.secret_env.at(t);
    }
    return after;
  };
  html::for_each_element(doc.root(), [&](Node& n) {
    for (auto& a : n.attributes) {
      if (!a.has_value) continue;
      std::vector<std::string> replaced;
      std::string v = substitute(n, a.value, replaced);
      if (!replaced.empty()) {
        std::string before;
        for (const auto& t : replaced) before += (before.empty() ? "" : ", ") + t;
        a.set(std::move(v));
        fixed(out, &n, a.name + ": " + before, a.name + ": " + describe(replaced));
      }
    }
    if (n.is_element("script")) {
      std::vector<std::string> replaced;
      std::string body = substitute(n, n.raw_text(), replaced);
      if (!replaced.empty()) {
        std::string before;
        for (const auto& t : replaced) before += (before.empty() ? "" : ", ") + t;
        n.set_raw_text(std::move(body));
        fixed(out, &n, "script: " + before, "script: " + describe(replaced));
      }
    }
  });
}

constexpr std::string_view kReporterScript =
    "(function(){"
    "var m=location.pathname.match(/\\/page\\/([^\\/?#]+)/);"
    "var s=document.currentScript;"
    "var id=m?decodeURIComponent(m[1]):((s&&s.getAttribute('data-page-id'))||'');"
    "function send(msg,src,line){try{"
    "var b=JSON.stringify({page_id:id,message:String(msg||''),source:String(src||''),"
    "line:Number(line)||0});"
    "if(navigator.sendBeacon){navigator.sendBeacon('/client-errors',"
    "new Blob([b],{type:'text/plain'}));}"
    "else{fetch('/client-errors',{method:'POST',body:b,keepalive:true});}"
    "}catch(e){}}"
    "window.addEventListener('error',function(e){send(e.message,e.filename,e.lineno);});"
    "window.addEventListener('unhandledrejection',function(e){var r=e.reason;"
    "send(r&&r.message?r.message:String(r),'unhandledrejection',0);});"
    "})();";

// 2. Client-side error reporting.
void error_reporter_injector(Document& doc, const ChainConfig&, Out& out) {
  for (const Node* s : doc.elements("script")) {
    if (s->has_attr(kReporterMarker)) return;
  }
  Node& head = doc.ensure_head();
  auto script = Node::make_element("script");
  script->set_bool_attr(kReporterMarker);
  script->set_raw_text(std::string(kReporterScript));
  Node* inserted = head.insert_child(0, std::move(script));
  fixed(out, inserted, "", "error reporter installed");
}

std::string strip_fence_lines(const std::string& body) {
  std::vector<html::JsMode> modes = html::js_modes(body);
  std::string out;
  std::size_t i = 0;
  while (i < body.size()) {
    std::size_t nl = body.find('\n', i);
    std::size_t end = nl == std::string::npos ? body.size() : nl + 1;
    std::string_view line(body.data() + i, end - i);
    std::size_t first = i;
    while (first < end && is_ascii_space(body[first])) ++first;
    bool fence = first < end && modes[first] == html::JsMode::kCode &&
                 trim(line).substr(0, 3) == "```";
    if (!fence) out.append(line);
    i = end;
  }
  return out;
}

std::string split_closing_tags(const std::string& body) {
  std::vector<html::JsMode> modes = html::js_modes(body);
  std::string out;
  out.reserve(body.size());
  for (std::size_t i = 0; i < body.size(); ++i) {
    if (body[i] == '<' && html::is_string_mode(modes[i]) && body.compare(i, 2, "</") == 0 &&
        istarts_with(std::string_view(body).substr(i + 2), "script")) {
      std::string_view tag = std::string_view(body).substr(i + 2, 6);  // keeps original case
      if (modes[i] == html::JsMode::kTemplate) {
        out += "<\\/";
        out += tag;
      } else {
        char q = modes[i] == html::JsMode::kSingle ? '\'' : '"';
        out += "</";
        out += tag.substr(0, 3);
        out += q;
        out += " + ";
        out += q;
        out += tag.substr(3);
      }
      i += 7;
      continue;
    }
    out.push_back(body[i]);
  }
  return out;
}

// 3. Markdown fences and closing tags quoted inside scripts.
void script_parse_fixer(Document& doc, const ChainConfig&, Out& out) {
  for (Node* s : doc.elements("script")) {
    std::string body = s->raw_text();
    if (body.empty()) continue;
    set_body(*s, split_closing_tags(strip_fence_lines(body)), out);
  }
}

bool is_tailwind_utility(std::string token) {
  std::size_t colon = token.rfind(':');
  if (colon != std::string::npos) token.erase(0, colon + 1);
  if (!token.empty() && token[0] == '!') token.erase(0, 1);
  if (!token.empty() && token[0] == '-') token.erase(0, 1);
  static const std::set<std::string> kWords = {
      "flex",      "grid",      "hidden",     "block",    "inline",     "inline-block",
      "inline-flex", "container", "relative", "absolute", "fixed",      "sticky",
      "italic",    "underline", "uppercase",  "lowercase", "capitalize", "truncate",
      "shadow",    "rounded",   "border",     "transition", "transform", "antialiased",
      "grow",      "shrink",    "invisible",  "mx-auto",  "flex-wrap",  "flex-col"};
  if (kWords.count(token)) return true;
  static const std::regex kPrefixed(
      "(p[xytblrse]?|m[xytblrse]?|w|h|min-w|min-h|max-w|max-h|size|text|bg|border(-[xytblr])?|"
      "rounded(-[a-z]+)?|gap(-[xy])?|space-[xy]|font|leading|tracking|shadow|opacity|z|top|left|"
      "right|bottom|inset(-[xy])?|col-span|row-span|grid-cols|grid-rows|items|justify|content|"
      "self|place-(items|content|self)|overflow(-[xy])?|duration|ease|delay|scale(-[xy])?|rotate|"
      "translate-[xy]|ring(-offset)?|divide(-[xy])?|from|to|via|object|aspect|order|flex|basis|"
      "columns|line-clamp|decoration|outline|fill|stroke|cursor|select|list|whitespace|break|"
      "animate|blur|backdrop-blur|bg-gradient-to|drop-shadow)-[a-z0-9./\\[\\]#%-]+");
  return std::regex_match(token, kPrefixed);
}

bool uses_tailwind_directives(std::string_view css) {
  return css.find("@apply") != std::string_view::npos ||
         css.find("@tailwind") != std::string_view::npos;
}

bool uses_tailwind(const Document& doc) {
  std::set<std::string> seen;
  bool directives = false;
  html::for_each_element(doc.root(), [&](const Node& n) {
    for (const auto& c : n.classes()) {
      if (seen.size() < 3 && is_tailwind_utility(c)) seen.insert(c);
    }
    if (n.is_element("style") && uses_tailwind_directives(n.raw_text())) directives = true;
  });
  if (directives) return true;
  // Bootstrap shares much of this vocabulary (p-3, text-center, ...).
  bool other_framework = false;
  html::for_each_element(doc.root(), [&](const Node& n) {
    for (const char* a : {"href", "src"}) {
      auto v = n.get_attr(a);
      if (v && ifind(*v, "bootstrap") != std::string::npos) other_framework = true;
    }
  });
  return !other_framework && seen.size() >= 3;
}

bool is_tailwind_loader(const Node& n) {
  if (!n.is_element("script")) return false;
  auto src = n.get_attr("src");
  return src && ifind(*src, "cdn.tailwindcss.com") != std::string::npos;
}

// Loader goes before the first page script in <head> so inline
// `tailwind.config = ...` blocks see it.
std::size_t loader_position(const Node& head) {
  for (std::size_t i = 0; i < head.children.size(); ++i) {
    const Node& c = *head.children[i];
    if (c.is_element("script") && !c.has_attr(kReporterMarker)) return i;
  }
  return head.children.size();
}

// 4. Tailwind loader and directive styles.
void tailwind_directive_fixer(Document& doc, const ChainConfig&, Out& out) {
  Node* loader = nullptr;
  for (Node* s : doc.elements("script")) {
    if (is_tailwind_loader(*s)) {
      loader = s;
      break;
    }
  }
  bool needed = uses_tailwind(doc);
  if (loader && !loader->has_ancestor("head")) {
    Node& head = doc.ensure_head();
    auto node = loader->detach();
    Node* moved = head.insert_child(loader_position(head), std::move(node));
    fixed(out, moved, "tailwind loader outside <head>", "moved into <head>");
  } else if (!loader && needed) {
    Node& head = doc.ensure_head();
    auto script = Node::make_element("script");
    script->set_attr("src", std::string(kTailwindCdn));
    Node* inserted = head.insert_child(loader_position(head), std::move(script));
    fixed(out, inserted, "tailwind classes without loader", "<script src=\"" + std::string(kTailwindCdn) + "\">");
  }
  for (Node* st : doc.elements("style")) {
    if (!uses_tailwind_directives(st->raw_text())) continue;
    auto type = st->get_attr("type");
    if (type && iequals(trim(*type), "text/tailwindcss")) continue;
    std::string before = type ? "type=" + *type : "no type";
    st->set_attr("type", "text/tailwindcss");
    fixed(out, st, before, "type=text/tailwindcss");
  }
}

struct ApplyStmt {
  Node* style;
  std::size_t begin;  // at "@apply"
  std::size_t end;    // at the terminating ';' or '}' (exclusive)
  std::vector<std::string> tokens;
  std::vector<std::string> owners;  // classes of the enclosing selector
};

std::string class_of_token(std::string token) {
  std::size_t colon = token.rfind(':');
  if (colon != std::string::npos) token.erase(0, colon + 1);
  while (!token.empty() && token.front() == '!') token.erase(0, 1);
  while (!token.empty() && token.back() == '!') token.pop_back();
  return token;
}

std::vector<std::string> selector_classes(std::string_view sel) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < sel.size(); ++i) {
    if (sel[i] != '.') continue;
    std::string name;
    std::size_t j = i + 1;
    while (j < sel.size()) {
      char c = sel[j];
      if (c == '\\' && j + 1 < sel.size()) {
        name.push_back(sel[j + 1]);
        j += 2;
      } else if (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_') {
        name.push_back(c);
        ++j;
      } else {
        break;
      }
    }
    if (!name.empty() && !std::isdigit(static_cast<unsigned char>(name[0]))) out.push_back(name);
    i = j - 1;
  }
  return out;
}

std::vector<ApplyStmt> find_apply(Node& style) {
  std::vector<ApplyStmt> out;
  std::string css = style.raw_text();
  std::vector<std::string> selectors;
  std::size_t segment = 0;
  std::size_t i = 0;
  while (i < css.size()) {
    char c = css[i];
    if (c == '/' && i + 1 < css.size() && css[i + 1] == '*') {
      std::size_t end = css.find("*/", i + 2);
      i = end == std::string::npos ? css.size() : end + 2;
      continue;
    }
    if (c == '"' || c == '\'') {
      std::size_t end = css.find(c, i + 1);
      i = end == std::string::npos ? css.size() : end + 1;
      continue;
    }
    if (c == '{') {
      selectors.emplace_back(trim(std::string_view(css).substr(segment, i - segment)));
      segment = ++i;
      continue;
    }
    if (c == '}') {
      if (!selectors.empty()) selectors.pop_back();
      segment = ++i;
      continue;
    }
    if (c == ';') {
      segment = ++i;
      continue;
    }
    if (c == '@' && css.compare(i, 6, "@apply") == 0 &&
        (i + 6 >= css.size() || is_ascii_space(css[i + 6]))) {
      std::size_t end = css.find_first_of(";}", i);
      if (end == std::string::npos) end = css.size();
      ApplyStmt st{&style, i, end, {}, {}};
      std::string_view list = std::string_view(css).substr(i + 6, end - i - 6);
      std::size_t k = 0;
      while (k < list.size()) {
        while (k < list.size() && is_ascii_space(list[k])) ++k;
        std::size_t s = k;
        while (k < list.size() && !is_ascii_space(list[k])) ++k;
        if (k > s) st.tokens.emplace_back(list.substr(s, k - s));
      }
      for (auto it = selectors.rbegin(); it != selectors.rend(); ++it) {
        if (!it->empty() && it->front() == '@') continue;
        st.owners = selector_classes(*it);
        break;
      }
      out.push_back(std::move(st));
      i = end;
      segment = end;
      continue;
    }
    ++i;
  }
  return out;
}

// 5. Cycles among @apply compositions.
void tailwind_cycle_breaker(Document& doc, const ChainConfig&, Out& out) {
  std::vector<ApplyStmt> stmts;
  for (Node* st : doc.elements("style")) {
    for (auto& s : find_apply(*st)) stmts.push_back(std::move(s));
  }
  if (stmts.empty()) return;

  std::vector<std::string> order;
  std::map<std::string, std::vector<std::string>> adj;
  auto add_node = [&](const std::string& n) {
    if (adj.emplace(n, std::vector<std::string>{}).second) order.push_back(n);
  };
  for (const auto& s : stmts) {
    for (const auto& o : s.owners) {
      add_node(o);
      for (const auto& t : s.tokens) {
        std::string cls = class_of_token(t);
        if (cls.empty() || cls == "important") continue;
        add_node(cls);
        adj[o].push_back(cls);
      }
    }
  }

  // Back edges of a DFS in first-appearance order; removing them leaves
  // the graph acyclic.
  std::set<std::pair<std::string, std::string>> cut;
  std::map<std::string, int> color;  // 0 white, 1 on stack, 2 done
  std::function<void(const std::string&)> dfs = [&](const std::string& u) {
    color[u] = 1;
    for (const auto& v : adj[u]) {
      if (cut.count({u, v})) continue;
      if (color[v] == 1) {
        cut.insert({u, v});
      } else if (color[v] == 0) {
        dfs(v);
      }
    }
    color[u] = 2;
  };
  for (const auto& n : order) {
    if (color[n] == 0) dfs(n);
  }
  if (cut.empty()) return;

  std::map<Node*, std::vector<const ApplyStmt*>> edits;
  for (const auto& s : stmts) edits[s.style].push_back(&s);
  for (auto& [style, list] : edits) {
    std::string css = style->raw_text();
    bool touched = false;
    for (auto it = list.rbegin(); it != list.rend(); ++it) {
      const ApplyStmt& s = **it;
      std::vector<std::string> keep;
      for (const auto& t : s.tokens) {
        std::string cls = class_of_token(t);
        bool drop = std::any_of(s.owners.begin(), s.owners.end(),
                                [&](const std::string& o) { return cut.count({o, cls}) > 0; });
        if (!drop) keep.push_back(t);
      }
      if (keep.size() == s.tokens.size()) continue;
      std::string before = css.substr(s.begin, s.end - s.begin);
      std::string after;
      std::size_t end = s.end;
      if (keep.empty()) {
        if (end < css.size() && css[end] == ';') ++end;
      } else {
        after = "@apply";
        for (const auto& t : keep) after += " " + t;
      }
      css.replace(s.begin, end - s.begin, after);
      fixed(out, style, std::string(trim(before)), after);
      touched = true;
    }
    if (touched) style->set_raw_text(css);
  }
}

// 6. Attribute values whose source form needs escaping.
void attribute_escaper(Document& doc, const ChainConfig&, Out& out) {
  html::for_each_element(doc.root(), [&](Node& n) {
    for (auto& a : n.attributes) {
      if (html::attribute_source_is_safe(a)) continue;
      std::string before = a.name + "=" + (a.quote ? std::string(1, a.quote) : "") + *a.raw +
                           (a.quote ? std::string(1, a.quote) : "");
      a.set(a.value);
      fixed(out, &n, before, a.name + "=\"" + html::escape_attribute(a.value) + "\"");
    }
  });
}

// 7. Citation markers leaked into scripts.
void citation_stripper(Document& doc, const ChainConfig& cfg, Out& out) {
  if (cfg.citation_pattern.empty()) return;
  std::regex re(cfg.citation_pattern);
  for (Node* s : doc.elements("script")) {
    std::string body = s->raw_text();
    if (body.empty()) continue;
    std::string cur = body;
    // Repeat to a fixed point so the rule stays idempotent for any pattern.
    for (int round = 0; round < 8; ++round) {
      std::string next = std::regex_replace(cur, re, cfg.citation_replacement);
      if (next == cur) break;
      cur = std::move(next);
    }
    set_body(*s, cur, out);
  }
}

struct UrlParts {
  std::string scheme_host_path;
  std::string query;  // without '?'
};

UrlParts split_url(std::string_view url) {
  std::size_t q = url.find('?');
  if (q == std::string_view::npos) return {std::string(url), ""};
  return {std::string(url.substr(0, q)), std::string(url.substr(q + 1))};
}

bool has_param(std::string_view query, std::string_view name) {
  for (auto [k, v] : split_query(query)) {
    if (k == name) return true;
  }
  return false;
}

std::string param_value(std::string_view query, std::string_view name) {
  for (auto [k, v] : split_query(query)) {
    if (k == name) return std::string(v);
  }
  return {};
}

// 8. Third-party loader URLs.
void api_usage_fixer(Document& doc, const ChainConfig&, Out& out) {
  static constexpr std::string_view kHttpsHosts[] = {
      "cdn.tailwindcss.com", "cdn.jsdelivr.net",    "unpkg.com",          "cdnjs.cloudflare.com",
      "maps.googleapis.com", "fonts.googleapis.com", "code.jquery.com",   "fonts.gstatic.com",
      "cdn.plot.ly",         "d3js.org",             "api.mapbox.com",    "kit.fontawesome.com"};
  std::string scripts_text;
  for (const Node* s : doc.elements("script")) scripts_text += s->raw_text();
  static const std::regex kInitMap(R"(function\s+initMap\b|\binitMap\s*=)");
  bool defines_init_map = std::regex_search(scripts_text, kInitMap);

  html::for_each_element(doc.root(), [&](Node& n) {
    const char* attr_name = n.is_element("script") ? "src" : n.is_element("link") ? "href" : nullptr;
    if (!attr_name) return;
    auto url = n.get_attr(attr_name);
    if (!url) return;
    std::string next = std::string(trim(*url));
    for (auto host : kHttpsHosts) {
      std::string http = "http://" + std::string(host);
      if (istarts_with(next, http) &&
          (next.size() == http.size() || next[http.size()] == '/' || next[http.size()] == '?')) {
        next = "https://" + next.substr(7);
      }
    }
    if (n.is_element("script") && ifind(next, "maps.googleapis.com/maps/api/js") != std::string::npos) {
      UrlParts parts = split_url(next);
      if (!has_param(parts.query, "callback")) {
        std::string cb = defines_init_map ? "initMap" : "Function.prototype";
        parts.query += (parts.query.empty() ? "" : "&") + std::string("callback=") + cb;
        next = parts.scheme_host_path + "?" + parts.query;
      }
      if (!has_param(parts.query, "key") || trim(param_value(parts.query, "key")).empty()) {
        flagged(out, &n, "maps loader without an API key");
      }
      if (!n.has_attr("async") && !n.has_attr("defer")) {
        n.set_bool_attr("defer");
        fixed(out, &n, "maps loader without async/defer", "defer");
      }
    }
    if (next != *url) {
      std::string before = *url;
      n.set_attr(attr_name, next);
      fixed(out, &n, before, next);
    }
  });
}

bool acceptable_img_src(std::string_view src) {
  src = trim(src);
  if (istarts_with(src, "http://") || istarts_with(src, "https://") || istarts_with(src, "data:") ||
      src.substr(0, 2) == "//") {
    return true;
  }
  std::string_view path = src.substr(0, src.find('?'));
  return path == "/image" || path == "/gen";
}

std::string fallback_query(const Node& img) {
  if (auto alt = img.get_attr("alt")) {
    std::string_view t = trim(*alt);
    if (!t.empty()) return std::string(t);
  }
  if (auto src = img.get_attr("src")) {
    std::string_view s = trim(*src);
    s = s.substr(0, s.find_first_of("?#"));
    if (std::size_t slash = s.find_last_of('/'); slash != std::string_view::npos) s.remove_prefix(slash + 1);
    if (std::size_t dot = s.rfind('.'); dot != std::string_view::npos && dot > 0) s = s.substr(0, dot);
    std::string name(s);
    for (char& c : name) {
      if (c == '-' || c == '_') c = ' ';
    }
    if (!trim(name).empty()) return std::string(trim(name));
  }
  return "image";
}

bool is_icon_modifier(std::string_view name) {
  static const std::set<std::string_view> kModifiers = {
      "solid", "regular", "brands", "light", "thin", "duotone", "sharp", "fw", "lg", "sm", "xs",
      "xl", "2xs", "2xl", "1x", "2x", "3x", "4x", "5x", "6x", "7x", "8x", "9x", "10x", "spin",
      "pulse", "spin-pulse", "spin-reverse", "beat", "fade", "beat-fade", "bounce", "flip", "shake",
      "border", "inverse", "ul", "li", "stack", "stack-1x", "stack-2x", "rotate-90", "rotate-180",
      "rotate-270", "flip-horizontal", "flip-vertical", "flip-both", "pull-left", "pull-right"};
  return kModifiers.count(name) > 0;
}

// 9. Hallucinated images and icon names.
void asset_fallback_rewriter(Document& doc, const ChainConfig& cfg, Out& out) {
  static const std::set<std::string_view> kIconMarkers = {"fa", "fas", "far", "fab", "fal", "fad",
                                                          "fa-solid", "fa-regular", "fa-brands"};
  html::for_each_element(doc.root(), [&](Node& n) {
    if (n.is_element("img")) {
      auto src = n.get_attr("src");
      if (!src || !acceptable_img_src(*src)) {
        std::string target = "/image?query=" + url_encode(fallback_query(n));
        n.set_attr("src", target);
        fixed(out, &n, src ? "src=" + *src : "no src", "src=" + target);
      }
    }
    std::vector<std::string> classes = n.classes();
    bool icon = std::any_of(classes.begin(), classes.end(),
                            [](const std::string& c) { return kIconMarkers.count(c) > 0; });
    if (!icon || cfg.known_icons.empty()) return;
    for (const auto& c : classes) {
      if (c.size() <= 3 || c.compare(0, 3, "fa-") != 0) continue;
      std::string name = c.substr(3);
      if (kIconMarkers.count(c) || is_icon_modifier(name) || cfg.known_icons.count(name)) continue;
      flagged(out, &n, "unknown icon class " + c);
    }
  });
}

}  // namespace

const std::vector<Rule>& registry() {
  static const std::vector<Rule> kRules = {
      {"api_key_injector", api_key_injector, false},
      {"error_reporter_injector", error_reporter_injector, false},
      {"script_parse_fixer", script_parse_fixer, false},
      {"tailwind_directive_fixer", tailwind_directive_fixer, false},
      {"tailwind_cycle_breaker", tailwind_cycle_breaker, false},
      {"attribute_escaper", attribute_escaper, false},
      {"citation_stripper", citation_stripper, false},
      {"api_usage_fixer", api_usage_fixer, false},
      {"asset_fallback_rewriter", asset_fallback_rewriter, true},
  };
  return kRules;
}

std::vector<std::pair<std::string, std::string>> apply_edges(Document& doc) {
  std::vector<std::pair<std::string, std::string>> edges;
  for (Node* st : doc.elements("style")) {
    for (const auto& s : find_apply(*st)) {
      for (const auto& o : s.owners) {
        for (const auto& t : s.tokens) {
          std::string cls = class_of_token(t);
          if (!cls.empty() && cls != "important") edges.emplace_back(o, cls);
        }
      }
    }
  }
  return edges;
}

}  // namespace genui::post
