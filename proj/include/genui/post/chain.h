#pragma once

// Ordered repair rules applied to every extracted page before it is served.

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "genui/extract/extractor.h"
#include "genui/html/dom.h"
#include "genui/post/diagnostic.h"

namespace genui::post {

struct PostReport {
  Diagnostics diagnostics;
  std::vector<std::string> rules_run;
  std::vector<std::string> rules_skipped;
  bool changed = false;
};

nlohmann::json to_json(const PostReport& r);
PostReport report_from_json(const nlohmann::json& j);

inline constexpr std::string_view kReporterMarker = "data-genui-error-reporter";
inline constexpr std::string_view kTailwindCdn = "https://cdn.tailwindcss.com";

struct ChainConfig {
  std::map<std::string, bool> enabled;  // absent rules are enabled
  std::vector<std::string> placeholders{"YOUR_API_KEY", "GOOGLE_MAPS_API_KEY", "API_KEY_HERE"};
  // Placeholder -> name of the environment variable holding the secret.
  std::map<std::string, std::string> secret_env;
  std::set<std::string> known_icons;  // icon names without the "fa-" prefix
  std::string citation_pattern;
  std::string citation_replacement = "$1";
  // Environment lookup; tests substitute a map.
  std::function<std::optional<std::string>(const std::string&)> getenv;

  ChainConfig();
  bool rule_enabled(std::string_view rule) const;

  // Built-in defaults plus the icon list shipped in the resource dir.
  static ChainConfig defaults();
  // Applies a JSON object on top of `base`. Throws std::invalid_argument
  // for unknown rules or secret references that are not env var names.
  static ChainConfig from_json(const nlohmann::json& j, ChainConfig base = defaults());
};

std::string default_citation_pattern();

// Rule-local diagnostic; the node is resolved to a locus after the chain.
struct PendingDiagnostic {
  Severity severity;
  const html::Node* node;
  std::string before;
  std::optional<std::string> after;
};

using RuleFn = void (*)(html::Document&, const ChainConfig&, std::vector<PendingDiagnostic>&);

struct Rule {
  std::string_view name;
  RuleFn apply;
  bool rewrites_visible_text;
};

// The nine rules in application order.
const std::vector<Rule>& registry();
const Rule* find_rule(std::string_view name);

// Applies one rule and resolves its diagnostics against `doc`.
Diagnostics apply_rule(const Rule& rule, html::Document& doc, const ChainConfig& cfg);

struct ChainResult {
  html::Document doc;
  std::string html;
  PostReport report;
};

// Throws std::invalid_argument when the page status is error and
// html::ParseError when the page cannot be parsed.
ChainResult run_chain(const extract::ExtractedPage& page, const ChainConfig& cfg);
ChainResult run_chain_html(std::string_view html, const ChainConfig& cfg);

// Class composition edges (selector class -> applied class) from every
// @apply in the document's style elements.
std::vector<std::pair<std::string, std::string>> apply_edges(html::Document& doc);

// Flags sandbox rule violations: window.parent/top, web storage, and
// external links that do not open in a new tab.
Diagnostics lint_sandbox(const html::Document& doc);

}  // namespace genui::post
