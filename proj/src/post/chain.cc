#include "genui/post/chain.h"

#include <cctype>
#include <cstdlib>
#include <filesystem>
#include <regex>
#include <sstream>
#include <stdexcept>

#include "genui/asset/grammar.h"
#include "genui/util/files.h"
#include "genui/util/resources.h"
#include "genui/util/strings.h"

namespace genui::post {

using Json = nlohmann::json;

std::string_view to_string(Severity s) { return s == Severity::kFixed ? "fixed" : "flagged"; }

Json to_json(const Diagnostic& d) {
  Json j{{"rule", d.rule}, {"severity", to_string(d.severity)}, {"locus", d.locus},
         {"before", d.before}};
  if (d.after) j["after"] = *d.after;
  return j;
}

Diagnostic diagnostic_from_json(const Json& j) {
  Diagnostic d;
  d.rule = j.at("rule").get<std::string>();
  d.severity = j.at("severity").get<std::string>() == "fixed" ? Severity::kFixed : Severity::kFlagged;
  d.locus = j.at("locus").get<std::string>();
  d.before = j.at("before").get<std::string>();
  if (j.contains("after")) d.after = j.at("after").get<std::string>();
  return d;
}

Json to_json(const PostReport& r) {
  Json diags = Json::array();
  for (const auto& d : r.diagnostics) diags.push_back(to_json(d));
  return Json{{"rules_run", r.rules_run},
              {"rules_skipped", r.rules_skipped},
              {"changed", r.changed},
              {"diagnostics", std::move(diags)}};
}

PostReport report_from_json(const Json& j) {
  PostReport r;
  r.rules_run = j.at("rules_run").get<std::vector<std::string>>();
  r.rules_skipped = j.value("rules_skipped", std::vector<std::string>{});
  r.changed = j.at("changed").get<bool>();
  for (const auto& d : j.at("diagnostics")) r.diagnostics.push_back(diagnostic_from_json(d));
  return r;
}

std::string default_citation_pattern() {
  // Group 1 keeps the statement end or closing quote; the lookahead keeps
  // array indexing like a[1] or f()[0] untouched.
  return R"(([;"'`])[ \t]*\[\d+(?:[ \t]*,[ \t]*\d+)*\](?=[ \t]*(?:[;,)}\r\n]|$))|\[cite(?:_start|_end|:[^\]\n]*)?\])";
}

ChainConfig::ChainConfig()
    : citation_pattern(default_citation_pattern()),
      getenv([](const std::string& name) -> std::optional<std::string> {
        const char* v = std::getenv(name.c_str());
        if (!v) return std::nullopt;
        return std::string(v);
      }) {}

bool ChainConfig::rule_enabled(std::string_view rule) const {
  auto it = enabled.find(std::string(rule));
  return it == enabled.end() || it->second;
}

namespace {

std::set<std::string> load_icon_list(const std::filesystem::path& path) {
  std::set<std::string> out;
  std::istringstream in(read_file(path));
  std::string line;
  while (std::getline(in, line)) {
    std::string_view t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    out.emplace(t);
  }
  return out;
}

bool is_env_name(std::string_view s) {
  if (s.empty() || std::isdigit(static_cast<unsigned char>(s[0]))) return false;
  for (char c : s) {
    if (!(std::isupper(static_cast<unsigned char>(c)) || std::isdigit(static_cast<unsigned char>(c)) ||
          c == '_')) {
      return false;
    }
  }
  return true;
}

}  // namespace

ChainConfig ChainConfig::defaults() {
  ChainConfig c;
  auto icons = resource_dir() / "icons" / "fontawesome.txt";
  if (std::filesystem::exists(icons)) c.known_icons = load_icon_list(icons);
  return c;
}

ChainConfig ChainConfig::from_json(const Json& j, ChainConfig base) {
  if (!j.is_object()) throw std::invalid_argument("chain config must be an object");
  if (j.contains("rules")) {
    for (const auto& [name, flag] : j.at("rules").items()) {
      if (!find_rule(name)) throw std::invalid_argument("unknown rule: " + name);
      base.enabled[name] = flag.get<bool>();
    }
  }
  if (j.contains("placeholders")) {
    base.placeholders = j.at("placeholders").get<std::vector<std::string>>();
  }
  if (j.contains("secrets")) {
    for (const auto& [placeholder, env] : j.at("secrets").items()) {
      std::string name = env.get<std::string>();
      if (!is_env_name(name)) {
        throw std::invalid_argument("secret for " + placeholder +
                                    " must name an environment variable, got an inline value");
      }
      base.secret_env[placeholder] = name;
    }
  }
  if (j.contains("known_icons")) {
    base.known_icons.clear();
    for (const auto& icon : j.at("known_icons")) base.known_icons.insert(icon.get<std::string>());
  }
  if (j.contains("known_icons_file")) {
    base.known_icons = load_icon_list(j.at("known_icons_file").get<std::string>());
  }
  if (j.contains("citation_pattern")) {
    base.citation_pattern = j.at("citation_pattern").get<std::string>();
    std::regex check(base.citation_pattern);  // throws std::regex_error when invalid
  }
  if (j.contains("citation_replacement")) {
    base.citation_replacement = j.at("citation_replacement").get<std::string>();
  }
  return base;
}

const Rule* find_rule(std::string_view name) {
  for (const auto& r : registry()) {
    if (r.name == name) return &r;
  }
  return nullptr;
}

namespace {

Diagnostics resolve(std::string_view rule, const std::vector<PendingDiagnostic>& pending) {
  Diagnostics out;
  for (const auto& p : pending) {
    out.push_back({std::string(rule), p.severity, p.node ? html::locus_of(*p.node) : "/",
                   p.before, p.after});
  }
  return out;
}

}  // namespace

Diagnostics apply_rule(const Rule& rule, html::Document& doc, const ChainConfig& cfg) {
  std::vector<PendingDiagnostic> pending;
  rule.apply(doc, cfg, pending);
  return resolve(rule.name, pending);
}

ChainResult run_chain_html(std::string_view source, const ChainConfig& cfg) {
  ChainResult result{html::parse(source), {}, {}};
  PostReport& report = result.report;
  // Loci are resolved only after every rule ran; later rules may insert
  // siblings that shift element indices.
  std::vector<std::pair<std::string_view, std::vector<PendingDiagnostic>>> pending;
  for (const Rule& rule : registry()) {
    if (!cfg.rule_enabled(rule.name)) {
      report.rules_skipped.emplace_back(rule.name);
      continue;
    }
    report.rules_run.emplace_back(rule.name);
    pending.emplace_back(rule.name, std::vector<PendingDiagnostic>{});
    rule.apply(result.doc, cfg, pending.back().second);
  }
  for (const auto& [name, diags] : pending) {
    for (auto& d : resolve(name, diags)) report.diagnostics.push_back(std::move(d));
  }
  for (auto& d : lint_sandbox(result.doc)) report.diagnostics.push_back(std::move(d));
  for (auto& d : asset::validate_src_grammar(result.doc)) report.diagnostics.push_back(std::move(d));
  for (const auto& d : report.diagnostics) {
    if (d.severity == Severity::kFixed) report.changed = true;
  }
  result.html = html::serialize(result.doc);
  return result;
}

ChainResult run_chain(const extract::ExtractedPage& page, const ChainConfig& cfg) {
  if (page.status == extract::Status::kError) {
    throw std::invalid_argument("cannot post-process a page whose extraction failed");
  }
  return run_chain_html(page.html, cfg);
}

}  // namespace genui::post
