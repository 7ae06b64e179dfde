#include <map>
#include <queue>
#include <set>

#include <gtest/gtest.h>

#include "genui/asset/grammar.h"
#include "genui/post/chain.h"
#include "support.h"

namespace genui::post {
namespace {

using genui::testing::data_dir;
using genui::testing::files_in;
using genui::testing::fixture_chain_config;
using genui::testing::matches_golden;

std::string page(const std::string& name) {
  return read_file(data_dir() / "pages" / (name + ".html"));
}

std::string apply_only(const std::string& rule, const std::string& html, Diagnostics* diags = nullptr) {
  html::Document doc = html::parse(html);
  Diagnostics d = apply_rule(*find_rule(rule), doc, fixture_chain_config());
  if (diags) *diags = d;
  return html::serialize(doc);
}

std::size_t count(const std::string& hay, const std::string& needle) {
  std::size_t n = 0;
  for (std::size_t p = hay.find(needle); p != std::string::npos; p = hay.find(needle, p + 1)) ++n;
  return n;
}

// Independent acyclicity oracle: Kahn's algorithm.
bool acyclic(const std::vector<std::pair<std::string, std::string>>& edges) {
  std::map<std::string, int> indeg;
  std::map<std::string, std::vector<std::string>> adj;
  for (const auto& [a, b] : edges) {
    adj[a].push_back(b);
    indeg[a];
    ++indeg[b];
  }
  std::queue<std::string> q;
  for (const auto& [n, d] : indeg) {
    if (d == 0) q.push(n);
  }
  std::size_t seen = 0;
  while (!q.empty()) {
    std::string n = q.front();
    q.pop();
    ++seen;
    for (const auto& m : adj[n]) {
      if (--indeg[m] == 0) q.push(m);
    }
  }
  return seen == indeg.size();
}

TEST(Registry, NineRulesInOrder) {
  std::vector<std::string> names;
  for (const auto& r : registry()) names.emplace_back(r.name);
  EXPECT_EQ(names, (std::vector<std::string>{
                       "api_key_injector", "error_reporter_injector", "script_parse_fixer",
                       "tailwind_directive_fixer", "tailwind_cycle_breaker", "attribute_escaper",
                       "citation_stripper", "api_usage_fixer", "asset_fallback_rewriter"}));
}

TEST(ApiKeyInjector, ReplacesConfiguredAndFlagsOthers) {
  Diagnostics d;
  std::string out = apply_only("api_key_injector", page("api_key_injector"), &d);
  EXPECT_NE(out.find("key=K123&amp;callback=initMap"), std::string::npos);
  EXPECT_EQ(out.find("YOUR_API_KEY"), std::string::npos);
  EXPECT_NE(out.find("API_KEY_HERE"), std::string::npos);
  int fixed = 0, flagged = 0;
  for (const auto& x : d) {
    (x.severity == Severity::kFixed ? fixed : flagged)++;
    EXPECT_EQ(x.before.find("K123"), std::string::npos);
    if (x.after) EXPECT_EQ(x.after->find("K123"), std::string::npos) << "secret leaked into report";
  }
  EXPECT_EQ(fixed, 1);
  EXPECT_EQ(flagged, 2);
}

TEST(ErrorReporter, InsertedOnceIntoCreatedHead) {
  ChainResult r = run_chain_html(page("error_reporter_injector"), fixture_chain_config());
  EXPECT_EQ(count(r.html, std::string(kReporterMarker)), 1u);
  EXPECT_NE(r.html.find("<html>\n<head><script data-genui-error-reporter>"), std::string::npos);
  ChainResult again = run_chain_html(r.html, fixture_chain_config());
  EXPECT_EQ(count(again.html, std::string(kReporterMarker)), 1u);
  EXPECT_NE(r.html.find("/client-errors"), std::string::npos);
}

TEST(ScriptParseFixer, RemovesFencesAndSplitsClosingTags) {
  std::string out = apply_only("script_parse_fixer", page("script_parse_fixer"));
  EXPECT_EQ(out.find("```"), std::string::npos);
  EXPECT_NE(out.find("</scr\" + \"ipt>"), std::string::npos);
  EXPECT_NE(out.find("</scr' + 'ipt>"), std::string::npos);
  // The repaired document now has its two scripts where a browser sees them.
  html::Document doc = html::parse(out);
  EXPECT_EQ(doc.elements("script").size(), 2u);
  EXPECT_EQ(doc.elements("p").size(), 1u);
}

TEST(TailwindDirectiveFixer, InsertsLoaderBeforeConfigAndTypesStyles) {
  std::string out = apply_only("tailwind_directive_fixer", page("tailwind_directive_fixer"));
  std::size_t loader = out.find("<script src=\"https://cdn.tailwindcss.com\"></script>");
  std::size_t config = out.find("tailwind.config");
  ASSERT_NE(loader, std::string::npos);
  EXPECT_LT(loader, config);
  EXPECT_NE(out.find("<style type=\"text/tailwindcss\">"), std::string::npos);
}

TEST(TailwindDirectiveFixer, LeavesPlainPagesAlone) {
  std::string src = "<!DOCTYPE html><html><head></head><body><p class=\"intro\">Hi</p></body></html>";
  EXPECT_EQ(apply_only("tailwind_directive_fixer", src), src);
}

TEST(TailwindDirectiveFixer, MovesBodyLoaderIntoHead) {
  std::string src =
      "<html><head><title>t</title></head><body><p class=\"p-4 text-lg font-bold\">x</p>"
      "<script src=\"https://cdn.tailwindcss.com\"></script></body></html>";
  std::string out = apply_only("tailwind_directive_fixer", src);
  html::Document d = html::parse(out);
  auto scripts = d.elements("script");
  ASSERT_EQ(scripts.size(), 1u);
  EXPECT_TRUE(scripts[0]->has_ancestor("head"));
}

TEST(TailwindCycleBreaker, OutputGraphIsAcyclic) {
  html::Document before = html::parse(page("tailwind_cycle_breaker"));
  EXPECT_FALSE(acyclic(apply_edges(before)));
  Diagnostics d;
  std::string out = apply_only("tailwind_cycle_breaker", page("tailwind_cycle_breaker"), &d);
  html::Document after = html::parse(out);
  EXPECT_TRUE(acyclic(apply_edges(after)));
  // Two cycles: btn -> btn-base -> btn-primary -> btn, and chip -> chip.
  EXPECT_EQ(d.size(), 2u);
  EXPECT_NE(out.find(".btn-primary { @apply bg-blue-600 text-white; }"), std::string::npos);
  EXPECT_NE(out.find(".chip { @apply text-sm; }"), std::string::npos);
  EXPECT_NE(out.find(".pill { @apply rounded-full; }"), std::string::npos);
}

TEST(AttributeEscaper, EscapesUnsafeValuesOnly) {
  std::string out = apply_only("attribute_escaper", page("attribute_escaper"));
  EXPECT_NE(out.find("href=\"https://www.google.com/search?q=fractals&amp;hl=en\""), std::string::npos);
  EXPECT_NE(out.find("title=\"Depth &gt; 3 is &quot;slow&quot;\""), std::string::npos);
  EXPECT_NE(out.find("data-note=\"a&lt;b\""), std::string::npos);
  EXPECT_NE(out.find("alt=\"Koch snowflake &amp; friends\""), std::string::npos);
}

TEST(CitationStripper, StripsScriptsOnly) {
  std::string out = apply_only("citation_stripper", page("citation_stripper"));
  EXPECT_NE(out.find("<h1>Planets [1]</h1>"), std::string::npos);
  EXPECT_NE(out.find("\"Mars\"];\n"), std::string::npos);
  EXPECT_NE(out.find("\"Mars has two moons\";"), std::string::npos);
  EXPECT_NE(out.find("planets[0]"), std::string::npos);
  EXPECT_NE(out.find("periods[i]"), std::string::npos);
  EXPECT_EQ(out.find("[cite"), std::string::npos);
}

TEST(CitationStripper, CustomPattern) {
  ChainConfig cfg = ChainConfig::from_json(
      {{"citation_pattern", "\\{\\{ref\\d+\\}\\}"}, {"citation_replacement", ""}},
      fixture_chain_config());
  html::Document doc = html::parse("<script>a(); {{ref1}}</script><p>{{ref2}}</p>");
  apply_rule(*find_rule("citation_stripper"), doc, cfg);
  EXPECT_EQ(html::serialize(doc), "<script>a(); </script><p>{{ref2}}</p>");
}

TEST(ApiUsageFixer, NormalizesMapsLoaderAndCdns) {
  Diagnostics d;
  std::string out = apply_only("api_usage_fixer", page("api_usage_fixer"), &d);
  EXPECT_NE(out.find("src=\"https://maps.googleapis.com/maps/api/js?key=AIzaDemo&amp;callback=initMap\""),
            std::string::npos);
  EXPECT_NE(out.find("https://cdn.jsdelivr.net/npm/chart.js"), std::string::npos);
  EXPECT_NE(out.find("https://fonts.googleapis.com/css2"), std::string::npos);
  EXPECT_NE(out.find(" defer"), std::string::npos);
}

TEST(ApiUsageFixer, FlagsMissingKey) {
  Diagnostics d;
  apply_only("api_usage_fixer",
             "<script async src=\"https://maps.googleapis.com/maps/api/js?callback=go\"></script>", &d);
  ASSERT_EQ(d.size(), 1u);
  EXPECT_EQ(d[0].severity, Severity::kFlagged);
}

TEST(AssetFallbackRewriter, RewritesHallucinatedSources) {
  Diagnostics d;
  std::string out = apply_only("asset_fallback_rewriter", page("asset_fallback_rewriter"), &d);
  EXPECT_NE(out.find("src=\"/image?query=Street%20cat%20sleeping%20on%20a%20carpet\""), std::string::npos);
  EXPECT_NE(out.find("src=\"/image?query=hero%20banner\""), std::string::npos);
  EXPECT_NE(out.find("<img alt=\"\" src=\"/image?query=image\">"), std::string::npos);
  EXPECT_NE(out.find("https://upload.wikimedia.org/"), std::string::npos);
  int flagged = 0;
  for (const auto& x : d) {
    if (x.severity == Severity::kFlagged) {
      ++flagged;
      EXPECT_NE(x.before.find("fa-cat-sparkles"), std::string::npos);
    }
  }
  EXPECT_EQ(flagged, 1);
}

TEST(LintSandbox, FlagsForbiddenAccessAndExternalLinks) {
  html::Document doc = html::parse(
      "<script>window.parent.postMessage('x'); localStorage.setItem('a', 1);</script>"
      "<a href=\"https://x.example\">x</a><a href=\"#pics\">p</a>"
      "<a href=\"https://y.example\" target=\"_blank\">y</a>");
  Diagnostics d = lint_sandbox(doc);
  ASSERT_EQ(d.size(), 3u);
  for (const auto& x : d) EXPECT_EQ(x.severity, Severity::kFlagged);
  EXPECT_NE(d[0].before.find("window.parent"), std::string::npos);
  EXPECT_NE(d[1].before.find("localStorage"), std::string::npos);
  EXPECT_NE(d[2].before.find("x.example"), std::string::npos);
}

TEST(SrcGrammar, FlagsMalformedAssetUrls) {
  html::Document doc = html::parse(
      "<img src=\"/gen?prompt=cat&aspect=3:4\"><img src=\"/gen?aspect=3:4\">"
      "<img src=\"/image?query=\"><img src=\"/gen?prompt=x&aspect=2:1\"><img src=\"/image?query=%ZZ\">");
  auto d = asset::validate_src_grammar(doc);
  ASSERT_EQ(d.size(), 4u);
  EXPECT_EQ(d[0].locus, "/img[1]");
}

TEST(ChainConfigJson, RejectsInlineSecretsAndUnknownRules) {
  EXPECT_THROW(ChainConfig::from_json({{"secrets", {{"YOUR_API_KEY", "AIza-inline"}}}}),
               std::invalid_argument);
  EXPECT_THROW(ChainConfig::from_json({{"rules", {{"nope", true}}}}), std::invalid_argument);
  ChainConfig c = ChainConfig::from_json({{"rules", {{"citation_stripper", false}}}});
  ChainResult r = run_chain_html(page("citation_stripper"), c);
  EXPECT_EQ(r.report.rules_skipped, std::vector<std::string>{"citation_stripper"});
  EXPECT_EQ(r.report.rules_run.size(), 8u);
}

TEST(RunChain, RejectsErrorPages) {
  extract::ExtractedPage p;
  p.status = extract::Status::kError;
  EXPECT_THROW(run_chain(p, fixture_chain_config()), std::invalid_argument);
}

TEST(RunChain, MapsKeyPlaceholderFromEnv) {
  ChainResult r = run_chain_html(page("api_key_injector"), fixture_chain_config());
  EXPECT_NE(r.html.find("K123"), std::string::npos);
  bool found = false;
  for (const auto& d : r.report.diagnostics) found |= d.rule == "api_key_injector";
  EXPECT_TRUE(found);
}

class FixturePages : public ::testing::TestWithParam<std::filesystem::path> {};

TEST_P(FixturePages, ChainIsIdempotent) {
  ChainResult first = run_chain_html(read_file(GetParam()), fixture_chain_config());
  ChainResult second = run_chain_html(first.html, fixture_chain_config());
  EXPECT_FALSE(second.report.changed);
  EXPECT_EQ(second.html, first.html);
  EXPECT_EQ(html::serialize(html::parse(first.html)), first.html);
}

TEST_P(FixturePages, ReportInvariants) {
  ChainResult r = run_chain_html(read_file(GetParam()), fixture_chain_config());
  bool any_fixed = false;
  for (const auto& d : r.report.diagnostics) {
    if (d.severity != Severity::kFixed) continue;
    any_fixed = true;
    EXPECT_TRUE(d.after.has_value());
    EXPECT_NE(html::resolve_locus(r.doc, d.locus), nullptr) << d.rule << " " << d.locus;
  }
  EXPECT_EQ(any_fixed, r.report.changed);
}

TEST_P(FixturePages, NonRewritingRulesKeepVisibleText) {
  std::string src = read_file(GetParam());
  for (const auto& rule : registry()) {
    if (rule.rewrites_visible_text) continue;
    html::Document doc = html::parse(src);
    std::string before = html::visible_text(doc);
    apply_rule(rule, doc, fixture_chain_config());
    EXPECT_EQ(html::visible_text(doc), before) << rule.name;
  }
}

TEST_P(FixturePages, MatchesGoldens) {
  std::string src = read_file(GetParam());
  std::string stem = GetParam().stem().string();
  ChainResult r = run_chain_html(src, fixture_chain_config());
  EXPECT_TRUE(matches_golden(data_dir() / "goldens" / (stem + ".chain.html"), r.html));
  if (const Rule* rule = find_rule(stem)) {
    EXPECT_TRUE(matches_golden(data_dir() / "goldens" / (stem + ".rule.html"), apply_only(stem, src)));
  }
}

INSTANTIATE_TEST_SUITE_P(Pages, FixturePages,
                         ::testing::ValuesIn(files_in(data_dir() / "pages", ".html")),
                         [](const auto& info) { return info.param.stem().string(); });

}  // namespace
}  // namespace genui::post
