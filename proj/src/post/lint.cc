#include <algorithm>
#include <regex>
#include <set>

#include "genui/post/chain.h"
#include "genui/util/strings.h"

namespace genui::post {

Diagnostics lint_sandbox(const html::Document& doc) {
  static const std::regex kForbidden(
      R"(\bwindow\s*\.\s*(parent|top)\b|\b(localStorage|sessionStorage)\b)");
  Diagnostics out;
  html::for_each_element(doc.root(), [&](const html::Node& n) {
    if (n.is_element("script")) {
      std::string body = n.raw_text();
      std::set<std::string> seen;
      for (std::sregex_iterator it(body.begin(), body.end(), kForbidden), end; it != end; ++it) {
        std::string hit = it->str();
        hit.erase(std::remove_if(hit.begin(), hit.end(), [](char c) { return is_ascii_space(c); }),
                  hit.end());
        if (seen.insert(hit).second) {
          out.push_back({"lint_sandbox", Severity::kFlagged, html::locus_of(n),
                         "forbidden access: " + hit, std::nullopt});
        }
      }
    } else if (n.is_element("a")) {
      auto href = n.get_attr("href");
      if (!href) return;
      std::string_view h = trim(*href);
      bool external = istarts_with(h, "http://") || istarts_with(h, "https://") ||
                      h.substr(0, 2) == "//";
      auto target = n.get_attr("target");
      if (external && (!target || trim(*target) != "_blank")) {
        out.push_back({"lint_sandbox", Severity::kFlagged, html::locus_of(n),
                       "external link without target=_blank: " + std::string(h), std::nullopt});
      }
    }
  });
  return out;
}

}  // namespace genui::post
