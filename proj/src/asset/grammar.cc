#include "genui/asset/grammar.h"

#include "genui/asset/request.h"

namespace genui::asset {

post::Diagnostics validate_src_grammar(const html::Document& doc) {
  post::Diagnostics out;
  html::for_each_element(doc.root(), [&](const html::Node& n) {
    if (!n.is_element("img")) return;
    auto src = n.get_attr("src");
    if (!src) return;
    std::string_view s = *src;
    std::size_t q = s.find('?');
    std::string_view path = s.substr(0, q);
    std::string_view query = q == std::string_view::npos ? std::string_view{} : s.substr(q + 1);
    if (path != "/image" && path != "/gen") return;
    try {
      if (path == "/image") {
        parse_image_query(query);
      } else {
        parse_gen_query(query);
      }
    } catch (const BadRequest& e) {
      out.push_back({"src_grammar", post::Severity::kFlagged, html::locus_of(n),
                     std::string(s) + " (" + e.what() + ")", std::nullopt});
    }
  });
  return out;
}

}  // namespace genui::asset
