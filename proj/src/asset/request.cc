#include "genui/asset/request.h"

#include <cmath>
#include <optional>

#include "genui/util/strings.h"

namespace genui::asset {

namespace {

struct AspectInfo {
  Aspect aspect;
  std::string_view name;
  int w;
  int h;
};

constexpr AspectInfo kAspects[] = {
    {Aspect::k1x1, "1:1", 1, 1},   {Aspect::k3x4, "3:4", 3, 4},   {Aspect::k4x3, "4:3", 4, 3},
    {Aspect::k9x16, "9:16", 9, 16}, {Aspect::k16x9, "16:9", 16, 9},
};

const AspectInfo& info(Aspect a) {
  for (const auto& i : kAspects) {
    if (i.aspect == a) return i;
  }
  return kAspects[0];
}

std::optional<std::string_view> raw_param(std::string_view query, std::string_view name) {
  for (auto [k, v] : split_query(query)) {
    if (k == name) return v;
  }
  return std::nullopt;
}

std::string required_text(std::string_view query, std::string_view name) {
  auto raw = raw_param(query, name);
  if (!raw) throw BadRequest("missing parameter: " + std::string(name));
  auto decoded = url_decode(*raw);
  if (!decoded) throw BadRequest("undecodable parameter: " + std::string(name));
  std::string text(trim(*decoded));
  if (text.empty()) throw BadRequest("empty parameter: " + std::string(name));
  return text;
}

}  // namespace

std::string_view to_string(AssetKind k) {
  return k == AssetKind::kSearchImage ? "search_image" : "generated_image";
}

std::string_view to_string(Aspect a) { return info(a).name; }

std::optional<Aspect> parse_aspect(std::string_view s) {
  for (const auto& i : kAspects) {
    if (i.name == s) return i.aspect;
  }
  return std::nullopt;
}

std::pair<int, int> dimensions(Aspect a, int long_edge) {
  const AspectInfo& i = info(a);
  int big = std::max(i.w, i.h);
  auto scale = [&](int part) {
    return static_cast<int>(std::lround(static_cast<double>(long_edge) * part / big));
  };
  return {scale(i.w), scale(i.h)};
}

std::string AssetRequest::key() const {
  std::string k(to_string(kind));
  k += '\n';
  if (kind == AssetKind::kGeneratedImage) {
    k += to_string(aspect);
  }
  k += '\n';
  k += text;
  return k;
}

AssetRequest parse_image_query(std::string_view raw_query) {
  AssetRequest r;
  r.kind = AssetKind::kSearchImage;
  r.text = required_text(raw_query, "query");
  return r;
}

AssetRequest parse_gen_query(std::string_view raw_query) {
  AssetRequest r;
  r.kind = AssetKind::kGeneratedImage;
  r.text = required_text(raw_query, "prompt");
  if (auto raw = raw_param(raw_query, "aspect")) {
    auto decoded = url_decode(*raw);
    if (!decoded) throw BadRequest("undecodable parameter: aspect");
    auto a = parse_aspect(*decoded);
    if (!a) throw BadRequest("unsupported aspect: " + *decoded);
    r.aspect = *a;
  }
  return r;
}

}  // namespace genui::asset
