#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

namespace genui::asset {

enum class AssetKind { kSearchImage, kGeneratedImage };
enum class Aspect { k1x1, k3x4, k4x3, k9x16, k16x9 };

std::string_view to_string(AssetKind k);
std::string_view to_string(Aspect a);
// Accepts exactly "1:1", "3:4", "4:3", "9:16" and "16:9".
std::optional<Aspect> parse_aspect(std::string_view s);

// Pixel size for an aspect with the given long edge, rounded to nearest.
std::pair<int, int> dimensions(Aspect a, int long_edge);

class BadRequest : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct AssetRequest {
  AssetKind kind = AssetKind::kSearchImage;
  std::string text;
  Aspect aspect = Aspect::k1x1;

  // Stable identity of the request, independent of provider.
  std::string key() const;
  bool operator==(const AssetRequest&) const = default;
};

// Both take the raw (still percent-encoded) query string after '?'.
AssetRequest parse_image_query(std::string_view raw_query);
AssetRequest parse_gen_query(std::string_view raw_query);

}  // namespace genui::asset
