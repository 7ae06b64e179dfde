#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace genui::asset {

struct Rgb {
  std::uint8_t r, g, b;
};

// 8-bit RGB PNG. `description` becomes a tEXt chunk when non-empty.
std::string encode_png(int width, int height, const std::string& rgb_pixels,
                       std::string_view description = {});
std::string solid_png(int width, int height, Rgb color, std::string_view description = {});

struct ImageInfo {
  std::string media_type;
  int width = 0;
  int height = 0;
};

// Recognizes PNG, GIF and JPEG headers; nullopt for anything else.
std::optional<ImageInfo> sniff_image(std::string_view bytes);

}  // namespace genui::asset
