#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace genui {

// Throws std::runtime_error when the file cannot be opened.
std::string read_file(const std::filesystem::path& path);

// Writes to a sibling temp file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view data);

void append_line(const std::filesystem::path& path, std::string_view line);

}  // namespace genui
