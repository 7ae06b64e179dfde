#pragma once

#include <filesystem>

namespace genui {

// Directory holding prompt sections, fixtures and icon lists. GENUI_RESOURCES
// overrides the location baked in at build time.
std::filesystem::path resource_dir();

}  // namespace genui
