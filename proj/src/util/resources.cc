#include "genui/util/resources.h"

#include <cstdlib>

namespace genui {

std::filesystem::path resource_dir() {
  if (const char* env = std::getenv("GENUI_RESOURCES"); env && *env) return env;
  return GENUI_RESOURCE_DIR;
}

}  // namespace genui
