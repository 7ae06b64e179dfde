#pragma once

#include "genui/html/dom.h"
#include "genui/post/diagnostic.h"

namespace genui::asset {

// Flags <img> sources pointing at /image or /gen whose parameters are
// missing, empty, undecodable or (for aspect) unsupported.
post::Diagnostics validate_src_grammar(const html::Document& doc);

}  // namespace genui::asset
