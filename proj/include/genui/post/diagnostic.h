#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace genui::post {

enum class Severity { kFixed, kFlagged };

std::string_view to_string(Severity s);

struct Diagnostic {
  std::string rule;
  Severity severity = Severity::kFlagged;
  std::string locus;  // element path, see html::locus_of
  std::string before;
  std::optional<std::string> after;  // always set when fixed
};

using Diagnostics = std::vector<Diagnostic>;

nlohmann::json to_json(const Diagnostic& d);
Diagnostic diagnostic_from_json(const nlohmann::json& j);

}  // namespace genui::post
