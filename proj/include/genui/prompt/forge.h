#pragma once

// Layered system-instruction assembly.
//
// A prompt is built from up to five named sections (philosophy, examples,
// planning, technical, dynamic) selected by a profile, with the Style block
// supplied by a registered style variant. Section and style texts are plain
// files under a resource directory; file stems are the registry keys:
//
//   <dir>/sections/<section>.txt
//   <dir>/styles/<style>.txt
//
// The technical section carries a `{{style}}` slot. The dynamic section
// carries `{{now}}` and `{{location_line}}` slots.

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace genui::prompt {

enum class SectionId { kPhilosophy, kExamples, kPlanning, kTechnical, kDynamic };

std::string_view to_string(SectionId id);
std::optional<SectionId> section_from_string(std::string_view name);

struct PromptSection {
  SectionId id;
  std::string body;
};

struct StyleVariant {
  std::string name;
  std::string style_text;
};

struct PromptProfile {
  std::string name;
  std::vector<SectionId> included_sections;
};

// full, minimal, no_philosophy.
const std::vector<PromptProfile>& builtin_profiles();

struct DynamicContext {
  std::chrono::sys_seconds now{};
  std::chrono::minutes utc_offset{0};
  std::optional<std::string> user_location;
};

// RFC 3339 with a numeric offset, or `Z` for UTC.
std::string format_rfc3339(std::chrono::sys_seconds t, std::chrono::minutes offset);

enum class Role { kUser, kModel };
std::string_view to_string(Role r);

struct Message {
  Role role;
  std::string content;
  bool operator==(const Message&) const = default;
};

struct PromptBundle {
  std::string system_text;
  std::vector<Message> history;
  std::string style;
  std::string profile;
  // Byte range of the Style block inside system_text.
  std::size_t style_begin = 0;
  std::size_t style_end = 0;
};

class PromptError : public std::runtime_error {
 public:
  enum class Code {
    kUnknownProfile,
    kUnknownStyle,
    kDuplicateStyle,
    kInvalidStyle,
    kInvalidHistory,
    kMissingSection,
  };
  PromptError(Code code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  Code code() const { return code_; }

 private:
  Code code_;
};

class PromptRegistry {
 public:
  static constexpr std::size_t kDefaultHistoryCap = 20;

  PromptRegistry(std::vector<PromptSection> sections,
                 std::vector<StyleVariant> styles);
  PromptRegistry(PromptRegistry&& other) noexcept;

  // Loads sections/ and styles/ from `dir`. Throws PromptError or
  // std::runtime_error on missing or empty files.
  static PromptRegistry load(const std::filesystem::path& dir);

  void register_style(StyleVariant v, bool overwrite = false);

  // Pure function of its arguments. `history` must alternate roles starting
  // with the user; only the most recent history_cap() messages are kept.
  PromptBundle assemble(std::string_view profile, std::string_view style,
                        const DynamicContext& ctx,
                        std::vector<Message> history) const;

  bool has_style(std::string_view name) const;
  bool has_profile(std::string_view name) const;
  std::vector<std::string> style_names() const;

  std::size_t history_cap() const { return history_cap_; }
  void set_history_cap(std::size_t cap) { history_cap_ = cap; }

  std::string version;

 private:
  mutable std::shared_mutex mu_;
  std::map<SectionId, std::string> sections_;
  std::map<std::string, std::string, std::less<>> styles_;
  std::size_t history_cap_ = kDefaultHistoryCap;
};

}  // namespace genui::prompt
