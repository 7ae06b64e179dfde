#include "genui/prompt/forge.h"

#include <algorithm>
#include <ctime>
#include <mutex>

#include "genui/util/files.h"
#include "genui/util/strings.h"

namespace genui::prompt {

namespace {

constexpr std::string_view kStyleSlot = "{{style}}";
constexpr std::string_view kNowSlot = "{{now}}";
constexpr std::string_view kLocationSlot = "{{location_line}}";
constexpr std::string_view kSectionSeparator = "\n\n";

constexpr SectionId kAllSections[] = {SectionId::kPhilosophy, SectionId::kExamples,
                                      SectionId::kPlanning, SectionId::kTechnical,
                                      SectionId::kDynamic};

std::string strip_trailing_newlines(std::string s) {
  while (!s.empty() && (s.back() == '\n' || s.back() == '\r')) s.pop_back();
  return s;
}

std::string render_dynamic(std::string body, const DynamicContext& ctx) {
  replace_all(body, kNowSlot, format_rfc3339(ctx.now, ctx.utc_offset));
  // The slot occupies its own line; drop the whole line when no location is
  // known.
  std::string slot_line = std::string(kLocationSlot) + "\n";
  std::string replacement = "\n";
  if (ctx.user_location && !is_blank(*ctx.user_location)) {
    replacement = "- The user's estimated location is " +
                  std::string(trim(*ctx.user_location)) + "\n\n";
  }
  if (replace_all(body, slot_line, replacement) == 0) {
    replace_all(body, kLocationSlot, replacement);
  }
  return body;
}

}  // namespace

std::string_view to_string(SectionId id) {
  switch (id) {
    case SectionId::kPhilosophy: return "philosophy";
    case SectionId::kExamples: return "examples";
    case SectionId::kPlanning: return "planning";
    case SectionId::kTechnical: return "technical";
    case SectionId::kDynamic: return "dynamic";
  }
  return "unknown";
}

std::optional<SectionId> section_from_string(std::string_view name) {
  for (SectionId id : kAllSections) {
    if (to_string(id) == name) return id;
  }
  return std::nullopt;
}

std::string_view to_string(Role r) { return r == Role::kUser ? "user" : "model"; }

const std::vector<PromptProfile>& builtin_profiles() {
  static const std::vector<PromptProfile> kProfiles = {
      {"full",
       {SectionId::kPhilosophy, SectionId::kExamples, SectionId::kPlanning,
        SectionId::kTechnical, SectionId::kDynamic}},
      {"no_philosophy",
       {SectionId::kPlanning, SectionId::kTechnical, SectionId::kDynamic}},
      {"minimal", {SectionId::kTechnical, SectionId::kDynamic}},
  };
  return kProfiles;
}

std::string format_rfc3339(std::chrono::sys_seconds t, std::chrono::minutes offset) {
  std::time_t local = static_cast<std::time_t>(t.time_since_epoch().count()) +
                      static_cast<std::time_t>(offset.count()) * 60;
  std::tm tm{};
  gmtime_r(&local, &tm);
  char buf[40];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &tm);
  std::string out = buf;
  if (offset.count() == 0) {
    out += 'Z';
  } else {
    long m = offset.count();
    char sign = m < 0 ? '-' : '+';
    if (m < 0) m = -m;
    char off[32];
    std::snprintf(off, sizeof off, "%c%02ld:%02ld", sign, m / 60, m % 60);
    out += off;
  }
  return out;
}

PromptRegistry::PromptRegistry(std::vector<PromptSection> sections,
                               std::vector<StyleVariant> styles) {
  for (auto& s : sections) {
    std::string body = strip_trailing_newlines(std::move(s.body));
    if (is_blank(body)) {
      throw PromptError(PromptError::Code::kMissingSection,
                        "section '" + std::string(to_string(s.id)) + "' is empty");
    }
    if (!sections_.emplace(s.id, std::move(body)).second) {
      throw PromptError(PromptError::Code::kMissingSection,
                        "duplicate section '" + std::string(to_string(s.id)) + "'");
    }
  }
  for (auto& v : styles) register_style(std::move(v));
}

PromptRegistry::PromptRegistry(PromptRegistry&& other) noexcept
    : version(std::move(other.version)),
      sections_(std::move(other.sections_)),
      styles_(std::move(other.styles_)),
      history_cap_(other.history_cap_) {}

PromptRegistry PromptRegistry::load(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  std::vector<PromptSection> sections;
  for (SectionId id : kAllSections) {
    fs::path p = dir / "sections" / (std::string(to_string(id)) + ".txt");
    if (!fs::exists(p)) {
      throw PromptError(PromptError::Code::kMissingSection,
                        "missing section file " + p.string());
    }
    sections.push_back({id, read_file(p)});
  }
  std::vector<StyleVariant> styles;
  std::vector<fs::path> style_files;
  for (const auto& entry : fs::directory_iterator(dir / "styles")) {
    if (entry.is_regular_file() && entry.path().extension() == ".txt") {
      style_files.push_back(entry.path());
    }
  }
  std::sort(style_files.begin(), style_files.end());
  for (const auto& p : style_files) {
    styles.push_back({p.stem().string(), read_file(p)});
  }
  PromptRegistry reg(std::move(sections), std::move(styles));
  if (fs::exists(dir / "VERSION")) {
    reg.version = std::string(trim(read_file(dir / "VERSION")));
  }
  return reg;
}

void PromptRegistry::register_style(StyleVariant v, bool overwrite) {
  if (v.name.empty() || is_blank(v.style_text)) {
    throw PromptError(PromptError::Code::kInvalidStyle,
                      "style '" + v.name + "' has an empty name or text");
  }
  std::unique_lock lock(mu_);
  auto it = styles_.find(v.name);
  if (it != styles_.end() && !overwrite) {
    throw PromptError(PromptError::Code::kDuplicateStyle,
                      "style '" + v.name + "' already registered");
  }
  styles_[v.name] = strip_trailing_newlines(std::move(v.style_text));
}

bool PromptRegistry::has_style(std::string_view name) const {
  std::shared_lock lock(mu_);
  return styles_.find(name) != styles_.end();
}

bool PromptRegistry::has_profile(std::string_view name) const {
  const auto& profiles = builtin_profiles();
  return std::any_of(profiles.begin(), profiles.end(),
                     [&](const PromptProfile& p) { return p.name == name; });
}

std::vector<std::string> PromptRegistry::style_names() const {
  std::shared_lock lock(mu_);
  std::vector<std::string> out;
  for (const auto& [name, text] : styles_) out.push_back(name);
  return out;
}

PromptBundle PromptRegistry::assemble(std::string_view profile_name,
                                      std::string_view style_name,
                                      const DynamicContext& ctx,
                                      std::vector<Message> history) const {
  const auto& profiles = builtin_profiles();
  auto profile = std::find_if(profiles.begin(), profiles.end(),
                              [&](const PromptProfile& p) { return p.name == profile_name; });
  if (profile == profiles.end()) {
    throw PromptError(PromptError::Code::kUnknownProfile,
                      "unknown profile '" + std::string(profile_name) + "'");
  }

  for (std::size_t i = 0; i < history.size(); ++i) {
    Role expected = (i % 2 == 0) ? Role::kUser : Role::kModel;
    if (history[i].role != expected) {
      throw PromptError(PromptError::Code::kInvalidHistory,
                        "history must alternate user/model starting with user");
    }
  }
  if (history.size() > history_cap_) {
    std::size_t drop = history.size() - history_cap_;
    if (drop % 2 == 1) ++drop;  // keep the user-first alternation
    history.erase(history.begin(),
                  history.begin() + static_cast<std::ptrdiff_t>(std::min(drop, history.size())));
  }

  std::shared_lock lock(mu_);
  auto style = styles_.find(style_name);
  if (style == styles_.end()) {
    throw PromptError(PromptError::Code::kUnknownStyle,
                      "unknown style '" + std::string(style_name) + "'");
  }

  PromptBundle bundle;
  bundle.profile = profile->name;
  bundle.style = style->first;
  bundle.history = std::move(history);

  std::string& text = bundle.system_text;
  bool style_placed = false;
  for (SectionId id : profile->included_sections) {
    auto sec = sections_.find(id);
    if (sec == sections_.end()) {
      throw PromptError(PromptError::Code::kMissingSection,
                        "section '" + std::string(to_string(id)) + "' not loaded");
    }
    std::string body = id == SectionId::kDynamic ? render_dynamic(sec->second, ctx)
                                                 : sec->second;
    if (!style_placed && id == SectionId::kDynamic) {
      // No section carried a style slot; the Style block goes right before
      // the dynamic context.
      if (!text.empty()) text += kSectionSeparator;
      bundle.style_begin = text.size();
      text += style->second;
      bundle.style_end = text.size();
      style_placed = true;
    }
    if (!text.empty()) text += kSectionSeparator;
    std::size_t slot = style_placed ? std::string::npos : body.find(kStyleSlot);
    if (slot != std::string::npos) {
      bundle.style_begin = text.size() + slot;
      bundle.style_end = bundle.style_begin + style->second.size();
      body.replace(slot, kStyleSlot.size(), style->second);
      style_placed = true;
    }
    text += body;
  }
  return bundle;
}

}  // namespace genui::prompt
