#include <gtest/gtest.h>

#include <chrono>
#include <set>
#include <thread>

#include "genui/prompt/forge.h"
#include "genui/util/files.h"
#include "genui/util/resources.h"

using namespace genui;
using namespace genui::prompt;
using namespace std::chrono;

namespace {

PromptRegistry registry() { return PromptRegistry::load(resource_dir() / "prompt"); }

DynamicContext jan1() {
  DynamicContext ctx;
  ctx.now = sys_days{year{2025} / January / 1};
  return ctx;
}

std::string first_line(const std::string& section) {
  std::string body = read_file(resource_dir() / "prompt" / "sections" / (section + ".txt"));
  return body.substr(0, body.find('\n'));
}

std::string style_file(const std::string& name) {
  std::string s = read_file(resource_dir() / "prompt" / "styles" / (name + ".txt"));
  while (!s.empty() && (s.back() == '\n' || s.back() == '\r')) s.pop_back();
  return s;
}

bool contains(const std::string& hay, const std::string& needle) {
  return hay.find(needle) != std::string::npos;
}

}  // namespace

TEST(Prompt, FullDefaultHasTimestampAndNoLocation) {
  auto reg = registry();
  auto b = reg.assemble("full", "default", jan1(), {});
  EXPECT_TRUE(contains(b.system_text, "It is now: 2025-01-01"));
  EXPECT_TRUE(contains(b.system_text, "It is now: 2025-01-01T00:00:00Z"));
  EXPECT_FALSE(contains(b.system_text, "estimated location"));
  EXPECT_FALSE(contains(b.system_text, "{{"));
  EXPECT_EQ(b.profile, "full");
  EXPECT_EQ(b.style, "default");
}

TEST(Prompt, LocationLinePresentOnlyWhenGiven) {
  auto reg = registry();
  auto ctx = jan1();
  ctx.user_location = "Zurich, Switzerland";
  auto b = reg.assemble("full", "default", ctx, {});
  EXPECT_TRUE(contains(b.system_text, "The user's estimated location is Zurich, Switzerland"));
  ctx.user_location = "   ";
  EXPECT_FALSE(contains(reg.assemble("full", "default", ctx, {}).system_text, "estimated location"));
}

TEST(Prompt, Rfc3339Offsets) {
  sys_seconds t = sys_days{year{2025} / March / 9} + hours{14} + minutes{5} + seconds{7};
  EXPECT_EQ(format_rfc3339(t, minutes{0}), "2025-03-09T14:05:07Z");
  EXPECT_EQ(format_rfc3339(t, minutes{120}), "2025-03-09T16:05:07+02:00");
  EXPECT_EQ(format_rfc3339(t, minutes{-330}), "2025-03-09T08:35:07-05:30");
}

TEST(Prompt, StylesDifferOnlyInsideStyleBlock) {
  auto reg = registry();
  auto names = reg.style_names();
  for (const char* required : {"default", "classic", "wizard_green"}) {
    EXPECT_TRUE(reg.has_style(required)) << required;
  }
  for (const std::string profile : {"full", "minimal", "no_philosophy"}) {
    auto base = reg.assemble(profile, "default", jan1(), {});
    for (const auto& s : names) {
      auto b = reg.assemble(profile, s, jan1(), {});
      ASSERT_EQ(b.style_begin, base.style_begin) << profile << "/" << s;
      EXPECT_EQ(b.system_text.substr(0, b.style_begin), base.system_text.substr(0, base.style_begin));
      EXPECT_EQ(b.system_text.substr(b.style_end), base.system_text.substr(base.style_end));
      EXPECT_EQ(b.system_text.substr(b.style_begin, b.style_end - b.style_begin), style_file(s));
    }
  }
  auto d = reg.assemble("full", "default", jan1(), {});
  auto w = reg.assemble("full", "wizard_green", jan1(), {});
  EXPECT_NE(d.system_text, w.system_text);
}

TEST(Prompt, ExactlyOneStyleBlock) {
  auto reg = registry();
  for (const std::string profile : {"full", "minimal", "no_philosophy"}) {
    for (const auto& s : reg.style_names()) {
      auto b = reg.assemble(profile, s, jan1(), {});
      std::string text = style_file(s);
      std::size_t first = b.system_text.find(text);
      ASSERT_NE(first, std::string::npos);
      EXPECT_EQ(b.system_text.find(text, first + 1), std::string::npos);
    }
  }
}

TEST(Prompt, ProfilesSelectSections) {
  auto reg = registry();
  auto full = reg.assemble("full", "default", jan1(), {}).system_text;
  auto minimal = reg.assemble("minimal", "default", jan1(), {}).system_text;
  auto nophil = reg.assemble("no_philosophy", "default", jan1(), {}).system_text;

  std::set<std::string> all = {"philosophy", "examples", "planning", "technical", "dynamic"};
  auto present = [&](const std::string& text) {
    std::set<std::string> out;
    for (const auto& s : all) {
      if (contains(text, first_line(s))) out.insert(s);
    }
    return out;
  };
  EXPECT_EQ(present(full), all);
  EXPECT_EQ(present(minimal), (std::set<std::string>{"technical", "dynamic"}));
  EXPECT_EQ(present(nophil), (std::set<std::string>{"planning", "technical", "dynamic"}));

  auto pm = present(minimal), pn = present(nophil), pf = present(full);
  EXPECT_TRUE(std::includes(pn.begin(), pn.end(), pm.begin(), pm.end()));
  EXPECT_TRUE(std::includes(pf.begin(), pf.end(), pn.begin(), pn.end()));
}

TEST(Prompt, SectionsInRegistryOrder) {
  auto reg = registry();
  auto full = reg.assemble("full", "default", jan1(), {}).system_text;
  std::size_t last = 0;
  for (const char* s : {"philosophy", "examples", "planning", "technical", "dynamic"}) {
    std::size_t at = full.find(first_line(s));
    ASSERT_NE(at, std::string::npos) << s;
    EXPECT_GE(at, last) << s;
    last = at;
  }
}

TEST(Prompt, Deterministic) {
  auto reg = registry();
  std::vector<Message> h = {{Role::kUser, "a"}, {Role::kModel, "b"}, {Role::kUser, "c"}};
  auto a = reg.assemble("full", "classic", jan1(), h);
  auto b = reg.assemble("full", "classic", jan1(), h);
  EXPECT_EQ(a.system_text, b.system_text);
  EXPECT_EQ(a.history, b.history);
}

TEST(Prompt, UnknownProfileAndStyle) {
  auto reg = registry();
  try {
    reg.assemble("huge", "default", jan1(), {});
    FAIL();
  } catch (const PromptError& e) {
    EXPECT_EQ(e.code(), PromptError::Code::kUnknownProfile);
  }
  try {
    reg.assemble("full", "neon", jan1(), {});
    FAIL();
  } catch (const PromptError& e) {
    EXPECT_EQ(e.code(), PromptError::Code::kUnknownStyle);
  }
}

TEST(Prompt, RegisterStyle) {
  auto reg = registry();
  reg.register_style({"mono", "**Style:** black on white, monospace only."});
  auto b = reg.assemble("full", "mono", jan1(), {});
  EXPECT_TRUE(contains(b.system_text, "black on white, monospace only."));

  try {
    reg.register_style({"classic", "other"});
    FAIL();
  } catch (const PromptError& e) {
    EXPECT_EQ(e.code(), PromptError::Code::kDuplicateStyle);
  }
  reg.register_style({"classic", "replaced classic"}, true);
  EXPECT_TRUE(contains(reg.assemble("full", "classic", jan1(), {}).system_text, "replaced classic"));

  try {
    reg.register_style({"blank", " \n "});
    FAIL();
  } catch (const PromptError& e) {
    EXPECT_EQ(e.code(), PromptError::Code::kInvalidStyle);
  }
  EXPECT_FALSE(reg.has_style("blank"));
}

TEST(Prompt, HistoryMustAlternate) {
  auto reg = registry();
  std::vector<Message> bad = {{Role::kModel, "x"}};
  EXPECT_THROW(reg.assemble("full", "default", jan1(), bad), PromptError);
  std::vector<Message> twice = {{Role::kUser, "x"}, {Role::kUser, "y"}};
  EXPECT_THROW(reg.assemble("full", "default", jan1(), twice), PromptError);
}

TEST(Prompt, HistoryCapKeepsRecentUserFirst) {
  auto reg = registry();
  std::vector<Message> h;
  for (int i = 0; i < 25; ++i) {
    h.push_back({i % 2 == 0 ? Role::kUser : Role::kModel, "m" + std::to_string(i)});
  }
  auto b = reg.assemble("full", "default", jan1(), h);
  ASSERT_LE(b.history.size(), PromptRegistry::kDefaultHistoryCap);
  EXPECT_EQ(b.history.front().role, Role::kUser);
  EXPECT_EQ(b.history.back().content, "m24");
  // 25 messages, cap 20: dropping 6 keeps alternation (m6..m24).
  EXPECT_EQ(b.history.size(), 19u);
  EXPECT_EQ(b.history.front().content, "m6");

  std::vector<Message> short_h(h.begin(), h.begin() + 5);
  EXPECT_EQ(reg.assemble("full", "default", jan1(), short_h).history, short_h);
}

TEST(Prompt, ConcurrentAssembleAndRegister) {
  auto reg = registry();
  auto expected = reg.assemble("full", "default", jan1(), {}).system_text;
  std::atomic<int> mismatches{0};
  std::vector<std::thread> threads;
  for (int t = 0; t < 8; ++t) {
    threads.emplace_back([&, t] {
      for (int i = 0; i < 50; ++i) {
        if (t == 0) reg.register_style({"s" + std::to_string(i), "style " + std::to_string(i)});
        if (reg.assemble("full", "default", jan1(), {}).system_text != expected) ++mismatches;
      }
    });
  }
  for (auto& th : threads) th.join();
  EXPECT_EQ(mismatches.load(), 0);
  EXPECT_TRUE(reg.has_style("s49"));
}
