#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>
#include <sstream>

#include "genui/arena/rating.h"
#include "genui/arena/records.h"
#include "genui/arena/study.h"
#include "genui/util/files.h"
#include "genui/util/resources.h"
#include "published.h"

using namespace genui;
using namespace genui::arena;
using genui::testing::published_table;

namespace {

ComparisonRecord rec(std::string left, std::string right, Verdict v, std::string rater = "r0",
                     std::string prompt = "p0", std::string study = "s") {
  return {std::move(study), std::move(prompt), std::move(left), std::move(right), std::move(rater), v};
}

std::vector<ComparisonRecord> repeat(const std::string& a, const std::string& b, int a_wins,
                                     int b_wins, int ties) {
  std::vector<ComparisonRecord> out;
  int n = 0;
  auto add = [&](Verdict v, int count) {
    for (int i = 0; i < count; ++i, ++n) out.push_back(rec(a, b, v, "r", "p" + std::to_string(n)));
  };
  add(Verdict::kLeft, a_wins);
  add(Verdict::kRight, b_wins);
  add(Verdict::kNeutral, ties);
  return out;
}

PreferenceTable load_table(const std::string& name) {
  return PreferenceTable::from_json(
      nlohmann::json::parse(read_file(resource_dir() / "eval" / name)));
}

// Maximizes the pairwise log-likelihood over the rating gap on a 0.01
// point grid. Wins and losses include the half-win shares of ties.
double grid_gap(double a_points, double b_points) {
  double best = 0, best_ll = -1e300;
  for (int step = -200000; step <= 200000; ++step) {
    double d = step * 0.01;
    double pa = 1.0 / (1.0 + std::pow(10.0, -d / 400.0));
    double ll = a_points * std::log(pa) + b_points * std::log(1.0 - pa);
    if (ll > best_ll) {
      best_ll = ll;
      best = d;
    }
  }
  return best;
}

double mean_rating(const EloTable& t) {
  double s = 0;
  for (const auto& [_, r] : t.ratings) s += r;
  return s / t.ratings.size();
}

}  // namespace

TEST(IngestTest, AcceptsTwoRatersPerResult) {
  std::istringstream in(
      R"({"study":"s","prompt_id":"p1","left":"a","right":"b","rater":"r1","verdict":"left"})"
      "\n\n"
      R"({"study":"s","prompt_id":"p1","left":"b","right":"a","rater":"r2","verdict":"neutral"})"
      "\n");
  Dataset ds = ingest(in);
  EXPECT_EQ(ds.size(), 2u);
  EXPECT_EQ(ds.arms(), (std::vector<std::string>{"a", "b"}));
}

TEST(IngestTest, RejectsUnknownVerdictWithLineNumber) {
  std::istringstream in(
      R"({"study":"s","prompt_id":"p1","left":"a","right":"b","rater":"r1","verdict":"left"})"
      "\n"
      R"({"study":"s","prompt_id":"p2","left":"a","right":"b","rater":"r1","verdict":"both"})"
      "\n");
  try {
    ingest(in);
    FAIL() << "expected MalformedRecord";
  } catch (const MalformedRecord& e) {
    EXPECT_EQ(e.line(), 2u);
  }
}

TEST(IngestTest, RejectsMalformedShapes) {
  const char* bad[] = {
      "not json",
      R"({"study":"s","prompt_id":"p","left":"a","right":"a","rater":"r","verdict":"left"})",
      R"({"study":"s","prompt_id":"p","left":"a","rater":"r","verdict":"left"})",
      R"({"study":"s","prompt_id":"p","left":"a","right":"b","rater":"","verdict":"left"})",
      R"({"study":"s","prompt_id":"p","left":"a","right":"b","rater":"r","verdict":1})",
      R"([1,2])",
  };
  for (const char* line : bad) {
    std::istringstream in(line);
    EXPECT_THROW(ingest(in), MalformedRecord) << line;
  }
}

TEST(IngestTest, SameRaterSamePairTwiceConflicts) {
  std::istringstream in(
      R"({"study":"s","prompt_id":"p1","left":"a","right":"b","rater":"r1","verdict":"left"})"
      "\n"
      R"({"study":"s","prompt_id":"p1","left":"b","right":"a","rater":"r1","verdict":"left"})"
      "\n");
  try {
    ingest(in);
    FAIL() << "expected ConflictingDuplicate";
  } catch (const ConflictingDuplicate& e) {
    EXPECT_EQ(e.line(), 2u);
  }
}

TEST(WinMatrixTest, NeutralsOnlyInDenominator) {
  auto records = repeat("expert", "genui", 500, 353, 147);
  WinMatrix m = win_matrix(records);
  EXPECT_DOUBLE_EQ(*m.wins("expert", "genui"), 0.5);
  EXPECT_DOUBLE_EQ(*m.wins("genui", "expert"), 0.353);
  EXPECT_NEAR(*m.neutral("expert", "genui"), 0.147, 1e-12);
  EXPECT_EQ(m.count("expert", "genui"), m.count("genui", "expert"));
  EXPECT_FALSE(m.wins("expert", "expert"));
}

TEST(WinMatrixTest, AllNeutralAndUnobservedPairs) {
  auto records = repeat("a", "b", 0, 0, 7);
  records.push_back(rec("b", "c", Verdict::kLeft));
  WinMatrix m = win_matrix(records);
  EXPECT_DOUBLE_EQ(*m.wins("a", "b"), 0.0);
  EXPECT_DOUBLE_EQ(*m.wins("b", "a"), 0.0);
  EXPECT_EQ(m.count("a", "b"), 7);
  EXPECT_FALSE(m.wins("a", "c").has_value());
  EXPECT_EQ(m.count("a", "c"), 0);
}

TEST(WinMatrixTest, RecoversGeneratingMatrix) {
  PreferenceTable table = load_table("lmarena_preferences.json");
  for (SynthMode mode : {SynthMode::kQuota, SynthMode::kSample}) {
    SynthOptions opts;
    opts.per_pair = 2000;
    opts.mode = mode;
    WinMatrix m = win_matrix(synthesize(table, opts));
    for (const auto& [pair, p] : table.wins) {
      double got = *m.wins(pair.first, pair.second);
      // Quota draws are exact up to rounding; sampled draws get a
      // four-sigma binomial band.
      double tol = mode == SynthMode::kQuota ? 0.005 : 4 * std::sqrt(p * (1 - p) / 2000) + 1e-9;
      EXPECT_NEAR(got, p, tol) << pair.first << " vs " << pair.second;
    }
  }
}

TEST(SolveEloTest, NoRecordsGivesAllAnchor) {
  EloOptions opts;
  opts.arms = {"a", "b", "c", "d"};
  EloTable t = solve_elo({}, opts);
  ASSERT_EQ(t.ratings.size(), 4u);
  for (const auto& [_, r] : t.ratings) EXPECT_NEAR(r, 1500.0, 1e-9);
}

TEST(SolveEloTest, TwoArmGapMatchesLikelihoodGrid) {
  auto records = repeat("A", "B", 8, 2, 0);
  EloTable t = solve_elo(records);
  double gap = t.ratings.at("A") - t.ratings.at("B");
  // The virtual tie adds half a point to each side.
  EXPECT_NEAR(gap, grid_gap(8.5, 2.5), 1.0);
  EXPECT_NEAR(mean_rating(t), 1500.0, 1e-6);
}

TEST(SolveEloTest, TwoArmGapWithTiesMatchesGrid) {
  auto records = repeat("A", "B", 5, 3, 4);
  EloTable t = solve_elo(records);
  EXPECT_NEAR(t.ratings.at("A") - t.ratings.at("B"), grid_gap(5 + 2 + 0.5, 3 + 2 + 0.5), 1.0);
}

TEST(SolveEloTest, SweepStaysFinite) {
  auto records = repeat("A", "B", 200, 0, 0);
  EloTable t = solve_elo(records);
  EXPECT_TRUE(std::isfinite(t.ratings.at("A")));
  EXPECT_GT(t.ratings.at("A"), t.ratings.at("B"));
}

TEST(SolveEloTest, GapMonotoneInWinFraction) {
  double prev = -1e9;
  for (int wins = 0; wins <= 20; ++wins) {
    EloTable t = solve_elo(repeat("A", "B", wins, 20 - wins, 0));
    double gap = t.ratings.at("A") - t.ratings.at("B");
    EXPECT_GT(gap, prev);
    prev = gap;
  }
}

TEST(SolveEloTest, DisconnectedGraphListsComponents) {
  std::vector<ComparisonRecord> records = {rec("a", "b", Verdict::kLeft),
                                           rec("c", "d", Verdict::kRight)};
  try {
    solve_elo(records);
    FAIL() << "expected DisconnectedGraph";
  } catch (const DisconnectedGraph& e) {
    ASSERT_EQ(e.components().size(), 2u);
    EXPECT_EQ(e.components()[0], (std::vector<std::string>{"a", "b"}));
    EXPECT_EQ(e.components()[1], (std::vector<std::string>{"c", "d"}));
  }
}

class PublishedOrderTest : public ::testing::TestWithParam<std::pair<const char*, const char*>> {};

TEST_P(PublishedOrderTest, SynthesizedVerdictsReproduceOrdering) {
  auto [resource, elo_label] = GetParam();
  PreferenceTable table = load_table(resource);
  // Expected order: the published ELO table sorted by score, mapped back
  // to arm ids through the display labels.
  auto rows = published_table(elo_label);
  std::sort(rows.begin(), rows.end(),
            [](const auto& a, const auto& b) { return *a.cells[0] > *b.cells[0]; });
  std::vector<std::string> expected;
  for (const auto& row : rows) {
    for (const auto& [id, label] : table.labels) {
      if (label == row.name) expected.push_back(id);
    }
  }
  ASSERT_EQ(expected.size(), 5u);

  auto records = synthesize(table, {});
  EloTable t = solve_elo(records);
  EXPECT_EQ(t.order(), expected);
  EXPECT_NEAR(mean_rating(t), 1500.0, 1e-6);
}

INSTANTIATE_TEST_SUITE_P(
    Tables, PublishedOrderTest,
    ::testing::Values(std::pair{"lmarena_preferences.json", "tab:elo-scores"},
                      std::pair{"info_seeking_preferences.json", "tab:elo-scores-pagen"}));

TEST(SolveEloTest, InvariantUnderPermutationMirrorAndRelabel) {
  auto records = synthesize(load_table("lmarena_preferences.json"), {});
  EloTable base = solve_elo(records);

  auto shuffled = records;
  std::mt19937_64 rng(99);
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  EloTable perm = solve_elo(shuffled);

  auto mirrored = records;
  for (auto& r : mirrored) r = r.mirrored();
  EloTable mirror = solve_elo(mirrored);

  auto renamed = records;
  auto rename = [](const std::string& s) { return "zz_" + std::string(s.rbegin(), s.rend()); };
  for (auto& r : renamed) {
    r.left = rename(r.left);
    r.right = rename(r.right);
  }
  EloTable relabel = solve_elo(renamed);

  for (const auto& [arm, r] : base.ratings) {
    EXPECT_NEAR(perm.ratings.at(arm), r, 1e-6) << arm;
    EXPECT_NEAR(mirror.ratings.at(arm), r, 1e-6) << arm;
    EXPECT_NEAR(relabel.ratings.at(rename(arm)), r, 1e-6) << arm;
  }
}

TEST(SolveEloTest, UniformExtraWinsKeepAnchorAndOrder) {
  auto records = synthesize(load_table("lmarena_preferences.json"), {});
  EloTable base = solve_elo(records);
  auto arms = base.order();
  int n = 0;
  for (std::size_t i = 0; i < arms.size(); ++i) {
    for (std::size_t k = 0; k < arms.size(); ++k) {
      if (i == k) continue;
      for (int c = 0; c < 25; ++c) {
        records.push_back(rec(arms[i], arms[k], Verdict::kLeft, "extra", "x" + std::to_string(n++), "lmarena"));
      }
    }
  }
  EloTable more = solve_elo(records);
  EXPECT_NEAR(mean_rating(more), 1500.0, 1e-6);
  EXPECT_EQ(more.order(), arms);
}

TEST(PublishedTablesTest, PreferenceResourcesMatchSource) {
  const std::pair<const char*, const char*> pairs[] = {
      {"lmarena_preferences.json", "tab:sxs-comparison"},
      {"info_seeking_preferences.json", "tab:sxs-comparison-pagen"}};
  for (auto [resource, label] : pairs) {
    PreferenceTable table = load_table(resource);
    auto rows = published_table(label);
    ASSERT_EQ(rows.size(), table.arms.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      ASSERT_EQ(rows[i].cells.size(), table.arms.size());
      for (std::size_t k = 0; k < rows.size(); ++k) {
        if (i == k) {
          EXPECT_FALSE(rows[i].cells[k].has_value());
          continue;
        }
        EXPECT_NEAR(table.wins.at({table.arms[i], table.arms[k]}) * 100.0, *rows[i].cells[k], 1e-9)
            << label << " row " << i << " col " << k;
      }
    }
  }
}

TEST(ErrorStatsTest, RatesPerArm) {
  extract::ExtractedPage ok = extract::extract("```html\n<!DOCTYPE html><html><body>x</body></html>\n```");
  extract::ExtractedPage bad = extract::extract("<html>no fence</html>");
  ASSERT_FALSE(extract::is_output_error(ok));
  ASSERT_TRUE(extract::is_output_error(bad));
  std::vector<LabeledPage> pages = {{"1", ok}, {"2", bad}, {"3", bad}, {"4", ok}};
  ErrorStats s = error_stats(pages, {{"1", "lite"}, {"2", "lite"}, {"3", "lite"}, {"4", "pro"}});
  EXPECT_EQ(s.arms.at("lite").n_runs, 3);
  EXPECT_EQ(s.arms.at("lite").n_output_errors, 2);
  EXPECT_DOUBLE_EQ(s.arms.at("lite").rate, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(s.arms.at("pro").rate, 0.0);
}

TEST(ErrorStatsTest, EmptyAndUnlabeledAreErrors) {
  EXPECT_THROW(error_stats({}, {}), EmptyArtifactSet);
  std::vector<LabeledPage> pages = {{"1", extract::extract("x")}};
  EXPECT_THROW(error_stats(pages, {}), UnlabeledArtifact);
}

TEST(ReportTest, TwoCorporaGiveTwoTableSets) {
  Dataset ds;
  for (auto& r : synthesize(load_table("lmarena_preferences.json"), {})) ds.add(r);
  for (auto& r : synthesize(load_table("info_seeking_preferences.json"), {})) ds.add(r);
  ReportBundle b = build_report(ds);
  ASSERT_EQ(b.studies.size(), 2u);
  EXPECT_EQ(b.studies[0].study, "info_seeking");
  EXPECT_EQ(b.studies[1].study, "lmarena");
  auto dir = std::filesystem::temp_directory_path() / ("genui_report_" + std::to_string(::getpid()));
  write_report(b, dir);
  for (const char* f : {"elo.json", "wins.json", "errors.json", "report.txt"}) {
    EXPECT_TRUE(std::filesystem::exists(dir / f)) << f;
  }
  auto elo = nlohmann::json::parse(read_file(dir / "elo.json"));
  EXPECT_EQ(elo["studies"].size(), 2u);
  std::string text = read_file(dir / "report.txt");
  EXPECT_NE(text.find("== lmarena =="), std::string::npos);
  EXPECT_NE(text.find("== info_seeking =="), std::string::npos);
  std::filesystem::remove_all(dir);
}

TEST(ReportTest, ProfileAblationShape) {
  Dataset ds;
  auto add = [&](const char* a, const char* b, int wa, int wb, int t) {
    for (auto r : repeat(a, b, wa, wb, t)) {
      r.study = "ablation";
      r.prompt_id = std::string(a) + b + r.prompt_id;
      ds.add(r);
    }
  };
  add("full", "minimal", 60, 35, 5);
  add("full", "no_philosophy", 65, 30, 5);
  add("minimal", "no_philosophy", 55, 40, 5);
  ReportBundle b = build_report(ds, std::nullopt,
                                {{"full", "Full Prompt"}, {"minimal", "Minimal Prompt"},
                                 {"no_philosophy", "No Philosophy"}});
  ASSERT_TRUE(b.studies[0].elo);
  EXPECT_EQ(b.studies[0].elo->order(),
            (std::vector<std::string>{"full", "minimal", "no_philosophy"}));
  std::string text = render_text(b);
  EXPECT_LT(text.find("Full Prompt"), text.find("Minimal Prompt"));
}

TEST(ReportTest, EmptyStudyHasNoDataMarkers) {
  ReportBundle b = build_report(Dataset{});
  auto dir = std::filesystem::temp_directory_path() / ("genui_empty_" + std::to_string(::getpid()));
  write_report(b, dir);
  for (const char* f : {"elo.json", "wins.json", "errors.json"}) {
    EXPECT_EQ(nlohmann::json::parse(read_file(dir / f))["status"], "no data") << f;
  }
  EXPECT_NE(read_file(dir / "report.txt").find("no data"), std::string::npos);
  std::filesystem::remove_all(dir);
}
