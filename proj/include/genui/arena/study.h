#pragma once

// Output-error rates, synthetic verdict generation and report bundles.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "genui/arena/rating.h"
#include "genui/arena/records.h"
#include "genui/extract/extractor.h"

namespace genui::arena {

struct ArmErrors {
  int n_runs = 0;
  int n_output_errors = 0;
  double rate = 0.0;
};

struct ErrorStats {
  std::map<std::string, ArmErrors> arms;
};

nlohmann::json to_json(const ErrorStats& s);

class UnlabeledArtifact : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class EmptyArtifactSet : public std::invalid_argument {
 public:
  EmptyArtifactSet() : std::invalid_argument("no artifacts to compute error rates over") {}
};

struct LabeledPage {
  std::string id;
  extract::ExtractedPage page;
};

// `labels` maps artifact id -> arm id. Throws UnlabeledArtifact for an id
// with no label and EmptyArtifactSet for an empty input.
ErrorStats error_stats(const std::vector<LabeledPage>& pages,
                       const std::map<std::string, std::string>& labels);

// Observed pairwise preferences: wins[{a, b}] is the fraction of (a, b)
// comparisons favoring a. The remainder of a pair is neutral.
struct PreferenceTable {
  std::string study;
  std::vector<std::string> arms;
  std::map<std::pair<std::string, std::string>, double> wins;
  std::map<std::string, std::string> labels;  // optional display names

  // {"study", "arms": [...], "wins": [[null, 0.5, ...], ...]} with rows
  // favoring the row arm; values are fractions or percentages (> 1).
  static PreferenceTable from_json(const nlohmann::json& j);
};

enum class SynthMode {
  kQuota,   // exact counts round(n * p), order shuffled by the seed
  kSample,  // independent categorical draws
};

struct SynthOptions {
  int per_pair = 500;
  std::uint64_t seed = 7;
  SynthMode mode = SynthMode::kQuota;
  int raters = 2;
};

std::vector<ComparisonRecord> synthesize(const PreferenceTable& table, const SynthOptions& opts);

struct StudyReport {
  std::string study;
  WinMatrix wins;
  std::optional<EloTable> elo;
  std::string elo_error;  // set when the graph is disconnected
};

struct ReportBundle {
  std::vector<StudyReport> studies;  // one per study id, sorted
  std::optional<ErrorStats> errors;
  std::map<std::string, std::string> labels;  // arm id -> display label
};

ReportBundle build_report(const Dataset& ds, std::optional<ErrorStats> errors = std::nullopt,
                          std::map<std::string, std::string> labels = {});

std::string render_text(const ReportBundle& b);

// Writes elo.json, wins.json, errors.json and report.txt into `dir`.
void write_report(const ReportBundle& b, const std::filesystem::path& dir);

}  // namespace genui::arena
