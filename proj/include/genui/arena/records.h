#pragma once

// Pairwise rater verdicts and the dataset they are ingested into.
//
// Records file: one JSON object per line
//   {"study", "prompt_id", "left", "right", "rater", "verdict"}
// with verdict one of "left", "neutral", "right".

#include <cstddef>
#include <filesystem>
#include <istream>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include <json.hpp>

namespace genui::arena {

enum class Verdict { kLeft, kNeutral, kRight };

std::string_view to_string(Verdict v);
std::optional<Verdict> verdict_from_string(std::string_view s);

struct ComparisonRecord {
  std::string study;
  std::string prompt_id;
  std::string left;
  std::string right;
  std::string rater;
  Verdict verdict = Verdict::kNeutral;

  // Same comparison seen from the other side.
  ComparisonRecord mirrored() const;
  bool operator==(const ComparisonRecord&) const = default;
};

nlohmann::json to_json(const ComparisonRecord& r);

class MalformedRecord : public std::invalid_argument {
 public:
  MalformedRecord(std::size_t line, const std::string& what);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class ConflictingDuplicate : public std::runtime_error {
 public:
  ConflictingDuplicate(std::size_t line, const std::string& what);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Throws MalformedRecord (line as given) on missing or mistyped fields, an
// unknown verdict, empty ids, or left == right.
ComparisonRecord record_from_json(const nlohmann::json& j, std::size_t line = 0);

class Dataset {
 public:
  // Rejects a second verdict from the same rater on the same prompt and
  // unordered pair within a study.
  void add(ComparisonRecord r, std::size_t line = 0);
  bool contains_key(const ComparisonRecord& r) const;

  const std::vector<ComparisonRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }

  std::vector<std::string> arms() const;     // sorted
  std::vector<std::string> studies() const;  // sorted
  Dataset only_study(std::string_view study) const;

 private:
  using Key = std::tuple<std::string, std::string, std::string, std::string, std::string>;
  static Key key_of(const ComparisonRecord& r);

  std::vector<ComparisonRecord> records_;
  std::set<Key> keys_;
};

// Blank lines are skipped. Errors carry 1-based line numbers.
Dataset ingest(std::istream& in);
Dataset ingest_file(const std::filesystem::path& path);

}  // namespace genui::arena
