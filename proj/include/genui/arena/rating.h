#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "genui/arena/records.h"

namespace genui::arena {

struct PairCounts {
  int favor_a = 0;
  int favor_b = 0;
  int neutral = 0;
  int total() const { return favor_a + favor_b + neutral; }
};

struct WinMatrix {
  std::vector<std::string> arms;  // sorted
  // Keyed by (a, b) with a < b. Unobserved pairs are absent.
  std::map<std::pair<std::string, std::string>, PairCounts> pairs;

  // Fraction of (a, b) comparisons favoring a; nullopt for a == b or an
  // unobserved pair.
  std::optional<double> wins(const std::string& a, const std::string& b) const;
  std::optional<double> neutral(const std::string& a, const std::string& b) const;
  int count(const std::string& a, const std::string& b) const;
  int favoring(const std::string& a, const std::string& b) const;
};

WinMatrix win_matrix(const std::vector<ComparisonRecord>& records);
nlohmann::json to_json(const WinMatrix& m);

struct EloTable {
  std::map<std::string, double> ratings;
  double mean = 1500.0;
  double scale = 400.0;
  int iterations = 0;

  // Arms by descending rating (ties by id).
  std::vector<std::string> order() const;
};

nlohmann::json to_json(const EloTable& t);

class DisconnectedGraph : public std::invalid_argument {
 public:
  explicit DisconnectedGraph(std::vector<std::vector<std::string>> components);
  const std::vector<std::vector<std::string>>& components() const { return components_; }

 private:
  std::vector<std::vector<std::string>> components_;
};

struct EloOptions {
  // Arms to rate in addition to those seen in records. With no records at
  // all, every pair of these arms gets the virtual tie.
  std::vector<std::string> arms;
  double tolerance = 1e-12;
  int max_iterations = 100000;
};

// Bradley-Terry maximum likelihood by minorize-maximize iteration. A
// neutral verdict is half a win for each side and every observed pair gets
// one extra virtual tie. Ratings are 400*log10(strength) shifted to a mean
// of 1500. Throws DisconnectedGraph when the comparison graph has more than
// one component.
EloTable solve_elo(const std::vector<ComparisonRecord>& records, const EloOptions& opts = {});

}  // namespace genui::arena
