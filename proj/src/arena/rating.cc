#include "genui/arena/rating.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace genui::arena {

using Json = nlohmann::json;

namespace {

std::pair<std::string, std::string> ordered(const std::string& a, const std::string& b) {
  return a < b ? std::pair{a, b} : std::pair{b, a};
}

std::string join(const std::vector<std::string>& v) {
  std::string out;
  for (const auto& s : v) out += (out.empty() ? "" : ", ") + s;
  return out;
}

std::string describe(const std::vector<std::vector<std::string>>& comps) {
  std::string out = "comparison graph is disconnected:";
  for (const auto& c : comps) out += " {" + join(c) + "}";
  return out;
}

}  // namespace

std::optional<double> WinMatrix::wins(const std::string& a, const std::string& b) const {
  if (a == b) return std::nullopt;
  auto it = pairs.find(ordered(a, b));
  if (it == pairs.end() || it->second.total() == 0) return std::nullopt;
  return static_cast<double>(favoring(a, b)) / it->second.total();
}

std::optional<double> WinMatrix::neutral(const std::string& a, const std::string& b) const {
  if (a == b) return std::nullopt;
  auto it = pairs.find(ordered(a, b));
  if (it == pairs.end() || it->second.total() == 0) return std::nullopt;
  return static_cast<double>(it->second.neutral) / it->second.total();
}

int WinMatrix::count(const std::string& a, const std::string& b) const {
  auto it = pairs.find(ordered(a, b));
  return it == pairs.end() ? 0 : it->second.total();
}

int WinMatrix::favoring(const std::string& a, const std::string& b) const {
  auto it = pairs.find(ordered(a, b));
  if (it == pairs.end()) return 0;
  return a < b ? it->second.favor_a : it->second.favor_b;
}

WinMatrix win_matrix(const std::vector<ComparisonRecord>& records) {
  WinMatrix m;
  std::set<std::string> arms;
  for (const auto& r : records) {
    arms.insert(r.left);
    arms.insert(r.right);
    PairCounts& c = m.pairs[ordered(r.left, r.right)];
    if (r.verdict == Verdict::kNeutral) {
      ++c.neutral;
      continue;
    }
    const std::string& winner = r.verdict == Verdict::kLeft ? r.left : r.right;
    const std::string& loser = r.verdict == Verdict::kLeft ? r.right : r.left;
    if (winner < loser) ++c.favor_a;
    else ++c.favor_b;
  }
  m.arms.assign(arms.begin(), arms.end());
  return m;
}

Json to_json(const WinMatrix& m) {
  Json rows = Json::object();
  for (const auto& a : m.arms) {
    Json row = Json::object();
    for (const auto& b : m.arms) {
      auto w = m.wins(a, b);
      if (!w) continue;
      row[b] = Json{{"wins", *w}, {"favoring", m.favoring(a, b)}, {"count", m.count(a, b)}};
    }
    rows[a] = std::move(row);
  }
  return Json{{"arms", m.arms}, {"matrix", std::move(rows)}};
}

std::vector<std::string> EloTable::order() const {
  std::vector<std::string> out;
  for (const auto& [arm, _] : ratings) out.push_back(arm);
  std::stable_sort(out.begin(), out.end(),
                   [&](const auto& a, const auto& b) { return ratings.at(a) > ratings.at(b); });
  return out;
}

Json to_json(const EloTable& t) {
  Json ratings = Json::object();
  for (const auto& [arm, r] : t.ratings) ratings[arm] = r;
  return Json{{"ratings", std::move(ratings)},
              {"order", t.order()},
              {"anchor", {{"mean", t.mean}, {"scale", t.scale}}}};
}

DisconnectedGraph::DisconnectedGraph(std::vector<std::vector<std::string>> components)
    : std::invalid_argument(describe(components)), components_(std::move(components)) {}

EloTable solve_elo(const std::vector<ComparisonRecord>& records, const EloOptions& opts) {
  std::set<std::string> arm_set(opts.arms.begin(), opts.arms.end());
  for (const auto& r : records) {
    arm_set.insert(r.left);
    arm_set.insert(r.right);
  }
  const std::vector<std::string> arms(arm_set.begin(), arm_set.end());
  const std::size_t k = arms.size();
  EloTable table;
  if (k == 0) return table;

  auto index = [&](const std::string& a) {
    return static_cast<std::size_t>(std::lower_bound(arms.begin(), arms.end(), a) - arms.begin());
  };
  // half[i][j]: points i earned against j, in half-win units to stay exact.
  std::vector<std::vector<long>> half(k, std::vector<long>(k, 0));
  std::vector<std::vector<bool>> seen(k, std::vector<bool>(k, false));
  for (const auto& r : records) {
    std::size_t l = index(r.left), rr = index(r.right);
    seen[l][rr] = seen[rr][l] = true;
    switch (r.verdict) {
      case Verdict::kLeft: half[l][rr] += 2; break;
      case Verdict::kRight: half[rr][l] += 2; break;
      case Verdict::kNeutral:
        half[l][rr] += 1;
        half[rr][l] += 1;
        break;
    }
  }
  if (records.empty()) {
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = 0; j < k; ++j) seen[i][j] = i != j;
    }
  }
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      if (seen[i][j]) half[i][j] += 1;  // virtual tie
    }
  }

  // Components by flood fill.
  std::vector<int> comp(k, -1);
  int ncomp = 0;
  for (std::size_t s = 0; s < k; ++s) {
    if (comp[s] >= 0) continue;
    std::vector<std::size_t> stack{s};
    comp[s] = ncomp;
    while (!stack.empty()) {
      std::size_t u = stack.back();
      stack.pop_back();
      for (std::size_t v = 0; v < k; ++v) {
        if (seen[u][v] && comp[v] < 0) {
          comp[v] = ncomp;
          stack.push_back(v);
        }
      }
    }
    ++ncomp;
  }
  if (ncomp > 1) {
    std::vector<std::vector<std::string>> comps(ncomp);
    for (std::size_t i = 0; i < k; ++i) comps[comp[i]].push_back(arms[i]);
    throw DisconnectedGraph(std::move(comps));
  }

  std::vector<double> wins(k, 0.0);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) wins[i] += half[i][j] / 2.0;
  }
  std::vector<double> p(k, 1.0), next(k);
  int it = 0;
  for (; it < opts.max_iterations; ++it) {
    for (std::size_t i = 0; i < k; ++i) {
      double denom = 0.0;
      for (std::size_t j = 0; j < k; ++j) {
        if (i == j || !seen[i][j]) continue;
        double games = (half[i][j] + half[j][i]) / 2.0;
        denom += games / (p[i] + p[j]);
      }
      next[i] = denom > 0 ? wins[i] / denom : p[i];
    }
    double log_mean = 0.0;
    for (double v : next) log_mean += std::log(v);
    log_mean /= static_cast<double>(k);
    double change = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      next[i] /= std::exp(log_mean);
      change = std::max(change, std::abs(std::log(next[i]) - std::log(p[i])));
    }
    p.swap(next);
    if (change < opts.tolerance) {
      ++it;
      break;
    }
  }

  std::vector<double> r(k);
  for (std::size_t i = 0; i < k; ++i) r[i] = table.scale * std::log10(p[i]);
  double mean = std::accumulate(r.begin(), r.end(), 0.0) / static_cast<double>(k);
  for (std::size_t i = 0; i < k; ++i) table.ratings[arms[i]] = r[i] - mean + table.mean;
  table.iterations = it;
  return table;
}

}  // namespace genui::arena
