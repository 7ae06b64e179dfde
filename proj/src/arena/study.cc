#include "genui/arena/study.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include "genui/util/files.h"

namespace genui::arena {

using Json = nlohmann::json;

Json to_json(const ErrorStats& s) {
  Json arms = Json::object();
  for (const auto& [arm, e] : s.arms) {
    arms[arm] = Json{{"n_runs", e.n_runs}, {"n_output_errors", e.n_output_errors}, {"rate", e.rate}};
  }
  return arms;
}

ErrorStats error_stats(const std::vector<LabeledPage>& pages,
                       const std::map<std::string, std::string>& labels) {
  if (pages.empty()) throw EmptyArtifactSet();
  ErrorStats s;
  for (const auto& p : pages) {
    auto it = labels.find(p.id);
    if (it == labels.end() || it->second.empty()) {
      throw UnlabeledArtifact("artifact " + p.id + " has no arm label");
    }
    ArmErrors& e = s.arms[it->second];
    ++e.n_runs;
    if (extract::is_output_error(p.page)) ++e.n_output_errors;
  }
  for (auto& [_, e] : s.arms) e.rate = static_cast<double>(e.n_output_errors) / e.n_runs;
  return s;
}

PreferenceTable PreferenceTable::from_json(const Json& j) {
  PreferenceTable t;
  t.study = j.value("study", "synthetic");
  t.arms = j.at("arms").get<std::vector<std::string>>();
  t.labels = j.value("labels", std::map<std::string, std::string>{});
  const Json& rows = j.at("wins");
  if (rows.size() != t.arms.size()) throw std::invalid_argument("wins must have one row per arm");
  bool percent = false;
  for (const auto& row : rows) {
    for (const auto& v : row) {
      if (v.is_number() && v.get<double>() > 1.0) percent = true;
    }
  }
  for (std::size_t i = 0; i < t.arms.size(); ++i) {
    if (rows[i].size() != t.arms.size()) throw std::invalid_argument("wins must be square");
    for (std::size_t k = 0; k < t.arms.size(); ++k) {
      if (i == k || rows[i][k].is_null()) continue;
      double v = rows[i][k].get<double>();
      t.wins[{t.arms[i], t.arms[k]}] = percent ? v / 100.0 : v;
    }
  }
  for (std::size_t i = 0; i < t.arms.size(); ++i) {
    for (std::size_t k = i + 1; k < t.arms.size(); ++k) {
      double a = t.wins.count({t.arms[i], t.arms[k]}) ? t.wins[{t.arms[i], t.arms[k]}] : 0.0;
      double b = t.wins.count({t.arms[k], t.arms[i]}) ? t.wins[{t.arms[k], t.arms[i]}] : 0.0;
      if (a < 0 || b < 0 || a + b > 1.0 + 1e-9) {
        throw std::invalid_argument("preferences for " + t.arms[i] + " vs " + t.arms[k] +
                                    " exceed 100%");
      }
    }
  }
  return t;
}

namespace {

// Uniform in [0, 1) from the top 53 bits; portable across standard libraries.
double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace

std::vector<ComparisonRecord> synthesize(const PreferenceTable& table, const SynthOptions& opts) {
  std::mt19937_64 rng(opts.seed);
  const int raters = std::max(1, opts.raters);
  std::vector<ComparisonRecord> out;
  for (std::size_t i = 0; i < table.arms.size(); ++i) {
    for (std::size_t k = i + 1; k < table.arms.size(); ++k) {
      const std::string& a = table.arms[i];
      const std::string& b = table.arms[k];
      auto lookup = [&](const std::string& x, const std::string& y) {
        auto it = table.wins.find({x, y});
        return it == table.wins.end() ? 0.0 : it->second;
      };
      double pa = lookup(a, b), pb = lookup(b, a);
      if (!table.wins.count({a, b}) && !table.wins.count({b, a})) continue;

      // Outcomes from a's perspective.
      std::vector<Verdict> outcomes;
      if (opts.mode == SynthMode::kQuota) {
        int na = static_cast<int>(std::lround(opts.per_pair * pa));
        int nb = std::min(static_cast<int>(std::lround(opts.per_pair * pb)), opts.per_pair - na);
        outcomes.insert(outcomes.end(), na, Verdict::kLeft);
        outcomes.insert(outcomes.end(), nb, Verdict::kRight);
        outcomes.insert(outcomes.end(), opts.per_pair - na - nb, Verdict::kNeutral);
        for (std::size_t n = outcomes.size(); n > 1; --n) {
          std::size_t m = static_cast<std::size_t>(unit(rng) * static_cast<double>(n));
          std::swap(outcomes[n - 1], outcomes[m]);
        }
      } else {
        for (int n = 0; n < opts.per_pair; ++n) {
          double u = unit(rng);
          outcomes.push_back(u < pa ? Verdict::kLeft : u < pa + pb ? Verdict::kRight : Verdict::kNeutral);
        }
      }
      for (std::size_t n = 0; n < outcomes.size(); ++n) {
        ComparisonRecord r;
        r.study = table.study;
        r.prompt_id = "p" + std::to_string(n / static_cast<std::size_t>(raters));
        r.rater = "r" + std::to_string(n % static_cast<std::size_t>(raters));
        r.left = a;
        r.right = b;
        r.verdict = outcomes[n];
        // Random screen side.
        if (rng() & 1) r = r.mirrored();
        out.push_back(std::move(r));
      }
    }
  }
  return out;
}

ReportBundle build_report(const Dataset& ds, std::optional<ErrorStats> errors,
                          std::map<std::string, std::string> labels) {
  ReportBundle b;
  b.errors = std::move(errors);
  b.labels = std::move(labels);
  for (const auto& study : ds.studies()) {
    Dataset part = ds.only_study(study);
    StudyReport s;
    s.study = study;
    s.wins = win_matrix(part.records());
    try {
      s.elo = solve_elo(part.records());
    } catch (const DisconnectedGraph& e) {
      s.elo_error = e.what();
    }
    b.studies.push_back(std::move(s));
  }
  return b;
}

namespace {

std::string label_of(const ReportBundle& b, const std::string& arm) {
  auto it = b.labels.find(arm);
  return it == b.labels.end() ? arm : it->second;
}

std::string pad(std::string s, std::size_t w) {
  if (s.size() < w) s.append(w - s.size(), ' ');
  return s;
}

std::string fmt(const char* f, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

}  // namespace

std::string render_text(const ReportBundle& b) {
  std::string out;
  if (b.studies.empty()) out += "Preferences: no data\n";
  for (const auto& s : b.studies) {
    std::size_t w = 6;
    for (const auto& a : s.wins.arms) w = std::max(w, label_of(b, a).size() + 2);
    out += "== " + s.study + " ==\n\n";
    out += pad("Arm", w) + "ELO Score\n";
    if (s.elo) {
      for (const auto& arm : s.elo->order()) {
        out += pad(label_of(b, arm), w) + fmt("%.1f", s.elo->ratings.at(arm)) + "\n";
      }
    } else {
      out += "(" + s.elo_error + ")\n";
    }
    out += "\nPairwise wins (row preferred over column)\n" + pad("", w);
    for (const auto& col : s.wins.arms) out += pad(label_of(b, col), w);
    out += "\n";
    for (const auto& row : s.wins.arms) {
      out += pad(label_of(b, row), w);
      for (const auto& col : s.wins.arms) {
        auto v = s.wins.wins(row, col);
        out += pad(v ? fmt("%.1f%%", *v * 100.0) : "-", w);
      }
      out += "\n";
    }
    out += "\n";
  }
  out += "Output errors\n";
  if (!b.errors || b.errors->arms.empty()) {
    out += "no data\n";
  } else {
    std::size_t w = 6;
    for (const auto& [a, _] : b.errors->arms) w = std::max(w, label_of(b, a).size() + 2);
    out += pad("Arm", w) + pad("Runs", 8) + "Output Errors\n";
    for (const auto& [arm, e] : b.errors->arms) {
      out += pad(label_of(b, arm), w) + pad(std::to_string(e.n_runs), 8) +
             fmt("%.0f%%", e.rate * 100.0) + "\n";
    }
  }
  return out;
}

void write_report(const ReportBundle& b, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  Json elo = Json::object(), wins = Json::object();
  for (const auto& s : b.studies) {
    elo[s.study] = s.elo ? to_json(*s.elo) : Json{{"error", s.elo_error}};
    wins[s.study] = to_json(s.wins);
  }
  auto wrap = [](Json body) {
    if (body.empty()) return Json{{"status", "no data"}};
    return Json{{"status", "ok"}, {"studies", std::move(body)}};
  };
  write_file_atomic(dir / "elo.json", wrap(std::move(elo)).dump(2) + "\n");
  write_file_atomic(dir / "wins.json", wrap(std::move(wins)).dump(2) + "\n");
  Json errors = b.errors && !b.errors->arms.empty()
                    ? Json{{"status", "ok"}, {"arms", to_json(*b.errors)}}
                    : Json{{"status", "no data"}};
  write_file_atomic(dir / "errors.json", errors.dump(2) + "\n");
  write_file_atomic(dir / "report.txt", render_text(b));
}

}  // namespace genui::arena
