#include "genui/arena/records.h"

#include <fstream>

#include "genui/util/strings.h"

namespace genui::arena {

using Json = nlohmann::json;

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::kLeft: return "left";
    case Verdict::kNeutral: return "neutral";
    case Verdict::kRight: return "right";
  }
  return "neutral";
}

std::optional<Verdict> verdict_from_string(std::string_view s) {
  if (s == "left") return Verdict::kLeft;
  if (s == "neutral") return Verdict::kNeutral;
  if (s == "right") return Verdict::kRight;
  return std::nullopt;
}

ComparisonRecord ComparisonRecord::mirrored() const {
  ComparisonRecord m = *this;
  std::swap(m.left, m.right);
  if (verdict == Verdict::kLeft) m.verdict = Verdict::kRight;
  else if (verdict == Verdict::kRight) m.verdict = Verdict::kLeft;
  return m;
}

Json to_json(const ComparisonRecord& r) {
  return Json{{"study", r.study}, {"prompt_id", r.prompt_id}, {"left", r.left},
              {"right", r.right}, {"rater", r.rater},         {"verdict", to_string(r.verdict)}};
}

namespace {

std::string prefix(std::size_t line) {
  return line ? "line " + std::to_string(line) + ": " : std::string();
}

std::string field(const Json& j, const char* name, std::size_t line) {
  auto it = j.find(name);
  if (it == j.end()) throw MalformedRecord(line, std::string("missing field ") + name);
  if (!it->is_string()) throw MalformedRecord(line, std::string("field ") + name + " must be a string");
  std::string v = it->get<std::string>();
  if (is_blank(v)) throw MalformedRecord(line, std::string("field ") + name + " is empty");
  return v;
}

}  // namespace

MalformedRecord::MalformedRecord(std::size_t line, const std::string& what)
    : std::invalid_argument(prefix(line) + what), line_(line) {}

ConflictingDuplicate::ConflictingDuplicate(std::size_t line, const std::string& what)
    : std::runtime_error(prefix(line) + what), line_(line) {}

ComparisonRecord record_from_json(const Json& j, std::size_t line) {
  if (!j.is_object()) throw MalformedRecord(line, "record must be a JSON object");
  ComparisonRecord r;
  r.study = field(j, "study", line);
  r.prompt_id = field(j, "prompt_id", line);
  r.left = field(j, "left", line);
  r.right = field(j, "right", line);
  r.rater = field(j, "rater", line);
  std::string verdict = field(j, "verdict", line);
  auto v = verdict_from_string(verdict);
  if (!v) throw MalformedRecord(line, "unknown verdict \"" + verdict + "\"");
  r.verdict = *v;
  if (r.left == r.right) throw MalformedRecord(line, "left and right are the same arm");
  return r;
}

Dataset::Key Dataset::key_of(const ComparisonRecord& r) {
  const auto& [a, b] = r.left < r.right ? std::tie(r.left, r.right) : std::tie(r.right, r.left);
  return {r.study, r.prompt_id, a, b, r.rater};
}

bool Dataset::contains_key(const ComparisonRecord& r) const { return keys_.count(key_of(r)) != 0; }

void Dataset::add(ComparisonRecord r, std::size_t line) {
  if (!keys_.insert(key_of(r)).second) {
    throw ConflictingDuplicate(line, "rater " + r.rater + " already rated " + r.left + " vs " +
                                         r.right + " on prompt " + r.prompt_id);
  }
  records_.push_back(std::move(r));
}

std::vector<std::string> Dataset::arms() const {
  std::set<std::string> s;
  for (const auto& r : records_) {
    s.insert(r.left);
    s.insert(r.right);
  }
  return {s.begin(), s.end()};
}

std::vector<std::string> Dataset::studies() const {
  std::set<std::string> s;
  for (const auto& r : records_) s.insert(r.study);
  return {s.begin(), s.end()};
}

Dataset Dataset::only_study(std::string_view study) const {
  Dataset out;
  for (const auto& r : records_) {
    if (r.study == study) out.add(r);
  }
  return out;
}

Dataset ingest(std::istream& in) {
  Dataset ds;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (is_blank(line)) continue;
    Json j = Json::parse(line, nullptr, false);
    if (j.is_discarded()) throw MalformedRecord(n, "not valid JSON");
    ds.add(record_from_json(j, n), n);
  }
  return ds;
}

Dataset ingest_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return ingest(in);
}

}  // namespace genui::arena
