#include "genui/serve/store.h"

#include <chrono>
#include <fstream>

#include "genui/prompt/forge.h"
#include "genui/util/files.h"
#include "genui/util/strings.h"

namespace genui::serve {

using Json = nlohmann::json;
namespace fs = std::filesystem;

bool is_valid_id(std::string_view id) {
  if (id.empty() || id.size() > 64) return false;
  for (char c : id) {
    bool ok = (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '-' || c == '_';
    if (!ok) return false;
  }
  return true;
}

std::string new_id() { return random_token(9); }

std::string now_rfc3339() {
  auto now = std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now());
  return prompt::format_rfc3339(now, std::chrono::minutes(0));
}

namespace {

Json error_json(const ClientError& e) {
  return Json{{"message", e.message}, {"source", e.source}, {"line", e.line}, {"at", e.at}};
}

ClientError error_from_json(const Json& j) {
  return {j.value("message", ""), j.value("source", ""), j.value("line", 0), j.value("at", "")};
}

Json meta_json(const PageArtifact& a) {
  Json m{{"id", a.id},
         {"session", a.session},
         {"prompt", a.prompt},
         {"style", a.style},
         {"profile", a.profile},
         {"backend", a.backend},
         {"arm", a.arm},
         {"created", a.created},
         {"ready", a.ready()},
         {"extracted",
          {{"status", extract::to_string(a.extracted.status)},
           {"error_kind", a.extracted.error_kind ? Json(extract::to_string(*a.extracted.error_kind))
                                                 : Json()}}},
         {"timings",
          {{"generate_ms", a.timings.generate_ms}, {"postprocess_ms", a.timings.postprocess_ms}}}};
  if (a.failure) {
    m["failure"] = Json{{"kind", a.failure->kind},
                        {"error_kind", a.failure->error_kind},
                        {"detail", a.failure->detail}};
  }
  return m;
}

std::size_t read_count(const fs::path& p, std::size_t fallback) {
  std::ifstream in(p);
  std::size_t n = 0;
  return in >> n ? n : fallback;
}

}  // namespace

PageStore::PageStore(fs::path dir, std::size_t max_client_errors)
    : dir_(std::move(dir)), cap_(max_client_errors) {
  fs::create_directories(dir_ / "pages");
  std::ifstream in(dir_ / "index.jsonl");
  std::string line;
  while (std::getline(in, line)) {
    Json j = Json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.contains("id")) continue;
    std::string id = j.at("id").get<std::string>();
    if (!is_valid_id(id) || slots_.count(id) || !fs::exists(dir_ / "pages" / id / "meta.json")) {
      continue;
    }
    slots_[id] = nullptr;  // loaded on first access
    order_.push_back(id);
  }
}

std::shared_ptr<PageStore::Slot> PageStore::load(const std::string& id) const {
  fs::path p = dir_ / "pages" / id;
  Json m = Json::parse(read_file(p / "meta.json"));
  auto a = std::make_shared<PageArtifact>();
  a->id = m.at("id").get<std::string>();
  a->session = m.value("session", "");
  a->prompt = m.value("prompt", "");
  a->style = m.value("style", "");
  a->profile = m.value("profile", "");
  a->backend = m.value("backend", "");
  a->arm = m.value("arm", a->backend);
  a->created = m.value("created", "");
  a->raw_output = read_file(p / "raw.txt");
  a->extracted = extract::extract(a->raw_output);
  if (m.value("ready", false)) {
    a->final_html = read_file(p / "final.html");
    a->report = post::report_from_json(Json::parse(read_file(p / "report.json")));
  }
  if (m.contains("failure")) {
    const Json& f = m.at("failure");
    a->failure = Failure{f.value("kind", ""), f.value("error_kind", ""), f.value("detail", "")};
  }
  if (m.contains("timings")) {
    a->timings.generate_ms = m["timings"].value("generate_ms", std::int64_t{0});
    a->timings.postprocess_ms = m["timings"].value("postprocess_ms", std::int64_t{0});
  }
  auto s = std::make_shared<Slot>();
  s->artifact = std::move(a);
  std::ifstream in(p / "errors.jsonl");
  std::string line;
  while (std::getline(in, line)) {
    Json j = Json::parse(line, nullptr, false);
    if (!j.is_discarded()) s->errors.push_back(error_from_json(j));
  }
  s->total = read_count(p / "errors.count", s->errors.size());
  return s;
}

std::shared_ptr<PageStore::Slot> PageStore::slot(const std::string& id) const {
  {
    std::shared_lock lock(mu_);
    auto it = slots_.find(id);
    if (it == slots_.end()) throw UnknownPage(id);
    if (it->second) return it->second;
  }
  auto loaded = load(id);
  std::unique_lock lock(mu_);
  auto& s = slots_[id];
  if (!s) s = std::move(loaded);
  return s;
}

void PageStore::save(const PageArtifact& a) {
  if (!is_valid_id(a.id)) throw std::invalid_argument("invalid page id: " + a.id);
  std::unique_lock lock(mu_);
  if (slots_.count(a.id)) throw std::invalid_argument("page id already stored: " + a.id);
  fs::path tmp = dir_ / "pages" / (".tmp-" + a.id);
  fs::remove_all(tmp);
  fs::create_directories(tmp);
  write_file_atomic(tmp / "raw.txt", a.raw_output);
  if (a.final_html) write_file_atomic(tmp / "final.html", *a.final_html);
  if (a.report) write_file_atomic(tmp / "report.json", post::to_json(*a.report).dump(2) + "\n");
  write_file_atomic(tmp / "errors.jsonl", "");
  write_file_atomic(tmp / "meta.json", meta_json(a).dump(2) + "\n");
  fs::rename(tmp, dir_ / "pages" / a.id);
  append_line(dir_ / "index.jsonl",
              Json{{"id", a.id}, {"session", a.session}, {"created", a.created}, {"ready", a.ready()}}
                  .dump());
  auto s = std::make_shared<Slot>();
  s->artifact = std::make_shared<const PageArtifact>(a);
  slots_[a.id] = std::move(s);
  order_.push_back(a.id);
}

std::shared_ptr<const PageArtifact> PageStore::get(const std::string& id) const {
  return slot(id)->artifact;
}

bool PageStore::contains(const std::string& id) const {
  std::shared_lock lock(mu_);
  return slots_.count(id) != 0;
}

std::vector<std::string> PageStore::ids() const {
  std::shared_lock lock(mu_);
  return order_;
}

void PageStore::record_client_error(const std::string& id, ClientError e) {
  auto s = slot(id);
  if (e.at.empty()) e.at = now_rfc3339();
  std::lock_guard lock(s->mu);
  ++s->total;
  fs::path p = dir_ / "pages" / id;
  if (s->errors.size() < cap_) {
    append_line(p / "errors.jsonl", error_json(e).dump());
    s->errors.push_back(std::move(e));
  }
  write_file_atomic(p / "errors.count", std::to_string(s->total) + "\n");
}

std::vector<ClientError> PageStore::client_errors(const std::string& id) const {
  auto s = slot(id);
  std::lock_guard lock(s->mu);
  return s->errors;
}

std::size_t PageStore::client_error_total(const std::string& id) const {
  auto s = slot(id);
  std::lock_guard lock(s->mu);
  return s->total;
}

Json PageStore::artifact_json(const std::string& id) const {
  auto s = slot(id);
  const PageArtifact& a = *s->artifact;
  Json j = meta_json(a);
  j["raw_output"] = a.raw_output;
  j["extracted"]["html"] = a.extracted.html;
  j["final_html"] = a.final_html ? Json(*a.final_html) : Json();
  j["report"] = a.report ? post::to_json(*a.report) : Json();
  std::lock_guard lock(s->mu);
  Json errs = Json::array();
  for (const auto& e : s->errors) errs.push_back(error_json(e));
  j["client_errors"] = std::move(errs);
  j["client_error_total"] = s->total;
  return j;
}

}  // namespace genui::serve
