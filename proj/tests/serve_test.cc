#include <gtest/gtest.h>
#include <httplib.h>

#include <atomic>
#include <regex>
#include <thread>

#include "genui/asset/grammar.h"
#include "genui/html/dom.h"
#include "genui/serve/http.h"
#include "genui/serve/service.h"
#include "genui/util/strings.h"
#include "serve_support.h"

using namespace genui;
using namespace genui::serve;
using genui::testing::fresh_dir;
using genui::testing::kFractalsPrompt;
using genui::testing::kSingaporePrompt;
using genui::testing::test_serve_config;
using Json = nlohmann::json;

namespace {

std::string previews(const std::vector<RunEvent>& events) {
  std::string out;
  for (const auto& e : events) {
    if (e.kind == "preview") out += e.payload.at("html").get<std::string>();
  }
  return out;
}

std::vector<std::string> phases(const std::vector<RunEvent>& events) {
  std::vector<std::string> out;
  for (const auto& e : events) {
    if (e.kind == "phase") out.push_back(e.payload.at("phase").get<std::string>());
  }
  return out;
}

std::string swap_page(const std::vector<RunEvent>& events) {
  for (const auto& e : events) {
    if (e.kind == "swap") return e.payload.at("page_id").get<std::string>();
  }
  return {};
}

std::vector<RunEvent> run_to_end(GenUiService& svc, const RunHandle& h) {
  auto run = svc.run(h.run_id);
  run->wait();
  return run->events();
}

std::size_t count_of(const std::string& hay, const std::string& needle) {
  std::size_t n = 0;
  for (auto at = hay.find(needle); at != std::string::npos; at = hay.find(needle, at + 1)) ++n;
  return n;
}

}  // namespace

TEST(ServeConfigTest, EnvOverridesFile) {
  auto cfg = ServeConfig::from_json(Json{{"port", 9000}, {"caps", {{"client_errors", 50}}}});
  EXPECT_EQ(cfg.port, 9000);
  EXPECT_EQ(cfg.max_client_errors, 50u);
  std::map<std::string, std::string> env{{"GENUI_PORT", "9100"}, {"GENUI_STORE", "/tmp/x"},
                                         {"GENUI_MAX_CLIENT_ERRORS", "7"}};
  cfg.apply_env([&](const std::string& k) -> std::optional<std::string> {
    auto it = env.find(k);
    if (it == env.end()) return std::nullopt;
    return it->second;
  });
  EXPECT_EQ(cfg.port, 9100);
  EXPECT_EQ(cfg.store_dir, "/tmp/x");
  EXPECT_EQ(cfg.max_client_errors, 7u);
  env = {{"GENUI_PORT", "80a"}};
  EXPECT_THROW(cfg.apply_env([&](const std::string& k) -> std::optional<std::string> {
    auto it = env.find(k);
    if (it == env.end()) return std::nullopt;
    return it->second;
  }),
               std::invalid_argument);
}

TEST(ServeConfigTest, RejectsInlineCredentials) {
  Json j = {{"images", {{"gen", {{"name", "x"}, {"endpoint", "http://h"}, {"key", "secret"}}}}}};
  EXPECT_THROW(ServeConfig::from_json(j), std::invalid_argument);
  Json b = {{"backends",
             {{{"name", "e"}, {"kind", "external"}, {"params", {{"endpoint", "http://h"}, {"api_key", "s"}}}}}}};
  EXPECT_ANY_THROW(ServeConfig::from_json(b));
}

TEST(RunTest, PhasesAreStrictlyMonotone) {
  serve::Run run("r", "s");
  run.set_phase(Phase::kQueued);
  run.set_phase(Phase::kGenerating);
  EXPECT_THROW(run.set_phase(Phase::kGenerating), std::logic_error);
  EXPECT_THROW(run.set_phase(Phase::kQueued), std::logic_error);
  run.set_phase(Phase::kFailed);
  EXPECT_THROW(run.set_phase(Phase::kReady), std::logic_error);
  run.emit("failure", Json::object());
  EXPECT_TRUE(run.finished());
  EXPECT_THROW(run.emit("preview", Json::object()), std::logic_error);
  auto events = run.events();
  for (std::size_t i = 0; i < events.size(); ++i) EXPECT_EQ(events[i].seq, i);
}

TEST(PageStoreTest, SaveReloadAndCapClientErrors) {
  auto dir = fresh_dir("store");
  PageArtifact a;
  a.id = "page1";
  a.session = "s1";
  a.raw_output = "```html\n<!DOCTYPE html><html><body>x</body></html>\n```";
  a.extracted = extract::extract(a.raw_output);
  a.final_html = "<!DOCTYPE html><html><body>x</body></html>";
  a.report = post::PostReport{};
  {
    PageStore store(dir, 200);
    store.save(a);
    EXPECT_THROW(store.save(a), std::invalid_argument);
    for (int i = 0; i < 1000; ++i) store.record_client_error("page1", {"boom " + std::to_string(i), "x.js", i, ""});
    EXPECT_EQ(store.client_errors("page1").size(), 200u);
    EXPECT_EQ(store.client_error_total("page1"), 1000u);
    EXPECT_THROW(store.record_client_error("nope", {}), UnknownPage);
  }
  PageStore again(dir, 200);
  auto loaded = again.get("page1");
  EXPECT_EQ(loaded->raw_output, a.raw_output);
  EXPECT_EQ(*loaded->final_html, *a.final_html);
  EXPECT_EQ(loaded->extracted, a.extracted);
  EXPECT_EQ(again.client_errors("page1").size(), 200u);
  EXPECT_EQ(again.client_errors("page1")[0].message, "boom 0");
  EXPECT_EQ(again.client_error_total("page1"), 1000u);
  EXPECT_EQ(again.ids(), std::vector<std::string>{"page1"});
  std::filesystem::remove_all(dir);
}

TEST(PageStoreTest, ConcurrentClientErrorsAllCounted) {
  auto dir = fresh_dir("store_mt");
  PageStore store(dir, 50);
  PageArtifact a;
  a.id = "p";
  a.extracted = extract::extract("");
  store.save(a);
  std::vector<std::thread> threads;
  for (int t = 0; t < 8; ++t) {
    threads.emplace_back([&] {
      for (int i = 0; i < 25; ++i) store.record_client_error("p", {"m", "", 0, ""});
    });
  }
  for (auto& t : threads) t.join();
  EXPECT_EQ(store.client_error_total("p"), 200u);
  EXPECT_EQ(store.client_errors("p").size(), 50u);
  std::filesystem::remove_all(dir);
}

class ServiceTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fresh_dir("svc");
    svc_ = std::make_unique<GenUiService>(test_serve_config(dir_));
  }
  void TearDown() override {
    svc_.reset();
    std::filesystem::remove_all(dir_);
  }
  std::filesystem::path dir_;
  std::unique_ptr<GenUiService> svc_;
};

TEST_F(ServiceTest, FractalsFixtureBecomesReadyPage) {
  RunHandle h = svc_->start_generation({kFractalsPrompt});
  auto events = run_to_end(*svc_, h);
  EXPECT_EQ(phases(events), (std::vector<std::string>{"queued", "generating", "extracting",
                                                      "postprocessing", "ready"}));
  EXPECT_EQ(events.back().kind, "swap");
  std::string id = swap_page(events);
  auto page = svc_->store().get(id);
  ASSERT_TRUE(page->final_html);
  EXPECT_EQ(previews(events), page->extracted.html);
  auto doc = html::parse(*page->final_html);
  auto titles = doc.elements("title");
  ASSERT_EQ(titles.size(), 1u);
  EXPECT_EQ(titles[0]->raw_text(), "Fractals: Infinite Detail");
  bool saw_tool = false;
  for (const auto& e : events) saw_tool |= e.kind == "tool_call";
  EXPECT_TRUE(saw_tool);
  Session s = svc_->session(h.session_id);
  EXPECT_EQ(s.pages, std::vector<std::string>{id});
  EXPECT_EQ(s.history.size(), 2u);
  EXPECT_FALSE(s.busy);
}

TEST_F(ServiceTest, SwapServesRepairedPageNotPreview) {
  auto events = run_to_end(*svc_, svc_->start_generation({kSingaporePrompt}));
  auto page = svc_->store().get(swap_page(events));
  std::string preview = previews(events);
  EXPECT_EQ(preview, page->extracted.html);
  EXPECT_NE(*page->final_html, preview);
  EXPECT_NE(preview.find("YOUR_API_KEY"), std::string::npos);
  EXPECT_EQ(page->final_html->find("YOUR_API_KEY"), std::string::npos);
  EXPECT_NE(page->final_html->find("key=K123"), std::string::npos);
  EXPECT_EQ(count_of(*page->final_html, std::string(post::kReporterMarker)), 1u);
  auto doc = html::parse(*page->final_html);
  EXPECT_TRUE(asset::validate_src_grammar(doc).empty());
}

TEST_F(ServiceTest, MalformedOutputFailsAndKeepsArtifact) {
  GenerateRequest req{"anything"};
  req.backend = "malformed";
  auto events = run_to_end(*svc_, svc_->start_generation(req));
  EXPECT_EQ(phases(events).back(), "failed");
  const RunEvent& last = events.back();
  EXPECT_EQ(last.kind, "failure");
  EXPECT_EQ(last.payload["error_kind"], "marker_missing");
  for (const auto& e : events) EXPECT_NE(e.kind, "swap");
  auto page = svc_->store().get(last.payload["page_id"].get<std::string>());
  EXPECT_FALSE(page->final_html);
  EXPECT_NE(page->raw_output.find("Sure! Here is the page"), std::string::npos);
  EXPECT_EQ(page->failure->error_kind, "marker_missing");
}

TEST_F(ServiceTest, BackendDeadlineFailsWithoutSwap) {
  GenerateRequest req{"anything"};
  req.backend = "stalled";
  auto events = run_to_end(*svc_, svc_->start_generation(req));
  EXPECT_EQ(events.back().kind, "failure");
  EXPECT_EQ(events.back().payload["kind"], "backend");
  EXPECT_EQ(swap_page(events), "");
}

TEST_F(ServiceTest, FollowUpsAppendPagesInOrder) {
  RunHandle first = svc_->start_generation({kFractalsPrompt});
  std::string p1 = swap_page(run_to_end(*svc_, first));
  std::string old_html = *svc_->store().get(p1)->final_html;

  RunHandle second = svc_->follow_up(first.session_id, "make the header green");
  EXPECT_EQ(second.session_id, first.session_id);
  std::string p2 = swap_page(run_to_end(*svc_, second));
  ASSERT_FALSE(p2.empty());
  EXPECT_NE(p1, p2);
  auto page2 = svc_->store().get(p2);
  EXPECT_NE(page2->final_html->find("bg-green-700"), std::string::npos);
  EXPECT_NE(page2->final_html->find("<!DOCTYPE html>"), std::string::npos);
  EXPECT_EQ(*svc_->store().get(p1)->final_html, old_html);

  std::string p3 = swap_page(run_to_end(*svc_, svc_->follow_up(first.session_id, "add a footer")));
  Session s = svc_->session(first.session_id);
  EXPECT_EQ(s.pages, (std::vector<std::string>{p1, p2, p3}));
  EXPECT_EQ(s.history.size(), 6u);
}

TEST_F(ServiceTest, FollowUpNeedsReadyPage) {
  GenerateRequest req{"anything"};
  req.backend = "malformed";
  RunHandle h = svc_->start_generation(req);
  run_to_end(*svc_, h);
  EXPECT_THROW(svc_->follow_up(h.session_id, "make it blue"), SessionConflict);
  EXPECT_THROW(svc_->follow_up("missing", "x"), UnknownSession);
}

TEST_F(ServiceTest, BusySessionRejectsSecondRun) {
  GenerateRequest req{kFractalsPrompt};
  req.backend = "slow";
  RunHandle h = svc_->start_generation(req);
  GenerateRequest again{"another"};
  again.session_id = h.session_id;
  EXPECT_THROW(svc_->start_generation(again), SessionConflict);
  run_to_end(*svc_, h);
  EXPECT_NO_THROW(run_to_end(*svc_, svc_->start_generation(again)));
}

TEST_F(ServiceTest, RejectsBadRequests) {
  EXPECT_THROW(svc_->start_generation({"  "}), std::invalid_argument);
  GenerateRequest bad_style{"x"};
  bad_style.style = "nope";
  EXPECT_THROW(svc_->start_generation(bad_style), std::invalid_argument);
  GenerateRequest bad_backend{"x"};
  bad_backend.backend = "nope";
  EXPECT_THROW(svc_->start_generation(bad_backend), std::invalid_argument);
}

TEST_F(ServiceTest, StoredArtifactsReproduce) {
  run_to_end(*svc_, svc_->start_generation({kFractalsPrompt}));
  run_to_end(*svc_, svc_->start_generation({kSingaporePrompt}));
  ASSERT_GE(svc_->store().ids().size(), 2u);
  PageStore reopened(dir_);
  for (const auto& id : reopened.ids()) {
    auto a = reopened.get(id);
    if (!a->final_html) continue;
    auto again = post::run_chain(extract::extract(a->raw_output), svc_->chain_config());
    EXPECT_EQ(again.html, *a->final_html) << id;
  }
}

TEST(RecordLogTest, IdempotencyAndConflicts) {
  auto dir = fresh_dir("records");
  std::filesystem::create_directories(dir);
  RecordLog log(dir / "records.jsonl");
  Json rec = {{"study", "s"}, {"prompt_id", "p"}, {"left", "a"},
              {"right", "b"}, {"rater", "r"},     {"verdict", "neutral"}};
  log.submit(rec, "k1");
  log.submit(rec, "k1");
  EXPECT_EQ(log.size(), 1u);
  EXPECT_THROW(log.submit(rec, "k2"), arena::ConflictingDuplicate);
  Json bad = rec;
  bad["verdict"] = "both";
  EXPECT_THROW(log.submit(bad, ""), arena::MalformedRecord);
  RecordLog reopened(dir / "records.jsonl");
  EXPECT_EQ(reopened.size(), 1u);
  std::filesystem::remove_all(dir);
}

class HttpTest : public ServiceTest {
 protected:
  void SetUp() override {
    ServiceTest::SetUp();
    server_ = std::make_unique<HttpServer>(*svc_);
    port_ = server_->bind("127.0.0.1", 0);
    ASSERT_GT(port_, 0);
    server_->start();
  }
  void TearDown() override {
    server_.reset();
    ServiceTest::TearDown();
  }
  httplib::Client client() {
    httplib::Client c("127.0.0.1", port_);
    c.set_read_timeout(10, 0);
    return c;
  }
  std::unique_ptr<HttpServer> server_;
  int port_ = 0;
};

TEST_F(HttpTest, GenerateStreamAndServe) {
  auto c = client();
  auto res = c.Post("/api/generate", Json{{"prompt", kSingaporePrompt}}.dump(), "application/json");
  ASSERT_TRUE(res);
  ASSERT_EQ(res->status, 202);
  Json h = Json::parse(res->body);
  auto events = c.Get("/api/runs/" + h["run_id"].get<std::string>() + "/events");
  ASSERT_TRUE(events);
  std::vector<Json> lines;
  for (auto l : split(events->body, '\n')) {
    if (!l.empty()) lines.push_back(Json::parse(l));
  }
  ASSERT_FALSE(lines.empty());
  for (std::size_t i = 0; i < lines.size(); ++i) EXPECT_EQ(lines[i]["seq"], i);
  EXPECT_EQ(lines.back()["kind"], "swap");
  std::string id = lines.back()["payload"]["page_id"];

  auto page = c.Get("/page/" + id);
  ASSERT_TRUE(page);
  EXPECT_EQ(page->status, 200);
  EXPECT_EQ(page->get_header_value("X-Frame-Options"), "SAMEORIGIN");
  EXPECT_EQ(page->get_header_value("Content-Security-Policy"), "frame-ancestors 'self'");
  EXPECT_EQ(page->body, *svc_->store().get(id)->final_html);

  auto session = c.Get("/api/sessions/" + h["session_id"].get<std::string>());
  ASSERT_TRUE(session);
  EXPECT_EQ(Json::parse(session->body)["pages"][0], id);

  EXPECT_EQ(c.Get("/page/unknown")->status, 404);
  EXPECT_EQ(c.Get("/api/runs/nope/events")->status, 404);
  EXPECT_EQ(c.Post("/api/generate", "{}", "application/json")->status, 400);
  EXPECT_EQ(c.Post("/api/generate", "nope", "application/json")->status, 400);
}

TEST_F(HttpTest, ClientErrorsAcceptBeaconsWithCors) {
  auto c = client();
  auto events = run_to_end(*svc_, svc_->start_generation({kFractalsPrompt}));
  std::string id = swap_page(events);
  Json body = {{"page_id", id}, {"message", "x is not defined"}, {"source", "inline"}, {"line", 3}};
  auto res = c.Post("/client-errors", body.dump(), "text/plain;charset=UTF-8");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 204);
  EXPECT_EQ(res->get_header_value("Access-Control-Allow-Origin"), "*");
  auto pre = c.Options("/client-errors");
  EXPECT_EQ(pre->status, 204);
  auto art = Json::parse(c.Get("/api/pages/" + id + "/artifact")->body);
  ASSERT_EQ(art["client_errors"].size(), 1u);
  EXPECT_EQ(art["client_errors"][0]["message"], "x is not defined");
  EXPECT_EQ(art["client_errors"][0]["line"], 3);
  EXPECT_FALSE(art["client_errors"][0]["at"].get<std::string>().empty());
  body["page_id"] = "unknownpage";
  EXPECT_EQ(c.Post("/client-errors", body.dump(), "text/plain")->status, 404);
}

TEST_F(HttpTest, RecordsHonorIdempotencyKey) {
  auto c = client();
  Json rec = {{"study", "s"}, {"prompt_id", "p"}, {"left", "a"},
              {"right", "b"}, {"rater", "r"},     {"verdict", "left"}};
  httplib::Headers headers{{"Idempotency-Key", "task-1"}};
  std::atomic<int> created{0}, replayed{0};
  std::vector<std::thread> clicks;
  for (int i = 0; i < 4; ++i) {
    clicks.emplace_back([&] {
      auto cl = client();
      auto r = cl.Post("/api/records", headers, rec.dump(), "application/json");
      if (r && r->status == 201) ++created;
      if (r && r->status == 200) ++replayed;
    });
  }
  for (auto& t : clicks) t.join();
  EXPECT_EQ(created.load(), 1);
  EXPECT_EQ(replayed.load(), 3);
  EXPECT_EQ(svc_->records().size(), 1u);
  rec["verdict"] = "both";
  EXPECT_EQ(c.Post("/api/records", rec.dump(), "application/json")->status, 400);
}

TEST_F(HttpTest, AssetEndpoints) {
  auto c = client();
  auto img = c.Get("/gen?prompt=a+happy+dog&aspect=16:9");
  ASSERT_TRUE(img);
  EXPECT_EQ(img->status, 200);
  EXPECT_EQ(img->get_header_value("Content-Type"), "image/png");
  auto info = asset::sniff_image(img->body);
  ASSERT_TRUE(info);
  EXPECT_EQ(info->width, 512);
  EXPECT_EQ(info->height, 288);
  EXPECT_EQ(c.Get("/gen?prompt=a&aspect=2:1")->status, 400);
  EXPECT_EQ(c.Get("/image?query=")->status, 400);
  EXPECT_EQ(c.Get("/image?query=Albert%20Einstein")->status, 200);
  auto index = c.Get("/");
  ASSERT_TRUE(index);
  EXPECT_EQ(index->status, 200);
}
