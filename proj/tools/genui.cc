// genui: serve, generate, extract, postprocess and evaluate from the shell.

#include <CLI11.hpp>
#include <json.hpp>

#include <csignal>
#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>

#include "genui/arena/rating.h"
#include "genui/arena/study.h"
#include "genui/extract/extractor.h"
#include "genui/gateway/transcript.h"
#include "genui/post/chain.h"
#include "genui/serve/http.h"
#include "genui/serve/service.h"
#include "genui/util/files.h"

using namespace genui;
using Json = nlohmann::json;

namespace {

std::string read_input(const std::string& path, bool transcript = false) {
  std::string text =
      path == "-" ? std::string(std::istreambuf_iterator<char>(std::cin), std::istreambuf_iterator<char>())
                  : read_file(path);
  if (transcript) return gateway::transcript_output(gateway::parse_transcript(text));
  return text;
}

post::ChainConfig chain_config(const std::string& path) {
  if (path.empty()) return post::ChainConfig::defaults();
  return post::ChainConfig::from_json(Json::parse(read_file(path)));
}

serve::ServeConfig serve_config(const std::string& path) {
  if (path.empty()) return serve::ServeConfig::load(std::nullopt);
  return serve::ServeConfig::load(std::filesystem::path(path));
}

Json page_json(const extract::ExtractedPage& p) {
  Json j = {{"status", extract::to_string(p.status)},
            {"output_error", extract::is_output_error(p)},
            {"leading_noise", p.leading_noise},
            {"trailing_noise", p.trailing_noise}};
  if (p.error_kind) j["error_kind"] = extract::to_string(*p.error_kind);
  return j;
}

serve::HttpServer* g_server = nullptr;

void on_signal(int) {
  if (g_server) g_server->stop();
}

int cmd_serve(const std::string& config, const std::string& host, int port) {
  auto cfg = serve_config(config);
  if (!host.empty()) cfg.host = host;
  if (port >= 0) cfg.port = port;
  serve::GenUiService svc(cfg);
  serve::HttpServer server(svc);
  int bound = server.bind(cfg.host, cfg.port);
  if (bound < 0) {
    std::cerr << "cannot bind " << cfg.host << ":" << cfg.port << "\n";
    return 1;
  }
  std::cerr << "listening on http://" << cfg.host << ":" << bound << "\n";
  g_server = &server;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  server.serve();
  g_server = nullptr;
  return 0;
}

int cmd_generate(const std::string& config, const serve::GenerateRequest& req,
                 const std::string& out, bool events) {
  serve::GenUiService svc(serve_config(config));
  auto handle = svc.start_generation(req);
  auto run = svc.run(handle.run_id);
  std::uint64_t next = 0;
  Json terminal;
  while (true) {
    auto batch = run->wait_events(next, std::chrono::milliseconds(500));
    for (const auto& e : batch) {
      if (events) std::cerr << e.to_json().dump() << "\n";
      next = e.seq + 1;
      if (e.kind == "swap" || e.kind == "failure") terminal = e.to_json();
    }
    if (!terminal.is_null()) break;
    if (batch.empty() && run->finished()) break;
  }
  if (terminal.is_null() || terminal.at("kind") == "failure") {
    std::cerr << "generation failed: " << terminal.dump() << "\n";
    return 1;
  }
  std::string id = terminal.at("payload").at("page_id");
  std::cout << id << "\n";
  if (!out.empty()) write_file_atomic(out, *svc.store().get(id)->final_html);
  return 0;
}

int cmd_extract(const std::string& input, bool transcript, bool html_only) {
  auto page = extract::extract(read_input(input, transcript));
  if (html_only) {
    if (extract::is_output_error(page)) {
      std::cerr << "output error: " << extract::to_string(*page.error_kind) << "\n";
      return 1;
    }
    std::cout << page.html;
    return 0;
  }
  std::cout << page_json(page).dump(2) << "\n";
  return extract::is_output_error(page) ? 1 : 0;
}

int cmd_postprocess(const std::string& input, bool transcript, const std::string& chain,
                    const std::string& report, bool is_html) {
  auto cfg = chain_config(chain);
  std::string text = read_input(input, transcript);
  post::ChainResult result;
  if (is_html) {
    result = post::run_chain_html(text, cfg);
  } else {
    auto page = extract::extract(text);
    if (extract::is_output_error(page)) {
      std::cerr << "output error: " << extract::to_string(*page.error_kind) << "\n";
      return 1;
    }
    result = post::run_chain(page, cfg);
  }
  std::cout << result.html;
  std::string rep = post::to_json(result.report).dump(2) + "\n";
  if (report == "-") {
    std::cerr << rep;
  } else if (!report.empty()) {
    write_file_atomic(report, rep);
  }
  return 0;
}

int cmd_replay(const std::string& store_dir, const std::string& chain,
               std::vector<std::string> ids) {
  serve::PageStore store(store_dir);
  auto cfg = chain_config(chain);
  if (ids.empty()) ids = store.ids();
  int mismatches = 0;
  for (const auto& id : ids) {
    auto a = store.get(id);
    if (!a->ready()) {
      std::cout << id << " skipped (no final html)\n";
      continue;
    }
    auto again = post::run_chain(extract::extract(a->raw_output), cfg);
    bool same = again.html == *a->final_html;
    if (!same) ++mismatches;
    std::cout << id << (same ? " reproduced" : " differs") << "\n";
  }
  return mismatches == 0 ? 0 : 1;
}

int cmd_eval_ingest(const std::vector<std::string>& inputs, const std::string& out) {
  std::ostringstream merged;
  arena::Dataset all;
  for (const auto& f : inputs) {
    auto ds = arena::ingest_file(f);
    for (const auto& r : ds.records()) all.add(r);
  }
  for (const auto& r : all.records()) merged << arena::to_json(r).dump() << "\n";
  if (out.empty()) {
    std::cout << merged.str();
  } else {
    write_file_atomic(out, merged.str());
  }
  std::cerr << all.size() << " records, studies:";
  for (const auto& s : all.studies()) std::cerr << " " << s;
  std::cerr << "\n";
  return 0;
}

int cmd_eval_synth(const std::string& table, int per_pair, std::uint64_t seed, bool sample,
                   const std::string& out) {
  auto t = arena::PreferenceTable::from_json(Json::parse(read_file(table)));
  arena::SynthOptions opts;
  opts.per_pair = per_pair;
  opts.seed = seed;
  opts.mode = sample ? arena::SynthMode::kSample : arena::SynthMode::kQuota;
  std::ostringstream lines;
  for (const auto& r : arena::synthesize(t, opts)) lines << arena::to_json(r).dump() << "\n";
  if (out.empty()) {
    std::cout << lines.str();
  } else {
    write_file_atomic(out, lines.str());
  }
  return 0;
}

int cmd_eval_report(const std::vector<std::string>& records, const std::string& store_dir,
                    const std::vector<std::string>& label_tables, const std::string& out) {
  arena::Dataset ds;
  for (const auto& f : records) {
    auto part = arena::ingest_file(f);
    for (const auto& r : part.records()) ds.add(r);
  }
  std::optional<arena::ErrorStats> errors;
  if (!store_dir.empty()) {
    serve::PageStore store(store_dir);
    std::vector<arena::LabeledPage> pages;
    std::map<std::string, std::string> arms;
    for (const auto& id : store.ids()) {
      auto a = store.get(id);
      pages.push_back({id, a->extracted});
      arms[id] = a->arm.empty() ? a->backend : a->arm;
    }
    if (!pages.empty()) errors = arena::error_stats(pages, arms);
  }
  std::map<std::string, std::string> labels;
  for (const auto& f : label_tables) {
    auto t = arena::PreferenceTable::from_json(Json::parse(read_file(f)));
    labels.insert(t.labels.begin(), t.labels.end());
  }
  auto bundle = arena::build_report(ds, errors, labels);
  if (!out.empty()) arena::write_report(bundle, out);
  std::cout << arena::render_text(bundle);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Generative UI pipeline: serve, generate, extract, postprocess, evaluate"};
  app.require_subcommand(1);

  std::string config;
  auto* serve = app.add_subcommand("serve", "Run the HTTP server");
  std::string host;
  int port = -1;
  serve->add_option("-c,--config", config, "JSON config file");
  serve->add_option("--host", host, "Bind address");
  serve->add_option("-p,--port", port, "Port (0 picks a free one)");

  auto* gen = app.add_subcommand("generate", "Generate one page and print its id");
  serve::GenerateRequest req;
  std::string gen_out;
  bool gen_events = false;
  std::string style, profile, backend;
  gen->add_option("prompt", req.prompt, "User prompt")->required();
  gen->add_option("-c,--config", config, "JSON config file");
  gen->add_option("--style", style, "Style variant");
  gen->add_option("--profile", profile, "Prompt profile");
  gen->add_option("--backend", backend, "Backend name");
  gen->add_option("-o,--out", gen_out, "Write the final HTML here");
  gen->add_flag("--events", gen_events, "Print run events to stderr");

  auto* ext = app.add_subcommand("extract", "Classify raw model output");
  std::string ext_in = "-";
  bool ext_html = false;
  bool transcript = false;
  ext->add_option("input", ext_in, "Raw output file, or - for stdin");
  ext->add_flag("--html", ext_html, "Print only the extracted HTML");
  ext->add_flag("-t,--transcript", transcript, "Input is a transcript file");

  auto* post_cmd = app.add_subcommand("postprocess", "Run the repair chain and print the HTML");
  std::string post_in = "-", chain, report;
  bool post_html = false;
  post_cmd->add_option("input", post_in, "Raw output file, or - for stdin");
  post_cmd->add_option("--chain", chain, "Chain config JSON");
  post_cmd->add_option("--report", report, "Write the post report here (- for stderr)");
  post_cmd->add_flag("--html-input", post_html, "Input is an HTML document, not raw output");
  post_cmd->add_flag("-t,--transcript", transcript, "Input is a transcript file");

  auto* replay = app.add_subcommand("replay", "Re-run extraction and the chain on stored pages");
  std::string store_dir;
  std::vector<std::string> replay_ids;
  replay->add_option("--store", store_dir, "Page store directory")->required();
  replay->add_option("--chain", chain, "Chain config JSON");
  replay->add_option("ids", replay_ids, "Page ids (default: all)");

  auto* eval = app.add_subcommand("eval", "Pairwise preference evaluation");
  eval->require_subcommand(1);

  auto* ingest = eval->add_subcommand("ingest", "Validate and merge comparison records");
  std::vector<std::string> inputs;
  std::string eval_out;
  ingest->add_option("records", inputs, "JSONL record files")->required();
  ingest->add_option("-o,--out", eval_out, "Merged JSONL output");

  auto* synth = eval->add_subcommand("synth", "Synthesize verdicts from a preference table");
  std::string table;
  int per_pair = 500;
  std::uint64_t seed = 7;
  bool sample = false;
  synth->add_option("table", table, "Preference table JSON")->required();
  synth->add_option("-n,--per-pair", per_pair, "Verdicts per arm pair");
  synth->add_option("--seed", seed, "RNG seed");
  synth->add_flag("--sample", sample, "Independent draws instead of exact quotas");
  synth->add_option("-o,--out", eval_out, "JSONL output");

  auto* rep = eval->add_subcommand("report", "ELO ratings, win matrices and error rates");
  std::vector<std::string> labels;
  rep->add_option("records", inputs, "JSONL record files");
  rep->add_option("--store", store_dir, "Page store for output error rates");
  rep->add_option("--labels", labels, "Preference tables providing display labels");
  rep->add_option("-o,--out", eval_out, "Report directory");

  CLI11_PARSE(app, argc, argv);

  if (!style.empty()) req.style = style;
  if (!profile.empty()) req.profile = profile;
  if (!backend.empty()) req.backend = backend;

  try {
    if (*serve) return cmd_serve(config, host, port);
    if (*gen) return cmd_generate(config, req, gen_out, gen_events);
    if (*ext) return cmd_extract(ext_in, transcript, ext_html);
    if (*post_cmd) return cmd_postprocess(post_in, transcript, chain, report, post_html);
    if (*replay) return cmd_replay(store_dir, chain, replay_ids);
    if (*ingest) return cmd_eval_ingest(inputs, eval_out);
    if (*synth) return cmd_eval_synth(table, per_pair, seed, sample, eval_out);
    if (*rep) return cmd_eval_report(inputs, store_dir, labels, eval_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
