// Command-line front end: parse, exec, replay, eval, simulate, stats, serve.
// Results go to stdout; failures print {"error": {...}} to stderr and exit 1
// (2 for usage errors).

#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "dictate/config.hpp"
#include "dictate/dsl/execute.hpp"
#include "dictate/errors.hpp"
#include "dictate/json_codec.hpp"
#include "dictate/server.hpp"
#include "dictate/text.hpp"
#include "dictate/trajectory.hpp"

using namespace dictate;
using nlohmann::json;

namespace {

std::string slurp(const std::string& path) {
  if (path == "-") {
    std::ostringstream ss;
    ss << std::cin.rdbuf();
    return ss.str();
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("io", "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json read_json(const std::string& path) {
  try {
    return json::parse(slurp(path));
  } catch (const json::exception& e) {
    throw SchemaError(path, e.what());
  }
}

// "gold" and "baseline" name the built-in configs; anything else is a file.
Config config_arg(const std::string& arg) {
  if (arg == "gold") return gold_config();
  if (arg == "baseline") return Config{};
  return load_config(arg);
}

// Inline rendering: [-deleted-]{+inserted+}.
std::string render_diff(const DocumentState& before, const DocumentState& after) {
  std::u32string out;
  std::size_t at = 0;
  for (const auto& op : diff(before, after)) {
    if (auto* r = std::get_if<Retain>(&op)) {
      out += before.content.substr(at, r->count);
      at += r->count;
    } else if (auto* d = std::get_if<Delete>(&op)) {
      out += U"[-" + before.content.substr(at, d->count) + U"-]";
      at += d->count;
    } else {
      out += U"{+" + std::get<Insert>(op).text + U"+}";
    }
  }
  return text::to_utf8(out);
}

void print(const json& j) { std::cout << j.dump(2) << "\n"; }

int cmd_parse(const std::string& file, bool as_json) {
  auto program = dsl::parse_program(slurp(file));
  if (as_json) {
    print({{"program", dsl::print_canonical(program)}});
  } else {
    std::cout << dsl::print_canonical(program) << "\n";
  }
  return 0;
}

int cmd_exec(const std::string& program_arg, const std::string& state_file, bool as_json) {
  // A literal program starts with "("; otherwise it names a file.
  auto source = !program_arg.empty() && program_arg.front() == '(' ? program_arg : slurp(program_arg);
  auto program = dsl::parse_program(source);
  DocumentState pre;
  try {
    pre = read_json(state_file).get<DocumentState>();
  } catch (const SchemaError& e) {
    throw SchemaError(state_file + ":" + e.path(), e.detail());
  }
  auto post = dsl::execute(program, pre);
  if (as_json) {
    print({{"program", dsl::print_canonical(program)}, {"pre_state", pre}, {"post_state", post}, {"diff", edit_script_to_json(diff(pre, post))}});
  } else {
    std::cout << post.content_utf8() << "\n"
              << "selection: [" << post.selection.anchor << ", " << post.selection.focus << "]\n"
              << "diff: " << render_diff(pre, post) << "\n";
  }
  return 0;
}

int cmd_replay(const std::string& file) {
  auto t = load_trajectory(file);
  auto report = replay_gold(t);
  json j = {{"trajectory", t.id}, {"segments", t.segments.size()}, {"ok", report.ok()}};
  j["final_state"] = report.states.empty() ? t.initial_state : report.states.back();
  if (report.first_mismatch) j["first_mismatch"] = {{"segment", *report.first_mismatch}, {"reason", report.mismatch}};
  j["audit_failures"] = json::array();
  for (const auto& a : report.audit) j["audit_failures"].push_back({{"segment", a.segment}, {"message", a.message}});
  if (!report.ok()) {
    std::cerr << json{{"error", {{"code", "replay"}, {"message", "trajectory " + t.id + " does not replay"}, {"report", j}}}}.dump(2) << "\n";
    return 1;
  }
  print(j);
  return 0;
}

int cmd_eval(const std::string& corpus_dir, const std::string& config, const std::string& csv, unsigned jobs, bool gold_normalized) {
  auto corpus = load_corpus(corpus_dir);
  EvalOptions opts;
  opts.jobs = jobs;
  opts.gold_normalized = gold_normalized;
  auto report = evaluate(corpus, make_stage_factory(config_arg(config)), opts);
  if (!csv.empty()) {
    std::ofstream out(csv);
    if (!out) throw Error("io", "cannot write " + csv);
    out << to_csv(report);
  }
  auto j = to_json(report);
  j.erase("rows");
  print(j);
  return 0;
}

int cmd_simulate(const std::string& events_file, const std::string& config) {
  auto cfg = config_arg(config);
  if (cfg.needs_trajectory()) throw Error("config", "simulate has no trajectory to draw gold stages from");
  std::istringstream in(slurp(events_file));
  auto events = read_event_log(in);
  Pipeline p(make_stage_factory(cfg)(Trajectory{}), DocumentState{}, cfg.pipeline);
  for (std::size_t i = 0; i < events.size(); ++i) {
    p.on_event(events[i]);
    const auto& st = p.state();
    json line = {{"event", i},
                 {"kind", events[i].is_final() ? "final" : "partial"},
                 {"transcript", p.view().text},
                 {"document", st.visible().content_utf8()},
                 {"commits", st.commits},
                 {"finals_since_commit", st.finals_since_commit},
                 {"segments", json::array()}};
    for (const auto& r : st.records) {
      json s = {{"label", std::string(to_string(r.segment.label))}, {"text", r.segment.text}};
      if (r.normalized) s["normalized"] = *r.normalized;
      if (r.program) s["program"] = dsl::print_canonical(*r.program);
      if (!r.errors.empty()) s["error"] = r.errors.front().stage + ": " + r.errors.front().message;
      line["segments"].push_back(std::move(s));
    }
    std::cout << line.dump() << "\n";
  }
  return 0;
}

int cmd_stats(const std::string& corpus_dir) {
  print(corpus_stats(load_corpus(corpus_dir)));
  return 0;
}

int cmd_serve(const std::string& host, unsigned short port, const std::string& store, const std::string& config, const std::string& prompts) {
  ServiceOptions o;
  o.store = store;
  if (!config.empty()) o.config = config_arg(config);
  if (!prompts.empty()) o.prompts = read_json(prompts);
  Service service(std::move(o));

  // Block the stop signals before any thread starts so only sigwait sees them.
  sigset_t stop_signals;
  sigemptyset(&stop_signals);
  sigaddset(&stop_signals, SIGINT);
  sigaddset(&stop_signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &stop_signals, nullptr);

  Server server(service);
  auto bound = server.start(host, port);
  std::cout << json{{"listening", {{"host", host}, {"port", bound}}}}.dump() << std::endl;
  int sig = 0;
  sigwait(&stop_signals, &sig);
  server.stop();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Interactive dictation engine: programs, trajectories, evaluation and the session server."};
  app.require_subcommand(1);
  bool as_json = false;

  std::string file;
  auto* parse = app.add_subcommand("parse", "Validate a program and print its canonical form");
  parse->add_option("file", file, "Program file, or - for stdin")->required();
  parse->add_flag("--json", as_json, "Print JSON");

  std::string program, state_file;
  auto* exec = app.add_subcommand("exec", "Execute a program on a document state");
  exec->add_option("program", program, "Program text or file")->required();
  exec->add_option("state", state_file, "Document state JSON file")->required();
  exec->add_flag("--json", as_json, "Print JSON");

  auto* replay = app.add_subcommand("replay", "Replay a trajectory with gold stages and audit its programs");
  replay->add_option("trajectory", file, "Trajectory JSON file")->required();

  std::string corpus, config, csv;
  unsigned jobs = 0;
  bool gold_normalized = false;
  auto* eval = app.add_subcommand("eval", "Evaluate stages on a trajectory corpus");
  eval->add_option("corpus", corpus, "Corpus directory")->required();
  eval->add_option("--config", config, "Config file, or gold / baseline")->required();
  eval->add_option("--csv", csv, "Write per-example rows here");
  eval->add_option("--jobs", jobs, "Worker threads (0: all cores)");
  eval->add_flag("--gold-normalized", gold_normalized, "Interpret gold normalizations instead of ASR text");

  auto* simulate = app.add_subcommand("simulate", "Stream an event log through the pipeline");
  simulate->add_option("events", file, "Event log (JSON Lines)")->required();
  simulate->add_option("--config", config, "Config file, or baseline")->required();

  auto* stats = app.add_subcommand("stats", "Count trajectories and ops per task");
  stats->add_option("corpus", corpus, "Corpus directory")->required();

  std::string host = "127.0.0.1", store = "trajectories", prompts;
  unsigned short port = 8080;
  auto* serve = app.add_subcommand("serve", "Run the session server");
  serve->add_option("--port", port, "Port (0 picks one)");
  serve->add_option("--host", host, "Bind address");
  serve->add_option("--store", store, "Trajectory store directory");
  serve->add_option("--config", config, "Stage config for demo sessions");
  serve->add_option("--prompts", prompts, "JSON served at GET /prompts");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << json{{"error", {{"code", "usage"}, {"message", e.what()}}}}.dump(2) << "\n";
    return 2;
  }

  try {
    if (*parse) return cmd_parse(file, as_json);
    if (*exec) return cmd_exec(program, state_file, as_json);
    if (*replay) return cmd_replay(file);
    if (*eval) return cmd_eval(corpus, config, csv, jobs, gold_normalized);
    if (*simulate) return cmd_simulate(file, config);
    if (*stats) return cmd_stats(corpus);
    if (*serve) return cmd_serve(host, port, store, config, prompts);
  } catch (const std::exception& e) {
    std::cerr << error_json(e).dump(2) << "\n";
    return 1;
  }
  return 2;
}
