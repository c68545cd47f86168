#include "dictate/trajectory.hpp"

#include <algorithm>
#include <fstream>
#include <future>
#include <mutex>
#include <sstream>
#include <thread>

#include "dictate/dsl/execute.hpp"
#include "dictate/errors.hpp"
#include "dictate/json_codec.hpp"
#include "dictate/text.hpp"

namespace dictate {

using nlohmann::json;

std::string to_string(Task t) {
  switch (t) {
    case Task::replicate_doc: return "replicate_doc";
    case Task::elaborate_doc: return "elaborate_doc";
    case Task::replicate_op: return "replicate_op";
  }
  return "replicate_doc";
}

Task task_from_string(const std::string& s) {
  if (s == "replicate_doc") return Task::replicate_doc;
  if (s == "elaborate_doc") return Task::elaborate_doc;
  if (s == "replicate_op") return Task::replicate_op;
  throw SchemaError("task", "unknown task '" + s + "'");
}

Transcript Trajectory::final_transcript() const {
  Transcript t;
  for (const auto& e : events) t = ingest(std::move(t), e);
  return t;
}

std::string dictation_insert_text(const LabeledSegment& s) { return (s.begin > 0 ? " " : "") + s.text; }

namespace {

// Decodes j[key] as T, turning any failure into a SchemaError at path/key.
template <class T>
T field(const json& j, const std::string& key, const std::string& path) {
  std::string where = path.empty() ? key : path + "/" + key;
  if (!j.is_object() || !j.contains(key)) throw SchemaError(where, "missing field");
  try {
    return j.at(key).get<T>();
  } catch (const SchemaError& e) {
    throw SchemaError(e.path().empty() ? where : where + "/" + e.path(), e.detail());
  } catch (const Error& e) {
    throw SchemaError(where, e.what());
  } catch (const std::exception& e) {
    throw SchemaError(where, e.what());
  }
}

std::optional<dsl::Program> program_field(const json& j, const std::string& path) {
  if (!j.contains("program") || j["program"].is_null()) return std::nullopt;
  auto src = field<std::string>(j, "program", path);
  try {
    return dsl::parse_program(src);
  } catch (const ParseError& e) {
    throw SchemaError(path + "/program", e.what());
  }
}

json segment_json(const LabeledSegment& s, std::int64_t start_ms) {
  return {{"label", to_string(s.label)}, {"begin", s.begin}, {"end", s.end}, {"start_ms", start_ms}, {"text", s.text}};
}

LabeledSegment segment_from(const json& j, const std::string& path) {
  LabeledSegment s;
  s.label = label_from_string(field<std::string>(j, "label", path));
  s.begin = field<std::size_t>(j, "begin", path);
  s.end = field<std::size_t>(j, "end", path);
  s.text = field<std::string>(j, "text", path);
  return s;
}

}  // namespace

json to_json(const Trajectory& t) {
  json j;
  j["format_version"] = kTrajectoryFormatVersion;
  j["id"] = t.id;
  j["task"] = to_string(t.task);
  j["prompt"] = t.prompt;
  j["initial_state"] = t.initial_state;
  j["events"] = t.events;
  j["key_intervals"] = t.key_intervals;
  j["segments"] = json::array();
  for (const auto& g : t.segments) {
    json s = segment_json(g.segment, g.start_ms);
    if (g.normalized) s["normalized"] = *g.normalized;
    if (g.program) s["program"] = dsl::print_canonical(*g.program);
    s["post_state"] = g.post_state;
    j["segments"].push_back(std::move(s));
  }
  j["partial_versions"] = json::array();
  for (const auto& v : t.partial_versions) {
    json pv = {{"event_index", v.event_index}, {"segments", json::array()}};
    for (const auto& p : v.segments) {
      json s = segment_json(p.segment, p.start_ms);
      if (p.normalized) s["normalized"] = *p.normalized;
      pv["segments"].push_back(std::move(s));
    }
    j["partial_versions"].push_back(std::move(pv));
  }
  return j;
}

Trajectory trajectory_from_json(const json& j) {
  if (!j.is_object()) throw SchemaError("", "trajectory must be a JSON object");
  auto version = field<int>(j, "format_version", "");
  if (version != kTrajectoryFormatVersion) {
    throw SchemaError("format_version", "unsupported version " + std::to_string(version));
  }
  Trajectory t;
  t.id = j.value("id", "");
  t.task = task_from_string(field<std::string>(j, "task", ""));
  t.prompt = j.value("prompt", "");
  t.initial_state = field<DocumentState>(j, "initial_state", "");
  const auto& events = j.at("events");
  if (!events.is_array()) throw SchemaError("events", "expected an array");
  for (std::size_t i = 0; i < events.size(); ++i) {
    try {
      t.events.push_back(events[i].get<AsrEvent>());
    } catch (const SchemaError& e) {
      throw SchemaError("events/" + std::to_string(i) + (e.path().empty() ? "" : "/" + e.path()), e.detail());
    } catch (const std::exception& e) {
      throw SchemaError("events/" + std::to_string(i), e.what());
    }
  }
  t.key_intervals = field<std::vector<KeyInterval>>(j, "key_intervals", "");
  const auto& segs = j.contains("segments") ? j["segments"] : json::array();
  for (std::size_t i = 0; i < segs.size(); ++i) {
    std::string path = "segments/" + std::to_string(i);
    GoldSegment g;
    g.segment = segment_from(segs[i], path);
    g.start_ms = field<std::int64_t>(segs[i], "start_ms", path);
    if (segs[i].contains("normalized") && !segs[i]["normalized"].is_null()) g.normalized = field<std::string>(segs[i], "normalized", path);
    g.program = program_field(segs[i], path);
    g.post_state = field<DocumentState>(segs[i], "post_state", path);
    t.segments.push_back(std::move(g));
  }
  if (j.contains("partial_versions")) {
    const auto& pvs = j["partial_versions"];
    for (std::size_t i = 0; i < pvs.size(); ++i) {
      std::string path = "partial_versions/" + std::to_string(i);
      PartialVersion v;
      v.event_index = field<std::size_t>(pvs[i], "event_index", path);
      const auto& ss = pvs[i].at("segments");
      for (std::size_t k = 0; k < ss.size(); ++k) {
        std::string sp = path + "/segments/" + std::to_string(k);
        PartialSegment p;
        p.segment = segment_from(ss[k], sp);
        p.start_ms = field<std::int64_t>(ss[k], "start_ms", sp);
        if (ss[k].contains("normalized") && !ss[k]["normalized"].is_null()) p.normalized = field<std::string>(ss[k], "normalized", sp);
        v.segments.push_back(std::move(p));
      }
      t.partial_versions.push_back(std::move(v));
    }
  }
  return t;
}

void validate(const Trajectory& t) {
  try {
    t.initial_state.validate();
  } catch (const BoundsError& e) {
    throw SchemaError("initial_state", e.what());
  }
  Transcript tr;
  for (std::size_t i = 0; i < t.events.size(); ++i) {
    try {
      tr = ingest(std::move(tr), t.events[i]);
    } catch (const StaleEventError& e) {
      throw SchemaError("events/" + std::to_string(i), e.what());
    }
  }
  if (tr.live_partial) throw SchemaError("events", "the last utterance never receives a final result");
  for (std::size_t i = 1; i < t.key_intervals.size(); ++i) {
    if (t.key_intervals[i].down_ms < t.key_intervals[i - 1].up_ms) {
      throw SchemaError("key_intervals/" + std::to_string(i), "intervals must be sorted and disjoint");
    }
  }

  const auto view = current_transcript(tr);
  const auto expected = gold_from_keys(view.tokens, t.key_intervals);
  if (expected.size() != t.segments.size()) {
    throw SchemaError("segments", "expected " + std::to_string(expected.size()) + " segments from the key intervals, found " +
                                      std::to_string(t.segments.size()));
  }
  for (std::size_t i = 0; i < t.segments.size(); ++i) {
    const auto& g = t.segments[i];
    const std::string path = "segments/" + std::to_string(i);
    if (!g.segment.same_span(expected[i]) || g.segment.text != expected[i].text) {
      throw SchemaError(path, "does not match the key intervals (expected " + std::string(to_string(expected[i].label)) + " \"" +
                                  expected[i].text + "\")");
    }
    if (g.start_ms != view.tokens[g.segment.begin].start_ms) throw SchemaError(path + "/start_ms", "differs from the first token's start");
    if (g.segment.is_command() && !g.normalized) throw SchemaError(path + "/normalized", "command without a gold normalization");
    if (!g.segment.is_command() && (g.normalized || g.program)) {
      throw SchemaError(path, "dictation segments carry no normalization or program");
    }
    try {
      g.post_state.validate();
    } catch (const BoundsError& e) {
      throw SchemaError(path + "/post_state", e.what());
    }
  }
  for (std::size_t i = 0; i < t.segments.size(); ++i) {
    const auto& g = t.segments[i];
    if (g.segment.is_command()) continue;
    auto want = insert_dictation(t.pre_state(i), text::from_utf8(dictation_insert_text(g.segment)));
    if (want != g.post_state) throw ChainError(i, "dictation post-state does not follow from its pre-state");
  }
}

Trajectory load_trajectory(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError(path.string(), "cannot open");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw SchemaError(path.string(), e.what());
  }
  auto t = trajectory_from_json(j);
  validate(t);
  return t;
}

void save_trajectory(const Trajectory& t, const std::filesystem::path& path) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw SchemaError(path.string(), "cannot write");
    out << to_json(t).dump(2) << '\n';
    if (!out.flush()) throw SchemaError(path.string(), "write failed");
  }
  std::filesystem::rename(tmp, path);
}

std::vector<std::filesystem::path> corpus_files(const std::filesystem::path& root) {
  std::vector<std::filesystem::path> out;
  if (std::filesystem::is_regular_file(root)) return {root};
  for (const auto& entry : std::filesystem::recursive_directory_iterator(root)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<Trajectory> load_corpus(const std::filesystem::path& root) {
  std::vector<Trajectory> out;
  for (const auto& p : corpus_files(root)) {
    try {
      out.push_back(load_trajectory(p));
    } catch (const SchemaError& e) {
      throw SchemaError(p.filename().string() + ":" + e.path(), e.detail());
    }
  }
  return out;
}

DeriveResult derive_partial_golds(const Trajectory& t) {
  DeriveResult out{t, {}};
  out.trajectory.partial_versions.clear();
  Transcript tr;
  for (std::size_t i = 0; i < t.events.size(); ++i) {
    tr = ingest(std::move(tr), t.events[i]);
    if (t.events[i].is_final()) continue;
    auto view = current_transcript(tr);
    PartialVersion v;
    v.event_index = i;
    for (const auto& seg : gold_from_keys(view.tokens, t.key_intervals)) {
      PartialSegment p{seg, view.tokens[seg.begin].start_ms, std::nullopt};
      if (seg.is_command()) {
        auto match = std::find_if(t.segments.begin(), t.segments.end(), [&](const GoldSegment& g) {
          return g.segment.is_command() && g.start_ms == p.start_ms;
        });
        if (match != t.segments.end()) {
          p.normalized = match->normalized;
        } else {
          out.warnings.push_back("event " + std::to_string(i) + ": command \"" + seg.text + "\" at " + std::to_string(p.start_ms) +
                                 "ms has no final-version segment with the same start");
        }
      }
      v.segments.push_back(std::move(p));
    }
    out.trajectory.partial_versions.push_back(std::move(v));
  }
  return out;
}

Stages gold_stages(const Trajectory& t) {
  std::map<std::int64_t, std::string> norms;
  std::map<std::int64_t, GoldInterpretation> interps;
  for (const auto& g : t.segments) {
    if (!g.segment.is_command()) continue;
    if (g.normalized) norms[g.start_ms] = *g.normalized;
    interps[g.start_ms] = GoldInterpretation{g.program, g.post_state};
  }
  return {std::make_shared<KeyTagger>(t.key_intervals), std::make_shared<GoldNormalizer>(std::move(norms)),
          std::make_shared<GoldInterpreter>(std::move(interps))};
}

ReplayReport replay_gold(const Trajectory& t) {
  ReplayReport report;
  PipelineConfig cfg;
  cfg.commits_enabled = false;
  Pipeline p(gold_stages(t), t.initial_state, cfg);
  for (const auto& e : t.events) p.on_event(e);

  const auto& records = p.state().records;
  for (const auto& r : records) report.states.push_back(r.post_state);
  for (std::size_t i = 0; i < std::max(records.size(), t.segments.size()); ++i) {
    std::string why;
    if (i >= records.size()) {
      why = "pipeline produced no record for this segment";
    } else if (i >= t.segments.size()) {
      why = "pipeline produced an extra segment \"" + records[i].segment.text + "\"";
    } else if (!records[i].segment.same_span(t.segments[i].segment)) {
      why = "segmented as \"" + records[i].segment.text + "\"";
    } else if (!records[i].errors.empty()) {
      why = records[i].errors.front().stage + ": " + records[i].errors.front().message;
    } else if (!state_match(records[i].post_state, t.segments[i].post_state)) {
      why = "state \"" + records[i].post_state.content_utf8() + "\" != gold \"" + t.segments[i].post_state.content_utf8() + "\"";
    }
    if (!why.empty()) {
      report.first_mismatch = i;
      report.mismatch = why;
      break;
    }
  }

  for (std::size_t i = 0; i < t.segments.size(); ++i) {
    const auto& g = t.segments[i];
    if (!g.program) continue;
    try {
      auto got = dsl::execute(*g.program, t.pre_state(i));
      if (!state_match(got, g.post_state)) {
        report.audit.push_back({i, "program yields \"" + got.content_utf8() + "\", gold is \"" + g.post_state.content_utf8() + "\""});
      }
    } catch (const Error& e) {
      report.audit.push_back({i, std::string("program fails: ") + e.what()});
    }
  }
  return report;
}

std::vector<std::pair<std::size_t, std::size_t>> segmentation_windows(std::size_t segments, std::size_t max_len) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t len = 1; len <= max_len; ++len) {
    for (std::size_t first = 0; first + len <= segments; ++first) out.emplace_back(first, len);
  }
  return out;
}

namespace {

struct Tally {
  std::vector<EvalRow> rows;
  std::size_t hits = 0;
  std::size_t predicted = 0;
  std::size_t gold = 0;
};

Tally evaluate_one(const Trajectory& t, const StageFactory& factory, bool gold_normalized) {
  Tally out;
  Stages stages;
  try {
    stages = factory(t);
  } catch (const std::exception& e) {
    EvalRow row;
    row.trajectory = t.id;
    row.kind = "setup";
    row.error = e.what();
    out.rows.push_back(row);
    return out;
  }
  const auto full = current_transcript(t.final_transcript());

  for (auto [first, len] : segmentation_windows(t.segments.size())) {
    EvalRow row;
    row.trajectory = t.id;
    row.kind = "segmentation";
    row.first_segment = first;
    row.num_segments = len;
    const std::size_t lo = t.segments[first].segment.begin;
    const std::size_t hi = t.segments[first + len - 1].segment.end;
    TranscriptView window;
    window.tokens.assign(full.tokens.begin() + static_cast<long>(lo), full.tokens.begin() + static_cast<long>(hi));
    window.text = join_token_text(window.tokens, 0, window.tokens.size());
    window.final_tokens = window.tokens.size();
    for (auto e : full.final_ends) {
      if (e > lo && e <= hi) window.final_ends.push_back(e - lo);
    }
    if (window.final_ends.empty() || window.final_ends.back() != window.tokens.size()) window.final_ends.push_back(window.tokens.size());

    std::vector<LabeledSegment> gold;
    for (std::size_t k = first; k < first + len; ++k) {
      auto s = t.segments[k].segment;
      s.begin -= lo;
      s.end -= lo;
      gold.push_back(s);
    }
    std::vector<LabeledSegment> pred;
    try {
      pred = decode(stages.tagger->tag(window), window.tokens);
      auto score = seg_metrics(pred, gold);
      row.seg_em = score.em;
      row.seg_f1 = score.f1;
    } catch (const std::exception& e) {
      row.seg_em = false;
      row.seg_f1 = 0.0;
      row.error = e.what();
    }
    for (const auto& p : pred) out.hits += std::any_of(gold.begin(), gold.end(), [&](const LabeledSegment& g) { return g.same_span(p); });
    out.predicted += pred.size();
    out.gold += gold.size();
    out.rows.push_back(std::move(row));
  }

  for (std::size_t i = 0; i < t.segments.size(); ++i) {
    const auto& g = t.segments[i];
    if (!g.segment.is_command()) continue;
    EvalRow row;
    row.trajectory = t.id;
    row.kind = "command";
    row.first_segment = i;
    row.num_segments = 1;
    row.norm_em = false;
    row.state_em = false;
    if (g.program) row.program_em = false;
    try {
      const auto& pre = t.pre_state(i);
      const auto& tok = full.tokens[g.segment.end - 1];
      StageInput in{pre, g.segment.text, g.start_ms, tok.end_ms};
      if (gold_normalized) {
        in.utterance = g.normalized.value_or(g.segment.text);
      } else {
        in.utterance = stages.normalizer->normalize(in).text;
      }
      auto interp = stages.interpreter->interpret(in);
      std::string normalized = interp.normalized ? *interp.normalized : in.utterance;
      row.norm_em = g.normalized && normalized == *g.normalized;
      if (g.program) row.program_em = interp.program && dsl::program_match(*interp.program, *g.program);
      DocumentState got = interp.state ? *interp.state : interp.program ? dsl::execute(*interp.program, pre) : pre;
      row.state_em = state_match(got, g.post_state);
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    out.rows.push_back(std::move(row));
  }
  return out;
}

double mean(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace

EvalReport evaluate(const std::vector<Trajectory>& corpus, const StageFactory& stages, const EvalOptions& options) {
  unsigned jobs = options.jobs;
  if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
  std::vector<Tally> tallies(corpus.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < corpus.size(); i = next++) tallies[i] = evaluate_one(corpus[i], stages, options.gold_normalized);
  };
  std::vector<std::future<void>> pool;
  for (unsigned k = 0; k < std::min<std::size_t>(jobs, corpus.size()); ++k) pool.push_back(std::async(std::launch::async, worker));
  for (auto& f : pool) f.get();

  EvalReport r;
  r.trajectories = corpus.size();
  std::vector<double> em, f1, norm, state, program;
  std::size_t hits = 0, predicted = 0, gold = 0;
  for (auto& t : tallies) {
    hits += t.hits;
    predicted += t.predicted;
    gold += t.gold;
    for (auto& row : t.rows) {
      if (row.kind == "segmentation") {
        em.push_back(*row.seg_em ? 1.0 : 0.0);
        f1.push_back(*row.seg_f1);
      } else if (row.kind == "command") {
        norm.push_back(*row.norm_em ? 1.0 : 0.0);
        state.push_back(*row.state_em ? 1.0 : 0.0);
        if (row.program_em) program.push_back(*row.program_em ? 1.0 : 0.0);
      }
      r.rows.push_back(std::move(row));
    }
  }
  r.windows = em.size();
  r.commands = state.size();
  r.program_commands = program.size();
  r.seg_em = mean(em);
  r.seg_f1 = mean(f1);
  double p = predicted ? static_cast<double>(hits) / static_cast<double>(predicted) : 0.0;
  double rc = gold ? static_cast<double>(hits) / static_cast<double>(gold) : 0.0;
  r.seg_f1_pooled = hits ? 2 * p * rc / (p + rc) : 0.0;
  r.norm_em = mean(norm);
  r.state_em = mean(state);
  if (!program.empty()) r.program_em = mean(program);
  return r;
}

json to_json(const EvalReport& r) {
  return {{"trajectories", r.trajectories},
          {"segmentation_windows", r.windows},
          {"commands", r.commands},
          {"program_commands", r.program_commands},
          {"seg_em", r.seg_em},
          {"seg_f1", r.seg_f1},
          {"seg_f1_pooled", r.seg_f1_pooled},
          {"norm_em", r.norm_em},
          {"state_em", r.state_em},
          {"program_em", r.program_em ? json(*r.program_em) : json(nullptr)}};
}

std::string to_csv(const EvalReport& r) {
  auto opt = [](const auto& v) -> std::string {
    if (!v) return "";
    std::ostringstream s;
    s << *v;
    return s.str();
  };
  auto quote = [](const std::string& s) {
    std::string q = "\"";
    for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
    return q + "\"";
  };
  std::ostringstream out;
  out << "trajectory,kind,first_segment,num_segments,seg_em,seg_f1,norm_em,state_em,program_em,error\n";
  for (const auto& row : r.rows) {
    out << quote(row.trajectory) << ',' << row.kind << ',' << row.first_segment << ',' << row.num_segments << ',' << opt(row.seg_em)
        << ',' << opt(row.seg_f1) << ',' << opt(row.norm_em) << ',' << opt(row.state_em) << ',' << opt(row.program_em) << ','
        << quote(row.error) << '\n';
  }
  return out.str();
}

json corpus_stats(const std::vector<Trajectory>& corpus) {
  std::map<std::string, TaskCounts> by_task;
  TaskCounts total;
  for (const auto& t : corpus) {
    auto& c = by_task[to_string(t.task)];
    c.trajectories++;
    total.trajectories++;
    for (const auto& g : t.segments) {
      auto& slot = g.segment.is_command() ? c.command_ops : c.dictation_ops;
      ++slot;
      ++(g.segment.is_command() ? total.command_ops : total.dictation_ops);
    }
  }
  auto row = [](const TaskCounts& c) {
    return json{{"trajectories", c.trajectories}, {"dictation_ops", c.dictation_ops}, {"command_ops", c.command_ops}};
  };
  json out;
  out["tasks"] = json::object();
  for (const auto& [task, c] : by_task) out["tasks"][task] = row(c);
  out["total"] = row(total);
  return out;
}

}  // namespace dictate
