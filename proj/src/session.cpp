#include "dictate/session.hpp"

#include <algorithm>
#include <limits>
#include <set>

#include "dictate/errors.hpp"
#include "dictate/json_codec.hpp"
#include "dictate/text.hpp"

namespace dictate {

using nlohmann::json;

std::string to_string(SessionMode m) { return m == SessionMode::demo ? "demo" : "annotate"; }

SessionMode session_mode_from_string(const std::string& s) {
  if (s == "demo") return SessionMode::demo;
  if (s == "annotate") return SessionMode::annotate;
  throw SchemaError("mode", "expected \"demo\" or \"annotate\"");
}

namespace {

const std::pair<ClientMessage::Type, const char*> kTypeNames[] = {
    {ClientMessage::Type::attach, "attach"},
    {ClientMessage::Type::asr_event, "asr_event"},
    {ClientMessage::Type::key_down, "key_down"},
    {ClientMessage::Type::key_up, "key_up"},
    {ClientMessage::Type::set_gold_normalization, "set_gold_normalization"},
    {ClientMessage::Type::set_post_state, "set_post_state"},
    {ClientMessage::Type::truncate_from, "truncate_from"},
    {ClientMessage::Type::reset, "reset"},
    {ClientMessage::Type::submit, "submit"},
};

template <class T>
T field(const json& j, const char* key) {
  if (!j.contains(key)) throw SchemaError(key, "missing");
  try {
    return j.at(key).get<T>();
  } catch (const SchemaError& e) {
    throw SchemaError(std::string(key) + "/" + e.path(), e.detail());
  } catch (const std::exception& e) {
    throw SchemaError(key, e.what());
  }
}

constexpr std::size_t kSessionWide = std::numeric_limits<std::size_t>::max();

// Annotate-mode stages: whatever the demonstrator has supplied so far. A
// missing normalization falls back to the ASR text and a missing post-state
// to the pre-state; both show up as flags rather than stage errors.
class SuppliedNormalizer : public Normalizer {
 public:
  explicit SuppliedNormalizer(std::map<std::int64_t, std::string> m) : m_(std::move(m)) {}
  Normalization normalize(const StageInput& in) const override {
    auto it = m_.find(in.start_ms);
    return {it == m_.end() ? in.utterance : it->second, 0.0};
  }

 private:
  std::map<std::int64_t, std::string> m_;
};

class SuppliedInterpreter : public Interpreter {
 public:
  explicit SuppliedInterpreter(std::map<std::int64_t, DocumentState> m) : m_(std::move(m)) {}
  Interpretation interpret(const StageInput& in) const override {
    auto it = m_.find(in.start_ms);
    Interpretation out;
    out.state = it == m_.end() ? in.prev : it->second;
    return out;
  }

 private:
  std::map<std::int64_t, DocumentState> m_;
};

}  // namespace

std::string to_string(ClientMessage::Type t) {
  for (const auto& [type, name] : kTypeNames) {
    if (type == t) return name;
  }
  return "?";
}

ClientMessage client_message_from_json(const json& j) {
  if (!j.is_object()) throw SchemaError("", "message must be a JSON object");
  auto type = field<std::string>(j, "type");
  ClientMessage m;
  auto it = std::find_if(std::begin(kTypeNames), std::end(kTypeNames), [&](const auto& p) { return type == p.second; });
  if (it == std::end(kTypeNames)) throw SchemaError("type", "unknown message type '" + type + "'");
  m.type = it->first;
  using T = ClientMessage::Type;
  switch (m.type) {
    case T::attach:
      m.t_ms = j.contains("clock_offset_ms") ? field<std::int64_t>(j, "clock_offset_ms") : 0;
      break;
    case T::asr_event:
      m.event = field<AsrEvent>(j, "event");
      break;
    case T::key_down:
    case T::key_up:
      m.t_ms = field<std::int64_t>(j, "t_ms");
      break;
    case T::set_gold_normalization:
      m.segment = field<std::size_t>(j, "segment");
      m.text = field<std::string>(j, "text");
      break;
    case T::set_post_state:
      m.segment = field<std::size_t>(j, "segment");
      m.state = field<DocumentState>(j, "state");
      break;
    case T::truncate_from:
      m.segment = field<std::size_t>(j, "segment");
      break;
    case T::reset:
      if (j.contains("task")) m.task = task_from_string(field<std::string>(j, "task"));
      if (j.contains("prompt")) m.prompt = field<std::string>(j, "prompt");
      if (j.contains("initial_state")) m.initial_state = field<DocumentState>(j, "initial_state");
      break;
    case T::submit:
      break;
  }
  return m;
}

json to_json(const ClientMessage& m) {
  json j = {{"type", to_string(m.type)}};
  using T = ClientMessage::Type;
  switch (m.type) {
    case T::attach: j["clock_offset_ms"] = m.t_ms; break;
    case T::asr_event: j["event"] = *m.event; break;
    case T::key_down:
    case T::key_up: j["t_ms"] = m.t_ms; break;
    case T::set_gold_normalization:
      j["segment"] = m.segment;
      j["text"] = m.text;
      break;
    case T::set_post_state:
      j["segment"] = m.segment;
      j["state"] = *m.state;
      break;
    case T::truncate_from: j["segment"] = m.segment; break;
    case T::reset:
      if (m.task) j["task"] = to_string(*m.task);
      if (m.prompt) j["prompt"] = *m.prompt;
      if (m.initial_state) j["initial_state"] = *m.initial_state;
      break;
    case T::submit: break;
  }
  return j;
}

Session::Session(std::string id, SessionOptions options) : id_(std::move(id)), options_(std::move(options)) {
  options_.initial_state.validate();
  if (options_.mode == SessionMode::demo && (!options_.stages.tagger || !options_.stages.normalizer || !options_.stages.interpreter)) {
    throw SessionError("config", "demo sessions need a tagger, a normalizer and an interpreter");
  }
  rebuild();
}

std::vector<KeyInterval> Session::effective_keys() const {
  auto keys = keys_;
  if (key_down_) keys.push_back({*key_down_, std::numeric_limits<std::int64_t>::max() / 4});
  return keys;
}

void Session::rebuild() {
  if (options_.mode == SessionMode::demo) {
    pipeline_ = std::make_unique<Pipeline>(options_.stages, options_.initial_state, options_.pipeline);
  } else {
    Stages s{std::make_shared<KeyTagger>(effective_keys()), std::make_shared<SuppliedNormalizer>(notes_.normalized),
             std::make_shared<SuppliedInterpreter>(notes_.post)};
    PipelineConfig cfg;
    cfg.commits_enabled = false;
    pipeline_ = std::make_unique<Pipeline>(std::move(s), options_.initial_state, cfg);
  }
  for (const auto& e : events_) pipeline_->on_event(e);
}

std::vector<const SegmentRecord*> Session::segments() const {
  std::vector<const SegmentRecord*> out;
  for (const auto& r : pipeline_->state().history) out.push_back(&r);
  for (const auto& r : pipeline_->state().records) out.push_back(&r);
  return out;
}

const SegmentRecord& Session::editable(std::size_t segment, bool command) const {
  auto segs = segments();
  if (segment >= segs.size()) throw SessionError("bounds", "no segment " + std::to_string(segment));
  const auto& r = *segs[segment];
  if (r.frozen) throw SessionError("frozen", "segment " + std::to_string(segment) + " is committed and can no longer change");
  if (options_.mode != SessionMode::annotate) throw SessionError("mode", "demo sessions take no annotations");
  if (command && !r.segment.is_command()) {
    throw SessionError("not_command", "segment " + std::to_string(segment) + " is dictation; only commands carry annotations");
  }
  return r;
}

json Session::segment_json(std::size_t i, const SegmentRecord& r) const {
  json s;
  s["id"] = i;
  s["label"] = std::string(to_string(r.segment.label));
  s["asr"] = r.segment.text;
  s["gold_asr"] = nullptr;
  if (r.segment.is_command()) {
    if (options_.mode == SessionMode::demo) {
      if (r.normalized) s["gold_asr"] = *r.normalized;
    } else if (auto it = notes_.normalized.find(r.start_ms); it != notes_.normalized.end()) {
      s["gold_asr"] = it->second;
    }
  }
  s["start_ms"] = r.start_ms;
  s["end_ms"] = r.end_ms;
  s["pre_state"] = r.pre_state;
  s["post_state"] = r.post_state;
  s["diff"] = edit_script_to_json(diff(r.pre_state, r.post_state));
  s["program"] = r.program ? json(dsl::print_canonical(*r.program)) : json(nullptr);
  s["frozen"] = r.frozen;
  json flags = json::array();
  if (r.segment.is_command()) {
    if (options_.mode == SessionMode::annotate && !notes_.normalized.count(r.start_ms)) flags.push_back("missing_normalization");
    if (r.post_state == r.pre_state) flags.push_back("no_change");
  }
  if (!r.errors.empty()) flags.push_back("stage_error");
  s["flags"] = std::move(flags);
  s["errors"] = json::array();
  for (const auto& e : r.errors) s["errors"].push_back({{"stage", e.stage}, {"code", e.code}, {"message", e.message}});
  return s;
}

std::vector<std::pair<std::size_t, std::string>> Session::problems() const {
  std::vector<std::pair<std::size_t, std::string>> out;
  if (options_.mode != SessionMode::annotate) return out;
  const auto& st = pipeline_->state();
  if (st.transcript.live_partial) out.emplace_back(kSessionWide, "a partial result is still pending");
  if (key_down_) out.emplace_back(kSessionWide, "the command key is still held down");
  auto segs = segments();
  for (std::size_t i = 0; i < segs.size(); ++i) {
    const auto& r = *segs[i];
    if (!r.segment.is_command()) continue;
    const std::string name = "segment " + std::to_string(i) + " (\"" + r.segment.text + "\")";
    if (!notes_.normalized.count(r.start_ms)) out.emplace_back(i, name + " has no gold normalization");
    if (r.post_state == r.pre_state) out.emplace_back(i, name + " is not associated with any change");
  }
  return out;
}

json Session::snapshot() const {
  json j;
  j["type"] = "snapshot";
  j["session"] = id_;
  j["mode"] = to_string(options_.mode);
  j["task"] = to_string(options_.task);
  j["prompt"] = options_.prompt;
  j["initial_state"] = options_.initial_state;
  const auto& st = pipeline_->state();
  j["transcript"] = pipeline_->view().text;
  j["live_partial"] = st.transcript.live_partial.has_value();
  j["key_down_ms"] = key_down_ ? json(*key_down_) : json(nullptr);
  j["key_intervals"] = keys_;
  j["document"] = st.visible();
  j["committed_state"] = st.committed_state;
  j["commits"] = st.commits;
  j["finals_since_commit"] = st.finals_since_commit;
  j["segments"] = json::array();
  auto segs = segments();
  for (std::size_t i = 0; i < segs.size(); ++i) j["segments"].push_back(segment_json(i, *segs[i]));
  j["problems"] = json::array();
  for (const auto& [seg, why] : problems()) {
    j["problems"].push_back({{"segment", seg == kSessionWide ? json(nullptr) : json(seg)}, {"reason", why}});
  }
  j["valid"] = j["problems"].empty();
  return j;
}

json Session::stamp(json m) {
  m["seq"] = ++seq_;
  return m;
}

std::vector<json> Session::handle(const json& msg) {
  std::lock_guard lock(mu_);
  log_.push_back(msg);
  ClientMessage m;
  try {
    m = client_message_from_json(msg);
  } catch (const Error& e) {
    return {stamp({{"type", "error"}, {"code", e.code()}, {"message", e.what()}})};
  }
  std::vector<json> out;
  try {
    apply(m, out);
  } catch (const Error& e) {
    out.clear();
    out.push_back({{"type", "error"}, {"code", e.code()}, {"message", e.what()}});
  }
  for (auto& o : out) o = stamp(std::move(o));
  return out;
}

std::vector<json> Session::handle(const ClientMessage& msg) { return handle(to_json(msg)); }

std::vector<json> Session::log() const {
  std::lock_guard lock(mu_);
  return log_;
}

void Session::apply(const ClientMessage& m, std::vector<json>& out) {
  using T = ClientMessage::Type;
  const bool annotate = options_.mode == SessionMode::annotate;
  switch (m.type) {
    case T::attach:
      clock_offset_ms_ = m.t_ms;
      break;

    case T::asr_event: {
      const auto commits = pipeline_->state().commits;
      pipeline_->on_event(*m.event);  // a stale event throws before any change
      events_.push_back(*m.event);
      const auto& st = pipeline_->state();
      if (st.commits != commits) out.push_back({{"type", "commit"}, {"commits", st.commits}, {"committed_state", st.committed_state}});
      break;
    }

    case T::key_down: {
      if (key_down_) throw SessionError("key_state", "the command key is already down");
      const auto t = m.t_ms + clock_offset_ms_;
      if (!keys_.empty() && t < keys_.back().up_ms) {
        throw SessionError("key_order", "key_down at " + std::to_string(t) + "ms precedes the previous key_up");
      }
      key_down_ = t;
      if (annotate) rebuild();
      break;
    }

    case T::key_up: {
      if (!key_down_) throw SessionError("key_state", "the command key is not down");
      const auto t = m.t_ms + clock_offset_ms_;
      if (t < *key_down_) throw SessionError("key_order", "key_up at " + std::to_string(t) + "ms precedes its key_down");
      keys_.push_back({*key_down_, t});
      key_down_.reset();
      if (annotate) rebuild();
      break;
    }

    case T::set_gold_normalization: {
      const auto& r = editable(m.segment, true);
      std::string text(text::trim(std::string_view(m.text)));
      if (text.empty()) {
        notes_.normalized.erase(r.start_ms);
      } else {
        notes_.normalized[r.start_ms] = text;
      }
      rebuild();
      break;
    }

    case T::set_post_state: {
      const auto& r = editable(m.segment, true);
      m.state->validate();
      const auto start = r.start_ms;
      // Later commands' states were written against the old state; drop them.
      json erased = json::array();
      auto segs = segments();
      for (std::size_t i = m.segment + 1; i < segs.size(); ++i) {
        if (segs[i]->segment.is_command() && notes_.post.count(segs[i]->start_ms)) erased.push_back(i);
      }
      notes_.post.erase(notes_.post.upper_bound(start), notes_.post.end());
      notes_.post[start] = *m.state;
      rebuild();
      if (!erased.empty()) out.push_back({{"type", "erased"}, {"segments", erased}});
      break;
    }

    case T::truncate_from:
      truncate(editable(m.segment, false).start_ms);
      rebuild();
      break;

    case T::reset:
      if (m.initial_state) m.initial_state->validate();
      if (m.task) options_.task = *m.task;
      if (m.prompt) options_.prompt = *m.prompt;
      if (m.initial_state) options_.initial_state = *m.initial_state;
      events_.clear();
      keys_.clear();
      key_down_.reset();
      notes_ = {};
      rebuild();
      break;

    case T::submit:
      out.push_back(submit());
      return;
  }
  out.push_back(snapshot());
}

void Session::truncate(std::int64_t cut_ms) {
  auto keep = [&](const AsrEvent& e) {
    std::vector<AsrToken> kept;
    for (const auto& t : e.tokens) {
      if (t.start_ms < cut_ms) kept.push_back(t);
    }
    return kept;
  };
  // An utterance whose final loses every token goes entirely, partials too.
  std::set<std::int64_t> dropped;
  for (const auto& e : events_) {
    if (e.is_final() && keep(e).empty()) dropped.insert(e.utterance_id);
  }
  std::vector<AsrEvent> events;
  for (const auto& e : events_) {
    if (dropped.count(e.utterance_id)) continue;
    auto kept = keep(e);
    if (kept.empty()) continue;
    if (kept.size() != e.tokens.size()) {
      events.push_back(e.is_final() ? AsrEvent::final_result(e.utterance_id, std::move(kept)) : AsrEvent::partial(e.utterance_id, std::move(kept)));
    } else {
      events.push_back(e);
    }
  }
  events_ = std::move(events);

  Transcript t;
  for (const auto& e : events_) t = ingest(std::move(t), e);
  const auto tokens = current_transcript(t).tokens;
  std::vector<KeyInterval> keys;
  for (const auto& k : keys_) {
    bool covers = std::any_of(tokens.begin(), tokens.end(), [&](const AsrToken& tok) {
      return tok.midpoint_x2() > 2 * k.down_ms && tok.midpoint_x2() <= 2 * k.up_ms;
    });
    if (covers) keys.push_back(k);
  }
  keys_ = std::move(keys);
  key_down_.reset();
  notes_.normalized.erase(notes_.normalized.lower_bound(cut_ms), notes_.normalized.end());
  notes_.post.erase(notes_.post.lower_bound(cut_ms), notes_.post.end());
}

Trajectory Session::recording() const {
  Trajectory t;
  t.id = id_;
  t.task = options_.task;
  t.prompt = options_.prompt;
  t.initial_state = options_.initial_state;
  t.events = events_;
  t.key_intervals = keys_;
  for (const auto* r : segments()) {
    GoldSegment g;
    g.segment = r->segment;
    g.start_ms = r->start_ms;
    if (r->segment.is_command()) {
      if (auto it = notes_.normalized.find(r->start_ms); it != notes_.normalized.end()) g.normalized = it->second;
    }
    g.post_state = r->post_state;
    t.segments.push_back(std::move(g));
  }
  return t;
}

json Session::submit() {
  if (options_.mode != SessionMode::annotate) throw SessionError("mode", "only annotate sessions submit trajectories");
  if (options_.store.empty()) throw SessionError("no_store", "this session has no trajectory store");
  auto issues = problems();
  if (events_.empty()) issues.emplace_back(kSessionWide, "nothing has been dictated");
  if (!issues.empty()) {
    json j = {{"type", "error"}, {"code", "validation"}, {"problems", json::array()}};
    std::string msg;
    for (const auto& [seg, why] : issues) {
      j["problems"].push_back({{"segment", seg == kSessionWide ? json(nullptr) : json(seg)}, {"reason", why}});
      msg += (msg.empty() ? "" : "; ") + why;
    }
    j["message"] = msg;
    return j;
  }
  auto derived = derive_partial_golds(recording());
  validate(derived.trajectory);  // the gate: throws before anything is written
  auto path = options_.store / (id_ + ".json");
  save_trajectory(derived.trajectory, path);
  return {{"type", "submitted"}, {"path", path.string()}, {"trajectory", id_}, {"warnings", derived.warnings}};
}

std::shared_ptr<Session> SessionRegistry::create(const std::string& id, SessionOptions options) {
  if (id.empty()) throw SessionError("bad_session_id", "session id must not be empty");
  std::lock_guard lock(mu_);
  if (sessions_.count(id)) throw SessionError("duplicate_session", "session '" + id + "' already exists");
  auto s = std::make_shared<Session>(id, std::move(options));
  sessions_[id] = s;
  return s;
}

std::shared_ptr<Session> SessionRegistry::attach(const std::string& id, std::int64_t clock_offset_ms, json* snapshot) {
  auto s = find(id);
  if (!s) throw SessionError("unknown_session", "no session '" + id + "'");
  ClientMessage m;
  m.type = ClientMessage::Type::attach;
  m.t_ms = clock_offset_ms;
  auto replies = s->handle(m);
  if (snapshot) *snapshot = replies.front();
  return s;
}

std::shared_ptr<Session> SessionRegistry::find(const std::string& id) const {
  std::lock_guard lock(mu_);
  auto it = sessions_.find(id);
  return it == sessions_.end() ? nullptr : it->second;
}

void SessionRegistry::close(const std::string& id) {
  std::lock_guard lock(mu_);
  if (!sessions_.erase(id)) throw SessionError("unknown_session", "no session '" + id + "'");
}

std::vector<std::string> SessionRegistry::ids() const {
  std::lock_guard lock(mu_);
  std::vector<std::string> out;
  for (const auto& [id, s] : sessions_) out.push_back(id);
  return out;
}

}  // namespace dictate
