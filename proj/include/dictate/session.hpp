#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dictate/asr.hpp"
#include "dictate/doc.hpp"
#include "dictate/pipeline.hpp"
#include "dictate/trajectory.hpp"

namespace dictate {

enum class SessionMode { demo, annotate };

std::string to_string(SessionMode m);
SessionMode session_mode_from_string(const std::string& s);

// Client -> server. Wire form is a JSON object with a "type" field:
//   {"type": "attach", "clock_offset_ms": 0}
//   {"type": "asr_event", "event": {...}}
//   {"type": "key_down", "t_ms": 450}            also key_up
//   {"type": "set_gold_normalization", "segment": 1, "text": "..."}
//   {"type": "set_post_state", "segment": 1, "state": {...}}
//   {"type": "truncate_from", "segment": 1}
//   {"type": "reset", "task"?, "prompt"?, "initial_state"?}
//   {"type": "submit"}
// Segment ids are indices into the segment list of the latest snapshot.
struct ClientMessage {
  enum class Type { attach, asr_event, key_down, key_up, set_gold_normalization, set_post_state, truncate_from, reset, submit };

  Type type = Type::reset;
  std::optional<AsrEvent> event;
  std::int64_t t_ms = 0;  // key events; the clock offset for attach
  std::size_t segment = 0;
  std::string text;
  std::optional<DocumentState> state;  // set_post_state
  std::optional<Task> task;
  std::optional<std::string> prompt;
  std::optional<DocumentState> initial_state;

  friend bool operator==(const ClientMessage&, const ClientMessage&) = default;
};

std::string to_string(ClientMessage::Type t);
// Throws SchemaError naming the offending field.
ClientMessage client_message_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ClientMessage& m);

struct SessionOptions {
  SessionMode mode = SessionMode::annotate;
  Task task = Task::replicate_doc;
  std::string prompt;
  DocumentState initial_state;
  // Demo mode only.
  Stages stages;
  PipelineConfig pipeline;
  // Where submit writes <session id>.json. Empty disables submit.
  std::filesystem::path store;
};

// Server -> client messages, each {"seq": n, "type": ...}, seq strictly
// increasing per session:
//   snapshot   transcript, key state, document, segments (label, asr,
//              gold_asr, pre/post state, diff, flags, errors, frozen),
//              problems, valid
//   commit     {"commits", "committed_state"} after the pipeline commits
//   erased     {"segments": [...]} command states dropped by an earlier edit
//   submitted  {"path", "warnings"}
//   error      {"code", "message", "problems"?}; the session is unchanged
//
// Annotate mode segments the transcript with the key intervals (a held key
// counts as open-ended) and takes normalizations and post-states from the
// demonstrator; a command without a post-state leaves the document unchanged.
// Demo mode runs the configured stages with commits on.
//
// Every reply follows from the sequence of messages handled so far (log()),
// so a fresh session fed the same log produces the same replies.
class Session {
 public:
  Session(std::string id, SessionOptions options);

  const std::string& id() const { return id_; }
  SessionMode mode() const { return options_.mode; }

  // Never throws for a bad message; rejections come back as error messages.
  std::vector<nlohmann::json> handle(const nlohmann::json& msg);
  std::vector<nlohmann::json> handle(const ClientMessage& msg);

  // Current snapshot without consuming a sequence number.
  nlohmann::json snapshot() const;
  std::vector<nlohmann::json> log() const;
  // The trajectory submit would write, without the validation gate.
  Trajectory recording() const;

 private:
  struct Annotations {
    std::map<std::int64_t, std::string> normalized;
    std::map<std::int64_t, DocumentState> post;
  };

  void apply(const ClientMessage& m, std::vector<nlohmann::json>& out);
  void rebuild();
  std::vector<KeyInterval> effective_keys() const;
  std::vector<const SegmentRecord*> segments() const;
  const SegmentRecord& editable(std::size_t segment, bool command) const;
  nlohmann::json segment_json(std::size_t i, const SegmentRecord& r) const;
  std::vector<std::pair<std::size_t, std::string>> problems() const;
  void truncate(std::int64_t cut_ms);
  nlohmann::json submit();
  nlohmann::json stamp(nlohmann::json m);

  std::string id_;
  SessionOptions options_;
  std::int64_t clock_offset_ms_ = 0;
  std::vector<AsrEvent> events_;
  std::vector<KeyInterval> keys_;
  std::optional<std::int64_t> key_down_;
  Annotations notes_;
  std::unique_ptr<Pipeline> pipeline_;
  std::uint64_t seq_ = 0;
  std::vector<nlohmann::json> log_;
  mutable std::mutex mu_;
};

// One live session per id. Thread-safe; each session serializes its own
// messages.
class SessionRegistry {
 public:
  // Throws SessionError("duplicate_session").
  std::shared_ptr<Session> create(const std::string& id, SessionOptions options);
  // Throws SessionError("unknown_session"). Returns the attach snapshot.
  std::shared_ptr<Session> attach(const std::string& id, std::int64_t clock_offset_ms, nlohmann::json* snapshot = nullptr);
  std::shared_ptr<Session> find(const std::string& id) const;
  // Throws SessionError("unknown_session").
  void close(const std::string& id);
  std::vector<std::string> ids() const;

 private:
  mutable std::mutex mu_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
};

}  // namespace dictate
