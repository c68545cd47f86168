#pragma once

#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dictate/asr.hpp"
#include "dictate/doc.hpp"
#include "dictate/dsl/ast.hpp"
#include "dictate/segmentation.hpp"
#include "dictate/stages.hpp"

namespace dictate {

struct StageFailure {
  std::string stage;
  std::string code;
  std::string message;

  friend bool operator==(const StageFailure&, const StageFailure&) = default;
};

struct SegmentRecord {
  LabeledSegment segment;
  std::int64_t start_ms = 0;
  std::int64_t end_ms = 0;
  std::optional<std::string> normalized;
  std::optional<dsl::Program> program;
  std::optional<DocumentState> direct_state;
  DocumentState pre_state;
  DocumentState post_state;
  double tag_confidence = 0.0;
  double norm_confidence = 0.0;
  double interp_confidence = 0.0;
  std::vector<StageFailure> errors;
  bool frozen = false;

  // Dictation records contribute their tag confidence only.
  double confidence() const { return tag_confidence + norm_confidence + interp_confidence; }

  friend bool operator==(const SegmentRecord&, const SegmentRecord&) = default;
};

struct PipelineConfig {
  double tau_commit = std::log(0.5);
  std::size_t max_open_finals = 4;
  bool commits_enabled = true;
};

struct PipelineState {
  // The "initial state" for everything after the last commit point.
  DocumentState committed_state;
  std::vector<SegmentRecord> records;
  // Records before the last commit point, oldest first. Append-only.
  std::vector<SegmentRecord> history;
  Transcript transcript;
  std::size_t finals_since_commit = 0;
  double tau_commit = std::log(0.5);
  // Whether any token was committed before the current transcript; decides
  // whether the first dictation segment needs a separating space.
  bool has_committed_tokens = false;
  std::size_t commits = 0;

  const DocumentState& visible() const { return records.empty() ? committed_state : records.back().post_state; }

  friend bool operator==(const PipelineState&, const PipelineState&) = default;
};

struct Stages {
  std::shared_ptr<const Tagger> tagger;
  std::shared_ptr<const Normalizer> normalizer;
  std::shared_ptr<const Interpreter> interpreter;
};

// One session's change-propagation engine. Events must be fed serially.
class Pipeline {
 public:
  Pipeline(Stages stages, DocumentState initial, PipelineConfig config = {});

  // Ingests the event, re-segments the open transcript and recomputes every
  // record whose segment or predecessor state changed. After a final result,
  // applies the commit policy. Stale events throw StaleEventError and leave
  // the state untouched; stage failures never throw.
  void on_event(const AsrEvent& e);

  const PipelineState& state() const { return state_; }
  const DocumentState& visible() const { return state_.visible(); }
  const TranscriptView& view() const { return view_; }
  double confidence() const;

  // Commits at the end of the `final_index`-th open final (1-based); exposed
  // for tests of the commit arithmetic.
  void commit_at_final(std::size_t final_index);

 private:
  void recompute();
  SegmentRecord build(const LabeledSegment& seg, const DocumentState& pre, bool leading_space) const;
  void maybe_commit();

  Stages stages_;
  PipelineConfig config_;
  PipelineState state_;
  TranscriptView view_;
  TagSequence tags_;
};

nlohmann::json to_json(const SegmentRecord& r);
nlohmann::json to_json(const PipelineState& s);

}  // namespace dictate
