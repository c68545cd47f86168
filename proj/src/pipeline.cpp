#include "dictate/pipeline.hpp"

#include <numeric>

#include "dictate/dsl/execute.hpp"
#include "dictate/errors.hpp"
#include "dictate/json_codec.hpp"
#include "dictate/text.hpp"

namespace dictate {

Pipeline::Pipeline(Stages stages, DocumentState initial, PipelineConfig config)
    : stages_(std::move(stages)), config_(config) {
  initial.validate();
  state_.committed_state = std::move(initial);
  state_.tau_commit = config_.tau_commit;
  view_ = current_transcript(state_.transcript);
}

double Pipeline::confidence() const {
  double total = 0.0;
  for (const auto& r : state_.records) total += r.confidence();
  return total;
}

void Pipeline::on_event(const AsrEvent& e) {
  // Ingest a copy so a stale event leaves the transcript intact.
  state_.transcript = ingest(state_.transcript, e);
  if (e.is_final()) ++state_.finals_since_commit;
  recompute();
  if (e.is_final()) maybe_commit();
}

void Pipeline::recompute() {
  view_ = current_transcript(state_.transcript);
  const auto& tokens = view_.tokens;
  try {
    tags_ = stages_.tagger->tag(view_);
    if (tags_.tags.size() != tokens.size() || tags_.confidences.size() != tokens.size()) {
      throw AlignmentError("tagger returned " + std::to_string(tags_.tags.size()) + " tags for " +
                           std::to_string(tokens.size()) + " tokens");
    }
  } catch (const std::exception& ex) {
    // Degrade to "all dictation"; the failure is visible on every record.
    tags_.tags.assign(tokens.size(), Tag::O);
    tags_.confidences.assign(tokens.size(), 0.0);
    auto* err = dynamic_cast<const Error*>(&ex);
    state_.records.clear();
    std::vector<SegmentRecord> out;
    DocumentState pre = state_.committed_state;
    for (const auto& seg : decode(tags_, tokens)) {
      auto r = build(seg, pre, state_.has_committed_tokens || seg.begin > 0);
      r.errors.push_back({"tagger", err ? err->code() : "internal", ex.what()});
      pre = r.post_state;
      out.push_back(std::move(r));
    }
    state_.records = std::move(out);
    return;
  }

  auto segments = decode(tags_, tokens);
  std::vector<SegmentRecord> next;
  next.reserve(segments.size());
  for (std::size_t k = 0; k < segments.size(); ++k) {
    const auto& seg = segments[k];
    const DocumentState& pre = k == 0 ? state_.committed_state : next.back().post_state;
    const bool leading = state_.has_committed_tokens || seg.begin > 0;
    const std::int64_t start = tokens[seg.begin].start_ms;
    const auto& old = state_.records;
    if (k < old.size() && old[k].segment == seg && old[k].start_ms == start && old[k].pre_state == pre) {
      next.push_back(old[k]);
      next.back().end_ms = tokens[seg.end - 1].end_ms;
    } else {
      next.push_back(build(seg, pre, leading));
    }
    next.back().tag_confidence =
        std::accumulate(tags_.confidences.begin() + static_cast<long>(seg.begin), tags_.confidences.begin() + static_cast<long>(seg.end), 0.0);
  }
  state_.records = std::move(next);
}

SegmentRecord Pipeline::build(const LabeledSegment& seg, const DocumentState& pre, bool leading_space) const {
  SegmentRecord r;
  r.segment = seg;
  r.start_ms = view_.tokens[seg.begin].start_ms;
  r.end_ms = view_.tokens[seg.end - 1].end_ms;
  r.pre_state = pre;
  if (!seg.is_command()) {
    r.post_state = insert_dictation(pre, text::from_utf8((leading_space ? " " : "") + seg.text));
    return r;
  }

  auto fail = [&](const char* stage, const std::exception& ex) {
    auto* err = dynamic_cast<const Error*>(&ex);
    r.errors.push_back({stage, err ? err->code() : "internal", ex.what()});
  };

  StageInput in{pre, seg.text, r.start_ms, r.end_ms};
  try {
    auto n = stages_.normalizer->normalize(in);
    r.normalized = n.text;
    r.norm_confidence = n.confidence;
  } catch (const std::exception& ex) {
    fail("normalizer", ex);
    r.normalized = seg.text;
  }
  in.utterance = *r.normalized;

  r.post_state = pre;
  try {
    auto interp = stages_.interpreter->interpret(in);
    if (interp.normalized) r.normalized = *interp.normalized;
    r.interp_confidence = interp.confidence;
    r.program = interp.program;
    r.direct_state = interp.state;
    if (interp.state) {
      interp.state->validate();
      r.post_state = *interp.state;
    } else if (interp.program) {
      r.post_state = dsl::execute(*interp.program, pre);
    } else {
      throw StageError("interpreter", "interpretation has neither a program nor a state");
    }
  } catch (const std::exception& ex) {
    fail("interpreter", ex);
    r.post_state = pre;
  }
  return r;
}

void Pipeline::maybe_commit() {
  if (!config_.commits_enabled) return;
  const std::size_t n = view_.final_ends.size();
  if (n == 0) return;
  if (confidence() > state_.tau_commit) {
    commit_at_final(n);
    return;
  }
  if (state_.finals_since_commit <= config_.max_open_finals) return;

  // Cumulative confidence of the prefix ending at each of the last few final
  // boundaries; ties go to the later boundary.
  std::size_t best = 0;
  double best_score = 0.0;
  const std::size_t first = n >= config_.max_open_finals ? n - config_.max_open_finals + 1 : 1;
  for (std::size_t j = first; j <= n; ++j) {
    std::size_t b = view_.final_ends[j - 1];
    double score = 0.0;
    for (const auto& r : state_.records) {
      if (r.segment.end <= b) {
        score += r.confidence();
      } else if (r.segment.begin < b) {
        for (std::size_t t = r.segment.begin; t < b; ++t) score += tags_.confidences[t];
      }
    }
    if (best == 0 || score >= best_score) {
      best = j;
      best_score = score;
    }
  }
  commit_at_final(best);
}

void Pipeline::commit_at_final(std::size_t j) {
  if (j == 0 || j > view_.final_ends.size()) throw BoundsError("no open final result " + std::to_string(j));
  const std::size_t b = view_.final_ends[j - 1];
  DocumentState committed = state_.committed_state;
  for (auto r : state_.records) {
    if (r.segment.begin >= b) break;
    if (r.segment.end > b) {
      // The boundary splits this segment: keep the dictated words, drop a
      // half-spoken command.
      r.pre_state = committed;
      r.segment.end = b;
      r.segment.text = join_token_text(view_.tokens, r.segment.begin, b);
      r.end_ms = view_.tokens[b - 1].end_ms;
      r.normalized.reset();
      r.program.reset();
      r.direct_state.reset();
      r.norm_confidence = r.interp_confidence = 0.0;
      r.tag_confidence = std::accumulate(tags_.confidences.begin() + static_cast<long>(r.segment.begin),
                                         tags_.confidences.begin() + static_cast<long>(b), 0.0);
      if (r.segment.is_command()) {
        r.post_state = committed;
        r.errors.push_back({"commit", "discarded", "command cut by a forced commit point"});
      } else {
        bool leading = state_.has_committed_tokens || r.segment.begin > 0;
        r.post_state = insert_dictation(committed, text::from_utf8((leading ? " " : "") + r.segment.text));
      }
    }
    committed = r.post_state;
    r.frozen = true;
    state_.history.push_back(std::move(r));
  }
  state_.committed_state = std::move(committed);
  state_.has_committed_tokens = state_.has_committed_tokens || b > 0;
  auto& finals = state_.transcript.finals;
  finals.erase(finals.begin(), finals.begin() + static_cast<long>(j));
  state_.finals_since_commit = finals.size();
  ++state_.commits;
  state_.records.clear();
  recompute();
}

nlohmann::json to_json(const SegmentRecord& r) {
  nlohmann::json j;
  j["segment"] = r.segment;
  j["start_ms"] = r.start_ms;
  j["end_ms"] = r.end_ms;
  j["normalized"] = r.normalized ? nlohmann::json(*r.normalized) : nlohmann::json(nullptr);
  j["program"] = r.program ? nlohmann::json(dsl::print_canonical(*r.program)) : nlohmann::json(nullptr);
  j["pre_state"] = r.pre_state;
  j["post_state"] = r.post_state;
  j["diff"] = edit_script_to_json(diff(r.pre_state, r.post_state));
  j["confidence"] = {{"tag", r.tag_confidence}, {"normalize", r.norm_confidence}, {"interpret", r.interp_confidence}};
  j["errors"] = nlohmann::json::array();
  for (const auto& e : r.errors) j["errors"].push_back({{"stage", e.stage}, {"code", e.code}, {"message", e.message}});
  j["frozen"] = r.frozen;
  return j;
}

nlohmann::json to_json(const PipelineState& s) {
  nlohmann::json j;
  j["committed_state"] = s.committed_state;
  j["visible"] = s.visible();
  j["records"] = nlohmann::json::array();
  for (const auto& r : s.records) j["records"].push_back(to_json(r));
  j["finals_since_commit"] = s.finals_since_commit;
  j["commits"] = s.commits;
  j["transcript"] = current_transcript(s.transcript).text;
  return j;
}

}  // namespace dictate
