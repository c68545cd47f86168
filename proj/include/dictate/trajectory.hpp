#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dictate/asr.hpp"
#include "dictate/doc.hpp"
#include "dictate/dsl/ast.hpp"
#include "dictate/pipeline.hpp"
#include "dictate/segmentation.hpp"

namespace dictate {

enum class Task { replicate_doc, elaborate_doc, replicate_op };

std::string to_string(Task t);
Task task_from_string(const std::string& s);

inline constexpr int kTrajectoryFormatVersion = 1;

// Gold annotation for one segment of the final transcript version.
struct GoldSegment {
  LabeledSegment segment;
  std::int64_t start_ms = 0;
  // Commands only.
  std::optional<std::string> normalized;
  std::optional<dsl::Program> program;
  DocumentState post_state;

  friend bool operator==(const GoldSegment&, const GoldSegment&) = default;
};

struct PartialSegment {
  LabeledSegment segment;
  std::int64_t start_ms = 0;
  std::optional<std::string> normalized;

  friend bool operator==(const PartialSegment&, const PartialSegment&) = default;
};

// Gold labels for the transcript as it stood right after a partial event.
struct PartialVersion {
  std::size_t event_index = 0;
  std::vector<PartialSegment> segments;

  friend bool operator==(const PartialVersion&, const PartialVersion&) = default;
};

struct Trajectory {
  std::string id;
  Task task = Task::replicate_doc;
  std::string prompt;
  DocumentState initial_state;
  std::vector<AsrEvent> events;
  std::vector<KeyInterval> key_intervals;
  std::vector<GoldSegment> segments;
  std::vector<PartialVersion> partial_versions;

  // Transcript after every event.
  Transcript final_transcript() const;
  // Pre-state of gold segment i.
  const DocumentState& pre_state(std::size_t i) const { return i == 0 ? initial_state : segments[i - 1].post_state; }

  friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

nlohmann::json to_json(const Trajectory& t);
// Structural decoding only; throws SchemaError with the offending field path.
Trajectory trajectory_from_json(const nlohmann::json& j);

// Schema-level invariants (event order, segments tile the final transcript
// and agree with the key intervals, commands carry normalizations, dictations
// do not) throw SchemaError; a dictation whose post-state does not follow from
// its pre-state throws ChainError naming the segment.
void validate(const Trajectory& t);

// The text a dictation segment contributes: its tokens, preceded by a space
// unless it opens the transcript.
std::string dictation_insert_text(const LabeledSegment& s);

Trajectory load_trajectory(const std::filesystem::path& path);
// Writes through a temporary file and renames it into place.
void save_trajectory(const Trajectory& t, const std::filesystem::path& path);
// Every *.json under `root`, sorted by path.
std::vector<std::filesystem::path> corpus_files(const std::filesystem::path& root);
std::vector<Trajectory> load_corpus(const std::filesystem::path& root);

struct DeriveResult {
  Trajectory trajectory;
  std::vector<std::string> warnings;
};

// Fills partial_versions: each partial event's transcript is segmented with
// the key intervals and every command segment copies the normalization of the
// final-version command that starts at the same time. No states or programs
// are copied. Unmatched segments produce a warning and stay unnormalized.
DeriveResult derive_partial_golds(const Trajectory& t);

// Gold stages driven by the trajectory's own annotations.
Stages gold_stages(const Trajectory& t);

struct AuditFailure {
  std::size_t segment = 0;
  std::string message;
};

struct ReplayReport {
  std::vector<DocumentState> states;
  std::optional<std::size_t> first_mismatch;
  std::string mismatch;
  std::vector<AuditFailure> audit;

  bool ok() const { return !first_mismatch && audit.empty(); }
};

// Drives the pipeline with gold stages over the recorded events (commits off,
// so every record stays comparable) and checks each state against gold; then
// checks that each annotated program executes from the gold pre-state to a
// state matching the gold post-state.
ReplayReport replay_gold(const Trajectory& t);

struct EvalRow {
  std::string trajectory;
  std::string kind;  // "segmentation" or "command"
  std::size_t first_segment = 0;
  std::size_t num_segments = 0;
  std::optional<bool> seg_em;
  std::optional<double> seg_f1;
  std::optional<bool> norm_em;
  std::optional<bool> state_em;
  std::optional<bool> program_em;
  std::string error;
};

struct EvalReport {
  std::size_t trajectories = 0;
  std::size_t windows = 0;
  std::size_t commands = 0;
  std::size_t program_commands = 0;
  double seg_em = 0.0;
  double seg_f1 = 0.0;         // macro over windows
  double seg_f1_pooled = 0.0;  // one precision/recall over all windows
  double norm_em = 0.0;
  double state_em = 0.0;
  std::optional<double> program_em;  // null when no command has a gold program
  std::vector<EvalRow> rows;
};

using StageFactory = std::function<Stages(const Trajectory&)>;

// Segmentation windows of 1-4 consecutive gold segments: first segment index
// and length, in order.
std::vector<std::pair<std::size_t, std::size_t>> segmentation_windows(std::size_t segments, std::size_t max_len = 4);

struct EvalOptions {
  unsigned jobs = 0;  // 0: one per hardware thread
  // Skip the normalizer and hand the interpreter the gold normalization
  // (interpretation in isolation) instead of the ASR text.
  bool gold_normalized = false;
};

// Segmentation over every window; normalization and interpretation over every
// command given its gold pre-state and ASR text. Trajectories run in parallel;
// stage errors count as misses.
EvalReport evaluate(const std::vector<Trajectory>& corpus, const StageFactory& stages, const EvalOptions& options = {});

nlohmann::json to_json(const EvalReport& r);
std::string to_csv(const EvalReport& r);

struct TaskCounts {
  std::size_t trajectories = 0;
  std::size_t dictation_ops = 0;
  std::size_t command_ops = 0;
};

// Trajectory and op counts per task and overall.
nlohmann::json corpus_stats(const std::vector<Trajectory>& corpus);

}  // namespace dictate
