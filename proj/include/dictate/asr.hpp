#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace dictate {

struct AsrToken {
  std::string text;
  std::int64_t start_ms = 0;
  std::int64_t end_ms = 0;

  // Boundary assignment uses the midpoint; kept in doubled units to stay integral.
  std::int64_t midpoint_x2() const { return start_ms + end_ms; }

  friend bool operator==(const AsrToken&, const AsrToken&) = default;
};

struct AsrEvent {
  enum class Kind { partial, final };

  Kind kind = Kind::partial;
  std::string text;
  std::vector<AsrToken> tokens;
  // Alternatives for a final result. Stored and passed through, never consumed.
  std::vector<std::string> n_best;
  std::int64_t utterance_id = 0;

  bool is_final() const { return kind == Kind::final; }

  static AsrEvent partial(std::int64_t id, std::vector<AsrToken> tokens);
  static AsrEvent final_result(std::int64_t id, std::vector<AsrToken> tokens, std::vector<std::string> n_best = {});

  friend bool operator==(const AsrEvent&, const AsrEvent&) = default;
};

// Splits `text` on whitespace and spreads the words evenly over [start, end).
std::vector<AsrToken> spread_tokens(const std::string& text, std::int64_t start_ms, std::int64_t end_ms);

struct Transcript {
  std::vector<AsrEvent> finals;
  std::optional<AsrEvent> live_partial;
  // Survives callers dropping committed finals from the front.
  std::optional<std::int64_t> last_final_id;

  friend bool operator==(const Transcript&, const Transcript&) = default;
};

// Appends a final or replaces the live partial. A final clears the live
// partial; a partial or final for an utterance at or before the last final is
// stale, as is a partial older than the live one.
Transcript ingest(Transcript t, const AsrEvent& e);

struct TranscriptView {
  std::string text;
  std::vector<AsrToken> tokens;
  // Number of leading tokens that come from final results.
  std::size_t final_tokens = 0;
  // Token index one past each final result (the commit-eligible boundaries).
  std::vector<std::size_t> final_ends;
};

// Finals joined with single spaces, then the live partial.
TranscriptView current_transcript(const Transcript& t);

// Assigns each token to the interval (b[k-1], b[k]] holding its midpoint and
// returns one space-joined text per interval: always boundaries.size() + 1
// entries, some possibly empty.
std::vector<std::string> split_by_time(const Transcript& t, const std::vector<std::int64_t>& boundaries);
std::vector<std::string> split_by_time(const std::vector<AsrToken>& tokens, const std::vector<std::int64_t>& boundaries);

void to_json(nlohmann::json& j, const AsrToken& t);
void from_json(const nlohmann::json& j, AsrToken& t);
void to_json(nlohmann::json& j, const AsrEvent& e);
void from_json(const nlohmann::json& j, AsrEvent& e);

// JSON Lines: one event per line; blank lines are skipped.
std::vector<AsrEvent> read_event_log(std::istream& in);
void write_event_log(std::ostream& out, const std::vector<AsrEvent>& events);

}  // namespace dictate
