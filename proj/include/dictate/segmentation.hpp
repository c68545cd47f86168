#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "dictate/asr.hpp"

namespace dictate {

enum class Tag { B, I, O, E, S };
enum class Label { dictation, command };

std::string_view to_string(Tag t);
std::string_view to_string(Label l);
Tag tag_from_string(std::string_view s);
Label label_from_string(std::string_view s);

struct TagSequence {
  std::vector<Tag> tags;
  // Log-probability per tag.
  std::vector<double> confidences;

  friend bool operator==(const TagSequence&, const TagSequence&) = default;
};

// Tokens [begin, end) of the current transcript.
struct LabeledSegment {
  std::size_t begin = 0;
  std::size_t end = 0;
  Label label = Label::dictation;
  std::string text;

  bool is_command() const { return label == Label::command; }
  bool same_span(const LabeledSegment& o) const { return begin == o.begin && end == o.end && label == o.label; }

  friend bool operator==(const LabeledSegment&, const LabeledSegment&) = default;
};

struct KeyInterval {
  std::int64_t down_ms = 0;
  std::int64_t up_ms = 0;

  friend bool operator==(const KeyInterval&, const KeyInterval&) = default;
};

// Deterministic fix-up of an ill-formed sequence: an unclosed B run is closed
// on the token before the next B/O/S (or the last token), an orphan I becomes
// O and an orphan E becomes S.
std::vector<Tag> repair(std::vector<Tag> tags);

// Commands are B..E runs and S tokens, dictations are maximal O runs.
// Throws AlignmentError when tags and tokens differ in length.
std::vector<LabeledSegment> decode(const TagSequence& tags, const std::vector<AsrToken>& tokens);
std::vector<LabeledSegment> decode(const std::vector<Tag>& tags, const std::vector<AsrToken>& tokens);

// Inverse of decode; confidences are all zero. Throws PartitionError unless the
// segments tile [0, n) with no empty segment and no two adjacent dictations.
TagSequence encode(const std::vector<LabeledSegment>& segments);

// Tokens whose midpoint lies in (down, up] of a key interval form one command
// segment per interval; the rest form dictation segments.
std::vector<LabeledSegment> gold_from_keys(const std::vector<AsrToken>& tokens, const std::vector<KeyInterval>& keys);

std::string join_token_text(const std::vector<AsrToken>& tokens, std::size_t begin, std::size_t end);

// Rule-based tagger: a sentence that opens with a command verb starts a
// command that runs to the end of its final result (or of the transcript).
// Each tag gets ln 0.9, except a trigger word left outside a command, which
// gets ln 0.5.
TagSequence baseline_tag(const TranscriptView& t);
bool is_trigger_word(std::string_view token);

struct SegScore {
  bool em = false;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Throws AlignmentError when the two do not partition the same token range.
SegScore seg_metrics(const std::vector<LabeledSegment>& pred, const std::vector<LabeledSegment>& gold);

class Tagger {
 public:
  virtual ~Tagger() = default;
  // Must be safe to call concurrently.
  virtual TagSequence tag(const TranscriptView& t) const = 0;
};

class BaselineTagger : public Tagger {
 public:
  TagSequence tag(const TranscriptView& t) const override { return baseline_tag(t); }
};

// Gold segmentation from demonstrator key presses, with probability 1.
class KeyTagger : public Tagger {
 public:
  explicit KeyTagger(std::vector<KeyInterval> keys) : keys_(std::move(keys)) {}
  TagSequence tag(const TranscriptView& t) const override;

 private:
  std::vector<KeyInterval> keys_;
};

void to_json(nlohmann::json& j, const LabeledSegment& s);
void from_json(const nlohmann::json& j, LabeledSegment& s);
void to_json(nlohmann::json& j, const KeyInterval& k);
void from_json(const nlohmann::json& j, KeyInterval& k);
void to_json(nlohmann::json& j, const TagSequence& t);
void from_json(const nlohmann::json& j, TagSequence& t);

}  // namespace dictate
