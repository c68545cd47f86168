#include "dictate/segmentation.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>

#include "dictate/errors.hpp"

namespace dictate {

std::string_view to_string(Tag t) {
  static constexpr std::array<std::string_view, 5> names{"B", "I", "O", "E", "S"};
  return names[static_cast<std::size_t>(t)];
}

std::string_view to_string(Label l) { return l == Label::command ? "command" : "dictation"; }

Tag tag_from_string(std::string_view s) {
  if (s == "B") return Tag::B;
  if (s == "I") return Tag::I;
  if (s == "O") return Tag::O;
  if (s == "E") return Tag::E;
  if (s == "S") return Tag::S;
  throw SchemaError("tag", "unknown tag '" + std::string(s) + "'");
}

Label label_from_string(std::string_view s) {
  if (s == "command") return Label::command;
  if (s == "dictation") return Label::dictation;
  throw SchemaError("label", "unknown label '" + std::string(s) + "'");
}

std::vector<Tag> repair(std::vector<Tag> tags) {
  std::size_t open = 0;
  bool inside = false;
  auto close_before = [&](std::size_t i) {
    tags[i - 1] = i - 1 == open ? Tag::S : Tag::E;
    inside = false;
  };
  for (std::size_t i = 0; i < tags.size(); ++i) {
    Tag t = tags[i];
    if (inside) {
      if (t == Tag::I) continue;
      if (t == Tag::E) {
        inside = false;
        continue;
      }
      close_before(i);
    }
    switch (t) {
      case Tag::B: inside = true; open = i; break;
      case Tag::I: tags[i] = Tag::O; break;
      case Tag::E: tags[i] = Tag::S; break;
      default: break;
    }
  }
  if (inside) close_before(tags.size());
  return tags;
}

std::string join_token_text(const std::vector<AsrToken>& tokens, std::size_t begin, std::size_t end) {
  std::string out;
  for (std::size_t i = begin; i < end; ++i) {
    if (i > begin) out += ' ';
    out += tokens[i].text;
  }
  return out;
}

std::vector<LabeledSegment> decode(const std::vector<Tag>& raw, const std::vector<AsrToken>& tokens) {
  if (raw.size() != tokens.size()) {
    throw AlignmentError(std::to_string(raw.size()) + " tags for " + std::to_string(tokens.size()) + " tokens");
  }
  auto tags = repair(raw);
  std::vector<LabeledSegment> out;
  auto emit = [&](std::size_t b, std::size_t e, Label l) { out.push_back({b, e, l, join_token_text(tokens, b, e)}); };
  std::size_t i = 0;
  while (i < tags.size()) {
    std::size_t j = i + 1;
    switch (tags[i]) {
      case Tag::O:
        while (j < tags.size() && tags[j] == Tag::O) ++j;
        emit(i, j, Label::dictation);
        break;
      case Tag::B:
        while (tags[j - 1] != Tag::E) ++j;
        emit(i, j, Label::command);
        break;
      default:
        emit(i, j, Label::command);
        break;
    }
    i = j;
  }
  return out;
}

std::vector<LabeledSegment> decode(const TagSequence& tags, const std::vector<AsrToken>& tokens) {
  return decode(tags.tags, tokens);
}

TagSequence encode(const std::vector<LabeledSegment>& segments) {
  TagSequence out;
  std::size_t pos = 0;
  for (std::size_t k = 0; k < segments.size(); ++k) {
    const auto& s = segments[k];
    if (s.begin != pos || s.end <= s.begin) {
      throw PartitionError("segment " + std::to_string(k) + " does not continue the partition at token " + std::to_string(pos));
    }
    if (k > 0 && !s.is_command() && !segments[k - 1].is_command()) {
      throw PartitionError("segments " + std::to_string(k - 1) + " and " + std::to_string(k) + " are adjacent dictations");
    }
    std::size_t n = s.end - s.begin;
    if (!s.is_command()) {
      out.tags.insert(out.tags.end(), n, Tag::O);
    } else if (n == 1) {
      out.tags.push_back(Tag::S);
    } else {
      out.tags.push_back(Tag::B);
      out.tags.insert(out.tags.end(), n - 2, Tag::I);
      out.tags.push_back(Tag::E);
    }
    pos = s.end;
  }
  out.confidences.assign(out.tags.size(), 0.0);
  return out;
}

std::vector<LabeledSegment> gold_from_keys(const std::vector<AsrToken>& tokens, const std::vector<KeyInterval>& keys) {
  // Owning key interval per token, or -1.
  std::vector<long> owner(tokens.size(), -1);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    auto m2 = tokens[i].midpoint_x2();
    for (std::size_t k = 0; k < keys.size(); ++k) {
      if (m2 > 2 * keys[k].down_ms && m2 <= 2 * keys[k].up_ms) {
        owner[i] = static_cast<long>(k);
        break;
      }
    }
  }
  std::vector<LabeledSegment> out;
  std::size_t i = 0;
  while (i < tokens.size()) {
    std::size_t j = i + 1;
    while (j < tokens.size() && owner[j] == owner[i]) ++j;
    out.push_back({i, j, owner[i] < 0 ? Label::dictation : Label::command, join_token_text(tokens, i, j)});
    i = j;
  }
  return out;
}

namespace {

std::string bare_lower(std::string_view token) {
  std::string out;
  for (char c : token) {
    if (std::isalpha(static_cast<unsigned char>(c))) out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

bool ends_sentence(std::string_view token) {
  return !token.empty() && (token.back() == '.' || token.back() == '!' || token.back() == '?');
}

}  // namespace

bool is_trigger_word(std::string_view token) {
  static const std::array<std::string_view, 24> verbs{
      "capitalize", "capitalise", "uncapitalize", "lowercase", "uppercase", "delete", "remove", "erase",
      "replace",    "change",     "insert",       "add",       "put",       "move",   "quote",  "unquote",
      "parenthesize", "spell",    "respell",      "combine",   "merge",     "select", "correct", "undo"};
  auto w = bare_lower(token);
  return std::find(verbs.begin(), verbs.end(), w) != verbs.end();
}

TagSequence baseline_tag(const TranscriptView& t) {
  const auto& tokens = t.tokens;
  const double sure = std::log(0.9);
  const double unsure = std::log(0.5);
  TagSequence out;
  out.tags.assign(tokens.size(), Tag::O);
  out.confidences.assign(tokens.size(), sure);

  auto final_end = [&](std::size_t i) {
    for (auto e : t.final_ends)
      if (e > i) return e;
    return tokens.size();
  };
  auto sentence_start = [&](std::size_t i) {
    if (i == 0 || ends_sentence(tokens[i - 1].text)) return true;
    return std::find(t.final_ends.begin(), t.final_ends.end(), i) != t.final_ends.end();
  };

  std::size_t i = 0;
  while (i < tokens.size()) {
    if (is_trigger_word(tokens[i].text) && sentence_start(i)) {
      std::size_t e = final_end(i);
      if (e - i == 1) {
        out.tags[i] = Tag::S;
      } else {
        out.tags[i] = Tag::B;
        for (std::size_t k = i + 1; k + 1 < e; ++k) out.tags[k] = Tag::I;
        out.tags[e - 1] = Tag::E;
      }
      i = e;
      continue;
    }
    if (is_trigger_word(tokens[i].text)) out.confidences[i] = unsure;
    ++i;
  }
  return out;
}

SegScore seg_metrics(const std::vector<LabeledSegment>& pred, const std::vector<LabeledSegment>& gold) {
  auto extent = [](const std::vector<LabeledSegment>& v) -> std::pair<std::size_t, std::size_t> {
    if (v.empty()) return {0, 0};
    return {v.front().begin, v.back().end};
  };
  if (extent(pred) != extent(gold)) throw AlignmentError("predicted and gold segmentations cover different tokens");
  std::size_t hits = 0;
  for (const auto& p : pred) {
    hits += std::any_of(gold.begin(), gold.end(), [&](const LabeledSegment& g) { return g.same_span(p); });
  }
  SegScore s;
  s.em = pred.size() == gold.size() && hits == gold.size();
  if (pred.empty() && gold.empty()) {
    s.precision = s.recall = s.f1 = 1.0;
    return s;
  }
  s.precision = pred.empty() ? 0.0 : static_cast<double>(hits) / static_cast<double>(pred.size());
  s.recall = gold.empty() ? 0.0 : static_cast<double>(hits) / static_cast<double>(gold.size());
  s.f1 = hits == 0 ? 0.0 : 2 * s.precision * s.recall / (s.precision + s.recall);
  return s;
}

TagSequence KeyTagger::tag(const TranscriptView& t) const { return encode(gold_from_keys(t.tokens, keys_)); }

void to_json(nlohmann::json& j, const LabeledSegment& s) {
  j = {{"begin", s.begin}, {"end", s.end}, {"label", to_string(s.label)}, {"text", s.text}};
}

void from_json(const nlohmann::json& j, LabeledSegment& s) {
  s.begin = j.at("begin").get<std::size_t>();
  s.end = j.at("end").get<std::size_t>();
  s.label = label_from_string(j.at("label").get<std::string>());
  s.text = j.value("text", "");
}

void to_json(nlohmann::json& j, const KeyInterval& k) { j = nlohmann::json::array({k.down_ms, k.up_ms}); }

void from_json(const nlohmann::json& j, KeyInterval& k) {
  k.down_ms = j.at(0).get<std::int64_t>();
  k.up_ms = j.at(1).get<std::int64_t>();
  if (k.up_ms < k.down_ms) throw SchemaError("key_intervals", "key released before it was pressed");
}

void to_json(nlohmann::json& j, const TagSequence& t) {
  j = nlohmann::json::object();
  j["tags"] = nlohmann::json::array();
  for (Tag tag : t.tags) j["tags"].push_back(to_string(tag));
  j["confidences"] = t.confidences;
}

void from_json(const nlohmann::json& j, TagSequence& t) {
  t.tags.clear();
  for (const auto& s : j.at("tags")) t.tags.push_back(tag_from_string(s.get<std::string>()));
  t.confidences = j.value("confidences", std::vector<double>(t.tags.size(), 0.0));
  if (t.confidences.size() != t.tags.size()) throw SchemaError("confidences", "one confidence per tag required");
}

}  // namespace dictate
