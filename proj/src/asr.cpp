#include "dictate/asr.hpp"

#include <istream>
#include <ostream>
#include <sstream>

#include "dictate/errors.hpp"

namespace dictate {

namespace {

std::string join_tokens(const std::vector<AsrToken>& tokens) {
  std::string out;
  for (const auto& tok : tokens) {
    if (!out.empty()) out += ' ';
    out += tok.text;
  }
  return out;
}

void check_times(const std::vector<AsrToken>& tokens) {
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i].end_ms < tokens[i].start_ms) throw SchemaError("tokens/" + std::to_string(i), "end before start");
    if (i > 0 && tokens[i].start_ms < tokens[i - 1].start_ms) {
      throw SchemaError("tokens/" + std::to_string(i), "token times must be non-decreasing");
    }
  }
}

}  // namespace

AsrEvent AsrEvent::partial(std::int64_t id, std::vector<AsrToken> tokens) {
  AsrEvent e;
  e.kind = Kind::partial;
  e.utterance_id = id;
  e.text = join_tokens(tokens);
  e.tokens = std::move(tokens);
  return e;
}

AsrEvent AsrEvent::final_result(std::int64_t id, std::vector<AsrToken> tokens, std::vector<std::string> n_best) {
  AsrEvent e = partial(id, std::move(tokens));
  e.kind = Kind::final;
  e.n_best = std::move(n_best);
  return e;
}

std::vector<AsrToken> spread_tokens(const std::string& text, std::int64_t start_ms, std::int64_t end_ms) {
  std::istringstream in(text);
  std::vector<std::string> words;
  for (std::string w; in >> w;) words.push_back(w);
  std::vector<AsrToken> out;
  auto n = static_cast<std::int64_t>(words.size());
  for (std::int64_t i = 0; i < n; ++i) {
    out.push_back({words[i], start_ms + (end_ms - start_ms) * i / n, start_ms + (end_ms - start_ms) * (i + 1) / n});
  }
  return out;
}

Transcript ingest(Transcript t, const AsrEvent& e) {
  if (t.last_final_id && e.utterance_id <= *t.last_final_id) {
    throw StaleEventError("utterance " + std::to_string(e.utterance_id) + " is already final");
  }
  if (t.live_partial && e.utterance_id < t.live_partial->utterance_id) {
    throw StaleEventError("utterance " + std::to_string(e.utterance_id) + " is older than the live partial");
  }
  if (e.is_final()) {
    t.finals.push_back(e);
    t.last_final_id = e.utterance_id;
    t.live_partial.reset();
  } else {
    t.live_partial = e;
  }
  return t;
}

TranscriptView current_transcript(const Transcript& t) {
  TranscriptView v;
  auto add = [&](const AsrEvent& e) {
    if (e.text.empty()) return;
    if (!v.text.empty()) v.text += ' ';
    v.text += e.text;
    v.tokens.insert(v.tokens.end(), e.tokens.begin(), e.tokens.end());
  };
  for (const auto& f : t.finals) {
    add(f);
    v.final_ends.push_back(v.tokens.size());
  }
  v.final_tokens = v.tokens.size();
  if (t.live_partial) add(*t.live_partial);
  return v;
}

std::vector<std::string> split_by_time(const std::vector<AsrToken>& tokens, const std::vector<std::int64_t>& boundaries) {
  std::vector<std::string> out(boundaries.size() + 1);
  std::size_t k = 0;
  for (const auto& tok : tokens) {
    // Interval k is (b[k-1], b[k]]; compare doubled values to avoid halves.
    while (k < boundaries.size() && tok.midpoint_x2() > 2 * boundaries[k]) ++k;
    if (!out[k].empty()) out[k] += ' ';
    out[k] += tok.text;
  }
  return out;
}

std::vector<std::string> split_by_time(const Transcript& t, const std::vector<std::int64_t>& boundaries) {
  return split_by_time(current_transcript(t).tokens, boundaries);
}

void to_json(nlohmann::json& j, const AsrToken& t) { j = {{"text", t.text}, {"start_ms", t.start_ms}, {"end_ms", t.end_ms}}; }

void from_json(const nlohmann::json& j, AsrToken& t) {
  t.text = j.at("text").get<std::string>();
  t.start_ms = j.at("start_ms").get<std::int64_t>();
  t.end_ms = j.at("end_ms").get<std::int64_t>();
}

void to_json(nlohmann::json& j, const AsrEvent& e) {
  j = {{"kind", e.is_final() ? "final" : "partial"},
       {"text", e.text},
       {"tokens", e.tokens},
       {"n_best", e.n_best},
       {"utterance_id", e.utterance_id}};
}

void from_json(const nlohmann::json& j, AsrEvent& e) {
  auto kind = j.at("kind").get<std::string>();
  if (kind != "partial" && kind != "final") throw SchemaError("kind", "expected \"partial\" or \"final\"");
  e.kind = kind == "final" ? AsrEvent::Kind::final : AsrEvent::Kind::partial;
  e.tokens = j.at("tokens").get<std::vector<AsrToken>>();
  e.text = j.contains("text") ? j.at("text").get<std::string>() : join_tokens(e.tokens);
  if (e.text != join_tokens(e.tokens)) throw SchemaError("text", "must equal the space-joined token texts");
  e.n_best = j.value("n_best", std::vector<std::string>{});
  e.utterance_id = j.at("utterance_id").get<std::int64_t>();
  check_times(e.tokens);
}

std::vector<AsrEvent> read_event_log(std::istream& in) {
  std::vector<AsrEvent> out;
  std::size_t line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(nlohmann::json::parse(line).get<AsrEvent>());
    } catch (const nlohmann::json::exception& e) {
      throw SchemaError("line " + std::to_string(line_no), e.what());
    } catch (const SchemaError& e) {
      throw SchemaError("line " + std::to_string(line_no) + "/" + e.path(), e.detail());
    }
  }
  return out;
}

void write_event_log(std::ostream& out, const std::vector<AsrEvent>& events) {
  for (const auto& e : events) out << nlohmann::json(e).dump() << '\n';
}

}  // namespace dictate
