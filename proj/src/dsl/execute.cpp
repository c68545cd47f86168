#include "dictate/dsl/execute.hpp"

#include <algorithm>
#include <functional>
#include <optional>

#include "dictate/dsl/registry.hpp"
#include "dictate/dsl/resolve.hpp"
#include "dictate/dsl/similarity.hpp"
#include "dictate/dsl/units.hpp"
#include "dictate/errors.hpp"
#include "dictate/text.hpp"

namespace dictate::dsl {

using text::is_space;
using text::is_word_char;

namespace {

bool is_closing(char32_t c) {
  return c == U'.' || c == U',' || c == U';' || c == U':' || c == U'!' || c == U'?' || c == U')' || c == U']';
}

bool is_opening(char32_t c) { return c == U'(' || c == U'['; }

std::u32string capitalize_words(std::u32string_view s) {
  std::u32string out(s);
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (is_word_char(out[i]) && (i == 0 || !is_word_char(out[i - 1]))) out[i] = text::to_upper(out[i]);
  }
  return out;
}

// Replaces each span (sorted, non-overlapping) with fn(old text). The new
// selection runs from the first replacement's start to the last one's end.
DocumentState replace_spans(const DocumentState& d, const std::vector<Span>& spans,
                            const std::function<std::u32string(std::u32string_view)>& fn) {
  if (spans.empty()) return d;
  DocumentState out;
  std::size_t pos = 0;
  std::size_t sel_start = 0;
  std::size_t sel_end = 0;
  for (std::size_t i = 0; i < spans.size(); ++i) {
    Span s = spans[i];
    if (s.start < pos || s.end > d.content.size()) throw BoundsError("overlapping or out-of-range edit spans");
    out.content.append(d.content, pos, s.start - pos);
    if (i == 0) sel_start = out.content.size();
    out.content += fn(std::u32string_view(d.content).substr(s.start, s.length()));
    sel_end = out.content.size();
    pos = s.end;
  }
  out.content.append(d.content, pos);
  out.selection = {sel_start, sel_end};
  return out;
}

std::vector<Span> merge_overlapping(std::vector<Span> spans) {
  std::sort(spans.begin(), spans.end());
  std::vector<Span> out;
  for (Span s : spans) {
    if (!out.empty() && s.start <= out.back().end && !(s.empty() && s.start == out.back().end && !out.back().empty())) {
      out.back().end = std::max(out.back().end, s.end);
    } else {
      out.push_back(s);
    }
  }
  return out;
}

Span extent(const std::vector<Span>& spans) {
  Span out = spans.front();
  for (Span s : spans) {
    out.start = std::min(out.start, s.start);
    out.end = std::max(out.end, s.end);
  }
  return out;
}

class Executor {
 public:
  DocumentState run(const Expr& action, const DocumentState& d) {
    const auto& h = action.head;
    if (h == "do") {
      DocumentState cur = d;
      for (const auto& child : action.args) cur = run(child, cur);
      return cur;
    }

    const Expr* target_arg = nullptr;
    std::vector<const Expr*> targets;
    std::optional<std::u32string> literal;
    for (const auto& a : action.args) {
      if (a.kind == Expr::Kind::string) {
        literal = text::from_utf8(a.text);
      } else if (a.kind == Expr::Kind::call) {
        const HeadInfo* info = lookup(a.head);
        if (info == nullptr || info->category != Category::target) {
          throw ExecutionError("'" + h + "' expects target arguments, got '" + a.head + "'");
        }
        targets.push_back(&a);
      } else {
        throw ExecutionError("'" + h + "' does not take integer arguments");
      }
    }
    if (!targets.empty()) target_arg = targets.front();

    auto need_target = [&]() -> std::vector<Span> {
      if (target_arg == nullptr) throw ExecutionError("'" + h + "' requires a target");
      return resolve_target(d, *target_arg).spans;
    };
    auto need_literal = [&]() -> const std::u32string& {
      if (!literal) throw ExecutionError("'" + h + "' requires a text literal");
      return *literal;
    };

    if (h == "capitalize") return replace_spans(d, need_target(), capitalize_words);
    if (h == "lowercase") return replace_spans(d, need_target(), [](auto s) { return text::to_lower(s); });
    if (h == "allCaps") return replace_spans(d, need_target(), [](auto s) { return text::to_upper(s); });
    if (h == "quote") return replace_spans(d, need_target(), [](auto s) { return U"\"" + std::u32string(s) + U"\""; });
    if (h == "parenthesize") {
      return replace_spans(d, need_target(), [](auto s) { return U"(" + std::u32string(s) + U")"; });
    }
    if (h == "replace" || h == "respell") {
      auto replacement = h == "respell" ? render_spelled(need_literal()) : need_literal();
      return replace_spans(d, need_target(), [&](auto) { return replacement; });
    }
    if (h == "delete") {
      std::vector<Span> grown;
      for (Span s : need_target()) grown.push_back(join_whitespace(d.content, s));
      return replace_spans(d, merge_overlapping(grown), [](auto) { return std::u32string(); });
    }
    if (h == "insert" || h == "spell") {
      auto body = h == "spell" ? render_spelled(need_literal()) : need_literal();
      if (h == "spell" && target_arg != nullptr) {
        return replace_spans(d, need_target(), [&](auto) { return body; });
      }
      std::size_t at = target_arg == nullptr ? d.selection.focus : position_of(need_target().front());
      return apply_span_edit(d, {at, at}, body);
    }
    if (h == "moveCursor") {
      Span s = need_target().front();
      DocumentState out = d;
      out.selection = {s.start, s.end};
      return out;
    }
    if (h == "move") {
      if (targets.size() != 2) throw ExecutionError("'move' requires a source and a destination target");
      return move(d, resolve_target(d, *targets[0]).spans.front(), position_of(resolve_target(d, *targets[1]).spans.front()));
    }
    if (h == "combineSentences") return combine_sentences(d, extent(need_target()));
    if (h == "combine") return combine(d, extent(need_target()));
    if (h == "correction") {
      const auto& replacement = need_literal();
      if (target_arg != nullptr) return replace_spans(d, need_target(), [&](auto) { return replacement; });
      return apply_span_edit(d, correction_span(d, replacement), replacement);
    }
    throw ExecutionError("unknown action '" + h + "'");
  }

 private:
  static std::size_t position_of(Span s) { return s.empty() ? s.start : s.end; }

  static DocumentState move(const DocumentState& d, Span src, std::size_t dest) {
    if (src.start < dest && dest < src.end) throw ExecutionError("move destination lies inside the moved text");
    std::u32string moved = d.content.substr(src.start, src.length());
    Span removed = join_whitespace(d.content, src);
    std::u32string rest = d.content.substr(0, removed.start) + d.content.substr(removed.end);
    std::size_t at = dest;
    if (dest >= removed.end) {
      at = dest - removed.length();
    } else if (dest > removed.start) {
      at = removed.start;
    }
    std::u32string piece = moved;
    std::size_t lead = 0;
    if (at > 0 && !is_space(rest[at - 1]) && !moved.empty() && is_word_char(moved.front())) {
      piece.insert(piece.begin(), U' ');
      lead = 1;
    }
    if (at < rest.size() && is_word_char(rest[at]) && !moved.empty() && !is_space(moved.back())) piece.push_back(U' ');
    DocumentState out;
    out.content = rest.substr(0, at) + piece + rest.substr(at);
    out.selection = {at + lead, at + lead + moved.size()};
    return out;
  }

  static DocumentState combine_sentences(const DocumentState& d, Span region) {
    std::vector<Span> inside;
    for (Span s : sentence_spans(d.content)) {
      if (s.start < region.end && region.start < s.end) inside.push_back(s);
    }
    if (inside.size() < 2) throw ExecutionError("combineSentences needs at least two sentences");
    std::u32string out = d.content;
    std::size_t removed = 0;
    for (std::size_t i = inside.size() - 1; i > 0; --i) {
      Span a = inside[i - 1];
      Span b = inside[i];
      std::size_t cut = a.end;
      while (cut > a.start && text::is_sentence_terminator(out[cut - 1])) --cut;
      char32_t first = out[b.start];
      bool single = b.start + 1 >= out.size() || !is_word_char(out[b.start + 1]);
      bool lower_next = single ? (first != U'I') : (b.start + 1 < out.size() && text::to_upper(out[b.start + 1]) != out[b.start + 1]);
      if (lower_next) out[b.start] = text::to_lower(first);
      removed += (b.start - cut) - 1;
      out.replace(cut, b.start - cut, U" ");
    }
    DocumentState next;
    next.content = std::move(out);
    next.selection = {inside.front().start, inside.back().end - removed};
    return next;
  }

  static DocumentState combine(const DocumentState& d, Span region) {
    std::u32string merged;
    for (std::size_t i = region.start; i < region.end; ++i) {
      if (!is_space(d.content[i])) merged.push_back(d.content[i]);
    }
    if (merged.size() == region.length()) throw ExecutionError("combine found no separators to remove");
    DocumentState out = apply_span_edit(d, region, merged);
    return out;
  }

  static Span correction_span(const DocumentState& d, std::u32string_view replacement) {
    std::size_t cursor = d.selection.hi();
    std::size_t window = cursor > kCorrectionWindow ? cursor - kCorrectionWindow : 0;
    std::vector<std::size_t> starts;
    std::vector<std::size_t> ends;
    for (const auto& tok : tokenize(d.content)) {
      if (tok.kind == TokenKind::space) continue;
      if (tok.span.start >= window && tok.span.start < cursor) starts.push_back(tok.span.start);
      if (tok.span.end > window && tok.span.end <= cursor) ends.push_back(tok.span.end);
    }
    auto query = text::trim(replacement);
    std::optional<Span> best;
    double best_score = 0.0;
    for (std::size_t s : starts) {
      for (std::size_t e : ends) {
        if (e <= s) continue;
        double score = similarity(std::u32string_view(d.content).substr(s, e - s), query);
        bool better = !best || score > best_score || (score == best_score && (e > best->end || (e == best->end && s < best->start)));
        if (better) {
          best = Span{s, e};
          best_score = score;
        }
      }
    }
    if (!best || best_score <= 0.0) throw ResolutionError("(correction) near the cursor");
    return *best;
  }
};

}  // namespace

Span join_whitespace(std::u32string_view c, Span s) {
  if (s.empty() || is_space(c[s.start]) || is_space(c[s.end - 1])) return s;
  bool space_before = s.start > 0 && is_space(c[s.start - 1]);
  if (space_before && (s.end == c.size() || is_space(c[s.end]) || is_closing(c[s.end]))) return {s.start - 1, s.end};
  bool open_before = s.start == 0 || is_opening(c[s.start - 1]);
  if (open_before && s.end < c.size() && is_space(c[s.end])) return {s.start, s.end + 1};
  return s;
}

std::u32string render_spelled(std::u32string_view literal) {
  std::vector<std::u32string> pieces;
  std::u32string cur;
  for (char32_t c : literal) {
    if (is_space(c) || c == U'-' || c == U',' || c == U'.') {
      if (!cur.empty()) pieces.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) pieces.push_back(std::move(cur));
  bool letters = !pieces.empty() && std::all_of(pieces.begin(), pieces.end(), [](const auto& p) { return p.size() == 1; });
  if (!letters) return std::u32string(text::trim(literal));
  std::u32string out;
  for (const auto& p : pieces) out += p;
  return out;
}

DocumentState execute(const Expr& action, const DocumentState& d) {
  d.validate();
  return Executor{}.run(action, d);
}

DocumentState execute(const Program& program, const DocumentState& d) { return execute(program.root, d); }

}  // namespace dictate::dsl
