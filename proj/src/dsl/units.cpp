#include "dictate/dsl/units.hpp"

#include <algorithm>

#include "dictate/text.hpp"

namespace dictate::dsl {

using text::is_space;
using text::is_word_char;

std::vector<Token> tokenize(std::u32string_view t) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < t.size()) {
    std::size_t j = i + 1;
    TokenKind kind = TokenKind::punct;
    if (is_word_char(t[i])) {
      kind = TokenKind::word;
      while (j < t.size() && is_word_char(t[j])) ++j;
    } else if (is_space(t[i])) {
      kind = TokenKind::space;
      while (j < t.size() && is_space(t[j])) ++j;
    }
    out.push_back({{i, j}, kind});
    i = j;
  }
  return out;
}

std::vector<Span> word_spans(std::u32string_view t) {
  std::vector<Span> out;
  for (const auto& tok : tokenize(t)) {
    if (tok.kind == TokenKind::word) out.push_back(tok.span);
  }
  return out;
}

std::vector<Span> letter_spans(std::u32string_view t) {
  std::vector<Span> out;
  out.reserve(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) out.push_back({i, i + 1});
  return out;
}

std::vector<Span> sentence_spans(std::u32string_view t) {
  std::vector<Span> out;
  std::size_t i = 0;
  const std::size_t n = t.size();
  while (i < n) {
    while (i < n && is_space(t[i])) ++i;
    if (i >= n) break;
    std::size_t start = i;
    std::size_t end = n;
    while (i < n) {
      if (text::is_sentence_terminator(t[i])) {
        std::size_t j = i;
        while (j < n && text::is_sentence_terminator(t[j])) ++j;
        if (j == n || is_space(t[j])) {
          end = j;
          i = j;
          break;
        }
        i = j;
      } else {
        ++i;
      }
    }
    if (end == n) {
      while (end > start && is_space(t[end - 1])) --end;
    }
    out.push_back({start, end});
  }
  return out;
}

std::vector<Span> line_spans(std::u32string_view t) {
  std::vector<Span> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= t.size(); ++i) {
    if (i == t.size() || t[i] == U'\n') {
      std::size_t end = i;
      if (end > start && t[end - 1] == U'\r') --end;
      if (end > start) out.push_back({start, end});
      start = i + 1;
    }
  }
  return out;
}

std::vector<Span> phrase_spans(std::u32string_view t) {
  std::vector<Span> out;
  auto push_trimmed = [&](std::size_t b, std::size_t e) {
    while (b < e && is_space(t[b])) ++b;
    while (e > b && is_space(t[e - 1])) --e;
    if (e > b) out.push_back({b, e});
  };
  for (const auto& s : sentence_spans(t)) {
    std::size_t end = s.end;
    while (end > s.start && text::is_sentence_terminator(t[end - 1])) --end;
    std::size_t piece = s.start;
    for (std::size_t i = s.start; i < end; ++i) {
      if (t[i] == U',' || t[i] == U';' || t[i] == U':') {
        push_trimmed(piece, i);
        piece = i + 1;
      }
    }
    push_trimmed(piece, end);
  }
  return out;
}

std::vector<Span> passage_spans(std::u32string_view t) {
  std::vector<Span> out;
  std::size_t first = t.size();
  std::size_t last = 0;
  bool open = false;
  std::size_t line_start = 0;
  for (std::size_t i = 0; i <= t.size(); ++i) {
    if (i == t.size() || t[i] == U'\n') {
      auto line = t.substr(line_start, i - line_start);
      if (all_space(line)) {
        if (open) out.push_back({first, last});
        open = false;
      } else {
        std::size_t b = line_start;
        while (is_space(t[b])) ++b;
        std::size_t e = i;
        while (is_space(t[e - 1])) --e;
        if (!open) first = b;
        last = e;
        open = true;
      }
      line_start = i + 1;
    }
  }
  if (open) out.push_back({first, last});
  return out;
}

std::vector<Span> parenthetical_spans(std::u32string_view t) {
  std::vector<Span> out;
  std::vector<std::size_t> stack;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] == U'(') {
      stack.push_back(i);
    } else if (t[i] == U')' && !stack.empty()) {
      out.push_back({stack.back(), i + 1});
      stack.pop_back();
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<Span> extra_spans(std::u32string_view t) {
  std::vector<Span> out;
  auto tokens = tokenize(t);
  for (std::size_t k = 0; k < tokens.size(); ++k) {
    const auto& tok = tokens[k];
    if (tok.kind == TokenKind::space && tok.span.length() >= 2) {
      out.push_back({tok.span.start + 1, tok.span.end});
    }
    if (tok.kind == TokenKind::word && k + 2 < tokens.size() && tokens[k + 1].kind == TokenKind::space &&
        tokens[k + 2].kind == TokenKind::word) {
      auto a = t.substr(tok.span.start, tok.span.length());
      const auto& next = tokens[k + 2].span;
      auto b = t.substr(next.start, next.length());
      if (text::to_lower(a) == text::to_lower(b)) out.push_back({tok.span.end, next.end});
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<Span> position_spans(std::u32string_view t) {
  std::vector<Span> out;
  out.reserve(t.size() + 1);
  for (std::size_t i = 0; i <= t.size(); ++i) out.push_back({i, i});
  return out;
}

std::vector<Span> unit_spans(std::u32string_view t, Unit unit) {
  switch (unit) {
    case Unit::word: return word_spans(t);
    case Unit::letter: return letter_spans(t);
    case Unit::sentence: return sentence_spans(t);
    case Unit::line: return line_spans(t);
    case Unit::phrase: return phrase_spans(t);
    case Unit::passage: return passage_spans(t);
    case Unit::text: return {Span{0, t.size()}};
    case Unit::position: return position_spans(t);
  }
  return {};
}

bool all_space(std::u32string_view t) {
  return std::all_of(t.begin(), t.end(), [](char32_t c) { return is_space(c); });
}

}  // namespace dictate::dsl
