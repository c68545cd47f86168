#pragma once

#include <string_view>
#include <vector>

#include "dictate/doc.hpp"

namespace dictate::dsl {

// Tokenization rules, declared once for the resolver and for anything that
// needs to agree with it:
//   word          maximal run of word characters
//   letter        any single scalar value
//   sentence      from its first non-space character through a run of . ! ?
//                 followed by whitespace or end of text (or through the last
//                 non-space character when unterminated)
//   line          text between newlines, without the newline; empty lines skipped
//   phrase        a sentence (minus its terminator) split at , ; : and trimmed
//   passage       non-blank lines grouped between blank lines, trimmed
//   parenthetical balanced "( ... )" including the parentheses
//   extra         the surplus of a whitespace run longer than one character, or
//                 a repeated word together with the whitespace before it
enum class Unit { word, letter, sentence, line, phrase, passage, text, position };

enum class TokenKind { word, space, punct };

struct Token {
  Span span;
  TokenKind kind;
};

// Words, whitespace runs, and single other characters, in order, covering the text.
std::vector<Token> tokenize(std::u32string_view text);

std::vector<Span> word_spans(std::u32string_view text);
std::vector<Span> letter_spans(std::u32string_view text);
std::vector<Span> sentence_spans(std::u32string_view text);
std::vector<Span> line_spans(std::u32string_view text);
std::vector<Span> phrase_spans(std::u32string_view text);
std::vector<Span> passage_spans(std::u32string_view text);
std::vector<Span> parenthetical_spans(std::u32string_view text);
std::vector<Span> extra_spans(std::u32string_view text);
// Zero-width spans at every offset 0..n.
std::vector<Span> position_spans(std::u32string_view text);

std::vector<Span> unit_spans(std::u32string_view text, Unit unit);

bool all_space(std::u32string_view text);

}  // namespace dictate::dsl
