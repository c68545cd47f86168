#pragma once

#include <string>
#include <string_view>

namespace dictate::text {

// Document offsets are counted in Unicode scalar values, so document content
// lives in std::u32string. Everything that crosses a file or wire boundary is
// UTF-8.

std::u32string from_utf8(std::string_view utf8);
std::string to_utf8(std::u32string_view text);

bool is_space(char32_t c);
// Alphanumeric for tokenization: ASCII letters/digits and any non-ASCII scalar
// that is not whitespace or general punctuation.
bool is_word_char(char32_t c);
bool is_sentence_terminator(char32_t c);

char32_t to_lower(char32_t c);
char32_t to_upper(char32_t c);
std::u32string to_lower(std::u32string_view s);
std::u32string to_upper(std::u32string_view s);

std::u32string_view trim(std::u32string_view s);
std::string_view trim(std::string_view s);

}  // namespace dictate::text
