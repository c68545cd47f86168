#pragma once

#include <cstddef>
#include <string_view>

namespace dictate::dsl {

std::size_t levenshtein(std::u32string_view a, std::u32string_view b);

// `like` acceptance: 1 - d/max >= 0.6, evaluated exactly as 5d <= 2max.
inline bool like_accepts(std::size_t distance, std::size_t max_len) { return 5 * distance <= 2 * max_len; }

// 1 - levenshtein/max(|a|,|b|) over lowercased forms; 1.0 for two empty strings.
double similarity(std::u32string_view candidate, std::u32string_view query);

}  // namespace dictate::dsl
