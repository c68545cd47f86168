#include "dictate/dsl/similarity.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

#include "dictate/text.hpp"

namespace dictate::dsl {

std::size_t levenshtein(std::u32string_view a, std::u32string_view b) {
  std::vector<std::size_t> prev(b.size() + 1);
  std::vector<std::size_t> cur(b.size() + 1);
  std::iota(prev.begin(), prev.end(), std::size_t{0});
  for (std::size_t i = 0; i < a.size(); ++i) {
    cur[0] = i + 1;
    for (std::size_t j = 0; j < b.size(); ++j) {
      cur[j + 1] = std::min({prev[j + 1] + 1, cur[j] + 1, prev[j] + (a[i] == b[j] ? 0 : 1)});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

double similarity(std::u32string_view candidate, std::u32string_view query) {
  auto a = text::to_lower(candidate);
  auto b = text::to_lower(query);
  std::size_t max_len = std::max(a.size(), b.size());
  if (max_len == 0) return 1.0;
  return 1.0 - static_cast<double>(levenshtein(a, b)) / static_cast<double>(max_len);
}

}  // namespace dictate::dsl
