#pragma once

#include <random>
#include <string>
#include <vector>

#include "dictate/asr.hpp"
#include "dictate/segmentation.hpp"

namespace gen {

inline std::vector<dictate::AsrToken> tokens(std::size_t n) {
  std::vector<dictate::AsrToken> out;
  for (std::size_t i = 0; i < n; ++i) {
    auto t = static_cast<std::int64_t>(i) * 100;
    out.push_back({"w" + std::to_string(i), t, t + 100});
  }
  return out;
}

// A random valid segmentation of n >= 1 tokens: no empty segments and no two
// adjacent dictations.
inline std::vector<dictate::LabeledSegment> segmentation(std::mt19937& rng, const std::vector<dictate::AsrToken>& toks) {
  std::vector<dictate::LabeledSegment> out;
  std::size_t pos = 0;
  while (pos < toks.size()) {
    bool prev_dict = !out.empty() && !out.back().is_command();
    bool command = prev_dict || std::uniform_int_distribution<int>(0, 1)(rng) == 1;
    std::size_t len = std::uniform_int_distribution<std::size_t>(1, std::min<std::size_t>(5, toks.size() - pos))(rng);
    dictate::LabeledSegment s{pos, pos + len, command ? dictate::Label::command : dictate::Label::dictation,
                              dictate::join_token_text(toks, pos, pos + len)};
    out.push_back(s);
    pos += len;
  }
  return out;
}

// Random well-formed tag string built from O, S and B I* E runs.
inline std::vector<dictate::Tag> valid_tags(std::mt19937& rng, std::size_t n) {
  using dictate::Tag;
  std::vector<Tag> out;
  while (out.size() < n) {
    std::size_t left = n - out.size();
    int pick = std::uniform_int_distribution<int>(0, 2)(rng);
    if (pick == 0 || left == 1) {
      out.push_back(pick == 0 ? Tag::O : Tag::S);
    } else if (pick == 1) {
      out.push_back(Tag::S);
    } else {
      std::size_t len = std::uniform_int_distribution<std::size_t>(2, std::min<std::size_t>(6, left))(rng);
      out.push_back(Tag::B);
      for (std::size_t k = 2; k < len; ++k) out.push_back(Tag::I);
      out.push_back(Tag::E);
    }
  }
  return out;
}

inline std::vector<dictate::Tag> any_tags(std::mt19937& rng, std::size_t n) {
  std::vector<dictate::Tag> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(static_cast<dictate::Tag>(std::uniform_int_distribution<int>(0, 4)(rng)));
  return out;
}

inline bool no_adjacent_dictations(const std::vector<dictate::LabeledSegment>& segs) {
  for (std::size_t i = 1; i < segs.size(); ++i) {
    if (!segs[i].is_command() && !segs[i - 1].is_command()) return false;
  }
  return true;
}

}  // namespace gen
