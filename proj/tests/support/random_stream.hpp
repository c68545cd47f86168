#pragma once

#include <algorithm>
#include <cctype>
#include <random>
#include <string>
#include <vector>

#include "dictate/asr.hpp"

namespace gen {

inline const std::vector<std::string>& dictation_sentences() {
  static const std::vector<std::string> v{"Hi Bob.", "The cat sat on the mat.", "Let's meet at three.", "See you soon.",
                                          "Thanks for the draft", "the event is on Friday.", "I will send it today.",
                                          "Please review when possible."};
  return v;
}

inline const std::vector<std::string>& command_sentences() {
  static const std::vector<std::string> v{"Capitalize cat.", "Delete the word the.", "Replace cat with dog.", "Quote Bob.",
                                          "Lowercase Hi.", "Insert today after meet.", "Move cursor to end.",
                                          "Parenthesize soon.", "Delete three.", "All caps event."};
  return v;
}

// One utterance: its final token timeline plus the partial versions heard
// before it. Partials are lowercased, unpunctuated prefixes, sometimes with a
// misheard word, and may shrink as well as grow.
struct Utterance {
  std::vector<dictate::AsrToken> final_tokens;
  std::vector<std::vector<dictate::AsrToken>> partials;
};

inline std::vector<dictate::AsrEvent> stream(std::mt19937& rng, std::size_t max_utterances = 8, bool with_partials = true) {
  auto coin = [&](double p) { return std::uniform_real_distribution<double>(0, 1)(rng) < p; };
  std::vector<dictate::AsrEvent> out;
  std::int64_t clock = 0;
  std::size_t n = std::uniform_int_distribution<std::size_t>(1, max_utterances)(rng);
  for (std::size_t u = 1; u <= n; ++u) {
    std::string text;
    std::size_t sentences = std::uniform_int_distribution<std::size_t>(1, 2)(rng);
    for (std::size_t s = 0; s < sentences; ++s) {
      const auto& pool = coin(0.4) ? command_sentences() : dictation_sentences();
      text += (text.empty() ? "" : " ") + pool[std::uniform_int_distribution<std::size_t>(0, pool.size() - 1)(rng)];
    }
    auto words = static_cast<std::int64_t>(std::count(text.begin(), text.end(), ' ') + 1);
    auto finals = dictate::spread_tokens(text, clock, clock + 250 * words);
    clock += 250 * words + 400;
    if (with_partials) {
      std::size_t versions = std::uniform_int_distribution<std::size_t>(0, 4)(rng);
      for (std::size_t v = 0; v < versions; ++v) {
        std::size_t len = std::uniform_int_distribution<std::size_t>(1, finals.size())(rng);
        std::vector<dictate::AsrToken> p(finals.begin(), finals.begin() + static_cast<long>(len));
        for (auto& tok : p) {
          std::string w;
          for (char c : tok.text) {
            if (c != '.' && c != ',') w += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
          }
          tok.text = w.empty() ? "uh" : w;
          if (coin(0.1)) tok.text = "delete";
        }
        out.push_back(dictate::AsrEvent::partial(static_cast<std::int64_t>(u), p));
      }
    }
    out.push_back(dictate::AsrEvent::final_result(static_cast<std::int64_t>(u), finals));
  }
  return out;
}

inline std::vector<dictate::AsrEvent> finals_only(const std::vector<dictate::AsrEvent>& events) {
  std::vector<dictate::AsrEvent> out;
  for (const auto& e : events) {
    if (e.is_final()) out.push_back(e);
  }
  return out;
}

}  // namespace gen
