#pragma once

// Random generators shared by the property tests and the acceptance suite.

#include <algorithm>
#include <random>
#include <string>
#include <vector>

#include "dictate/dsl/ast.hpp"
#include "dictate/dsl/registry.hpp"

namespace gen {

using dictate::dsl::Expr;

inline std::size_t pick(std::mt19937& rng, std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); }

inline bool coin(std::mt19937& rng, double p = 0.5) { return std::bernoulli_distribution(p)(rng); }

// Short documents built from a small vocabulary so that repeated words,
// sentence ends, parentheses and double spaces all show up often.
inline std::string document(std::mt19937& rng, std::size_t max_len = 40) {
  static const std::vector<std::string> pieces = {
      "the", "The", "cat", "hat", "a", "an", "sat", "off", "site", "is", "draft", "espeak",
      " ", " ", " ", " ", "  ", ".", ". ", ", ", "(", ")", "\n", "!", "I", "x", "é"};
  std::string out;
  std::size_t target = pick(rng, max_len + 1);
  while (true) {
    std::string next = out + pieces[pick(rng, pieces.size())];
    // Length is counted in scalar values; 'é' is the only multi-byte piece.
    std::size_t scalars = 0;
    for (unsigned char ch : next) scalars += (ch & 0xC0) != 0x80;
    if (scalars > target) break;
    out = std::move(next);
  }
  return out;
}

inline std::string literal_for(std::mt19937& rng, const std::string& doc) {
  static const std::vector<std::string> words = {"the", "S", "cat", "hat", "at", " ", "", "Draft", "espek",
                                                 "site", "(", ".", "off site", "the c", " a", "xé"};
  if (!doc.empty() && coin(rng)) {
    std::size_t a = pick(rng, doc.size());
    std::size_t b = a + pick(rng, std::min<std::size_t>(doc.size() - a, 8) + 1);
    // Keep to whole UTF-8 sequences.
    while (a > 0 && (static_cast<unsigned char>(doc[a]) & 0xC0) == 0x80) --a;
    while (b < doc.size() && (static_cast<unsigned char>(doc[b]) & 0xC0) == 0x80) ++b;
    return doc.substr(a, b - a);
  }
  return words[pick(rng, words.size())];
}

Expr constraint(std::mt19937& rng, const std::string& doc, int depth);

inline Expr target(std::mt19937& rng, const std::string& doc, int depth) {
  static const std::vector<std::string> heads = {"theText", "thePosition", "findAll", "nth", "nthToLast", "take"};
  const auto& h = heads[pick(rng, heads.size())];
  std::vector<Expr> args;
  if (h == "nth" || h == "nthToLast" || h == "take") args.push_back(Expr::integer(1 + pick(rng, 3)));
  args.push_back(constraint(rng, doc, depth));
  return Expr::call(h, std::move(args));
}

// Constraint whose nesting depth (constraints and targets both counting) is at most `depth`.
inline Expr constraint(std::mt19937& rng, const std::string& doc, int depth) {
  static const std::vector<std::string> leaves = {"word", "letter", "sentence", "line", "phrase", "passage",
                                                  "parenthetical", "text", "empty", "extra", "alwaysTrue"};
  static const std::vector<std::string> literal_heads = {"like", "like", "like", "exactly", "hasSubstring",
                                                         "startsWith", "endsWith"};
  static const std::vector<std::string> relational = {"in", "contains", "before", "after", "nextTo", "at",
                                                      "atStart", "atEnd", "between"};
  static const std::vector<std::string> combinators = {"and", "and", "or", "union"};

  int kind = depth <= 1 ? static_cast<int>(pick(rng, 3)) : static_cast<int>(pick(rng, 5));
  if (kind == 0) return Expr::call(leaves[pick(rng, leaves.size())]);
  if (kind == 1) return Expr::call(literal_heads[pick(rng, literal_heads.size())], {Expr::string(literal_for(rng, doc))});
  if (kind == 2) return Expr::call(coin(rng) ? "atStart" : "atEnd");
  if (kind == 3) {
    const auto& h = relational[pick(rng, relational.size())];
    std::vector<Expr> args{target(rng, doc, depth - 1)};
    if (h == "between") args.push_back(target(rng, doc, depth - 1));
    return Expr::call(h, std::move(args));
  }
  std::vector<Expr> kids;
  for (std::size_t n = 2 + pick(rng, 2); n > 0; --n) kids.push_back(constraint(rng, doc, depth - 1));
  return Expr::call(combinators[pick(rng, combinators.size())], std::move(kids));
}

// Arbitrary string literal, heavy on characters the printer must escape.
inline std::string any_literal(std::mt19937& rng) {
  static const std::vector<std::string> atoms = {"a", "Z", " ", "\"", "\\", "\n", "\t", "(", ")", "é", "€", "😀", "0", ";"};
  std::string s;
  for (std::size_t n = pick(rng, 6); n > 0; --n) s += atoms[pick(rng, atoms.size())];
  return s;
}

// Any well-formed expression of the given category, drawn from the whole registry.
inline Expr from_registry(std::mt19937& rng, dictate::dsl::Category cat, int depth) {
  using dictate::dsl::ArgKind;
  using dictate::dsl::Category;
  using dictate::dsl::Multiplicity;
  std::vector<const dictate::dsl::HeadInfo*> heads;
  for (const auto& h : dictate::dsl::registry()) {
    if (h.category != cat) continue;
    // Near the depth limit, prefer heads that need no further nesting.
    bool leafy = std::all_of(h.signature.begin(), h.signature.end(), [](const auto& a) {
      return a.kind == ArgKind::string || a.kind == ArgKind::integer || a.multiplicity == Multiplicity::optional ||
             a.multiplicity == Multiplicity::zero_or_more;
    });
    if (depth <= 0 && !leafy) continue;
    heads.push_back(&h);
  }
  if (heads.empty()) {
    for (const auto& h : dictate::dsl::registry())
      if (h.category == cat) heads.push_back(&h);
  }
  const auto& h = *heads[pick(rng, heads.size())];
  std::vector<Expr> args;
  for (const auto& a : h.signature) {
    std::size_t count = 1;
    switch (a.multiplicity) {
      case Multiplicity::one: count = 1; break;
      case Multiplicity::optional: count = depth > 0 && coin(rng) ? 1 : 0; break;
      case Multiplicity::zero_or_more: count = depth > 0 ? pick(rng, 3) : 0; break;
      case Multiplicity::one_or_more: count = 1 + pick(rng, 2); break;
    }
    for (std::size_t i = 0; i < count; ++i) {
      switch (a.kind) {
        case ArgKind::string: args.push_back(Expr::string(any_literal(rng))); break;
        case ArgKind::integer: args.push_back(Expr::integer(1 + pick(rng, 20))); break;
        case ArgKind::action: args.push_back(from_registry(rng, Category::action, depth - 1)); break;
        case ArgKind::target: args.push_back(from_registry(rng, Category::target, depth - 1)); break;
        case ArgKind::constraint: args.push_back(from_registry(rng, Category::constraint, depth - 1)); break;
      }
    }
  }
  return Expr::call(std::string(h.name), std::move(args));
}

inline dictate::dsl::Program program(std::mt19937& rng, int depth = 4) {
  return {from_registry(rng, dictate::dsl::Category::action, depth)};
}

}  // namespace gen
