#pragma once

#include <string_view>
#include <vector>

#include "dictate/doc.hpp"
#include "dictate/dsl/ast.hpp"
#include "dictate/dsl/units.hpp"

namespace dictate::dsl {

// Constraint semantics
// --------------------
// A constraint is a predicate over spans [s, e) of the document, with a score
// in (0, 1]. `like` scores by similarity; `and` takes the minimum of its
// children, `or`/`union` the maximum over accepting children; every other head
// scores 1.
//
// `like q`: case-insensitive, accepted when similarity >= 0.6. A one-character
// query matches single characters; an empty query matches positions; longer
// queries match token-aligned spans (see tokenize) whose leading and trailing
// whitespace agree with the query's. Punctuation is its own token, so it never
// blocks a word match.
//
// Relational heads take targets T (one or more spans t):
//   in T        t.start <= s && e <= t.end
//   contains T  s <= t.start && t.end <= e
//   before T    e == t.start, or a non-empty span separated from t by whitespace only
//   after T     s == t.end, or a non-empty span separated from t by whitespace only
//   nextTo T    before or after
//   between A B the span lies in the gap between a span of A and a span of B
//   at T        the span is one of T's spans
//   atStart T?  s == t.start && e <= t.end (whole text when T is omitted)
//   atEnd T?    e == t.end && s >= t.start
//
// A constraint is grounded when it enumerates its own candidates (generator
// heads; `and` with a grounded child; `or`/`union` with all children
// grounded). An ungrounded constraint is intersected with the context unit.
//
// Ranking: score desc, distance from the selection focus asc, start asc, end asc.

struct ResolutionContext {
  std::size_t focus = 0;
  Unit unit = Unit::word;
};

struct ResolvedTarget {
  std::vector<Span> spans;
  double score = 0.0;

  friend bool operator==(const ResolvedTarget&, const ResolvedTarget&) = default;
};

// Ranked candidates, one span each. An empty result is not an error.
std::vector<ResolvedTarget> resolve(const DocumentState& d, const Expr& constraint, const ResolutionContext& ctx);

// Evaluates a target head (theText, thePosition, findAll, nth, nthToLast,
// take). Throws ResolutionError naming the constraint when nothing matches.
ResolvedTarget resolve_target(const DocumentState& d, const Expr& target);

bool is_grounded(const Expr& constraint);
Unit default_unit(std::string_view target_head);
std::size_t focus_distance(Span span, std::size_t focus);
bool ranks_before(Span a, double score_a, Span b, double score_b, std::size_t focus);
bool overlaps(Span a, Span b);

}  // namespace dictate::dsl
