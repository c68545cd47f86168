#include "dictate/dsl/resolve.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <unordered_map>

#include "dictate/dsl/registry.hpp"
#include "dictate/dsl/similarity.hpp"
#include "dictate/errors.hpp"
#include "dictate/text.hpp"

namespace dictate::dsl {

bool is_grounded(const Expr& c) {
  if (c.head == "and") {
    return std::any_of(c.args.begin(), c.args.end(), [](const Expr& a) { return is_grounded(a); });
  }
  if (c.head == "or" || c.head == "union") {
    return std::all_of(c.args.begin(), c.args.end(), [](const Expr& a) { return is_grounded(a); });
  }
  const HeadInfo* info = lookup(c.head);
  return info != nullptr && info->generator;
}

Unit default_unit(std::string_view target_head) {
  return target_head == "thePosition" ? Unit::position : Unit::word;
}

std::size_t focus_distance(Span span, std::size_t focus) {
  if (span.start <= focus && focus <= span.end) return 0;
  return focus < span.start ? span.start - focus : focus - span.end;
}

bool ranks_before(Span a, double score_a, Span b, double score_b, std::size_t focus) {
  if (score_a != score_b) return score_a > score_b;
  auto da = focus_distance(a, focus);
  auto db = focus_distance(b, focus);
  if (da != db) return da < db;
  if (a.start != b.start) return a.start < b.start;
  return a.end < b.end;
}

bool overlaps(Span a, Span b) { return a == b || (a.start < b.end && b.start < a.end); }

namespace {

struct Scored {
  Span span;
  double score;
};

class Resolver {
 public:
  Resolver(std::u32string_view text, std::size_t focus) : text_(text), focus_(focus) {
    token_start_.assign(text.size() + 1, false);
    token_end_.assign(text.size() + 1, false);
    for (const auto& tok : tokenize(text)) {
      token_start_[tok.span.start] = true;
      token_end_[tok.span.end] = true;
    }
  }

  std::vector<Scored> candidates(const Expr& c, Unit universe) {
    std::vector<Scored> out;
    if (is_grounded(c)) {
      out = generate(c);
    } else {
      for (const auto& s : unit(universe)) {
        if (auto score = test(c, s)) out.push_back({s, *score});
      }
    }
    std::sort(out.begin(), out.end(), [&](const Scored& a, const Scored& b) {
      return ranks_before(a.span, a.score, b.span, b.score, focus_);
    });
    return out;
  }

  ResolvedTarget target(const Expr& t) {
    const Expr& c = t.args.back();
    auto ranked = candidates(c, default_unit(t.head));
    if (ranked.empty()) throw ResolutionError(print(c));
    if (t.head == "theText") return {{ranked.front().span}, ranked.front().score};
    if (t.head == "thePosition") {
      Span s = ranked.front().span;
      return {{Span{s.start, s.start}}, ranked.front().score};
    }

    std::vector<Span> chosen;
    for (const auto& cand : ranked) {
      bool clash = std::any_of(chosen.begin(), chosen.end(), [&](Span k) { return overlaps(k, cand.span); });
      if (!clash) chosen.push_back(cand.span);
    }
    std::sort(chosen.begin(), chosen.end());
    double score = ranked.front().score;
    if (t.head == "findAll") return {chosen, score};

    auto k = static_cast<std::size_t>(t.args.front().number);
    if (t.head == "take") {
      chosen.resize(std::min(k, chosen.size()));
      return {chosen, score};
    }
    if (k > chosen.size()) {
      throw ResolutionError(print(t) + " (only " + std::to_string(chosen.size()) + " matches)");
    }
    Span pick = t.head == "nth" ? chosen[k - 1] : chosen[chosen.size() - k];
    return {{pick}, score};
  }

 private:
  std::vector<Scored> generate(const Expr& c) {
    const auto& h = c.head;
    std::vector<Scored> out;
    if (h == "and") {
      auto g = std::find_if(c.args.begin(), c.args.end(), [](const Expr& a) { return is_grounded(a); });
      for (const auto& cand : generate(*g)) {
        double score = cand.score;
        bool ok = true;
        for (const auto& child : c.args) {
          if (&child == &*g) continue;
          auto s = test(child, cand.span);
          if (!s) {
            ok = false;
            break;
          }
          score = std::min(score, *s);
        }
        if (ok) out.push_back({cand.span, score});
      }
      return out;
    }
    if (h == "or" || h == "union") {
      std::map<Span, double> merged;
      for (const auto& child : c.args) {
        for (const auto& cand : generate(child)) {
          auto [it, inserted] = merged.emplace(cand.span, cand.score);
          if (!inserted) it->second = std::max(it->second, cand.score);
        }
      }
      for (const auto& [span, score] : merged) out.push_back({span, score});
      return out;
    }
    if (h == "like") return generate_like(text::from_utf8(c.args[0].text));
    if (h == "exactly") {
      auto q = text::from_utf8(c.args[0].text);
      if (q.empty()) return with_unit_score(unit(Unit::position));
      for (auto pos = text_.find(q); pos != std::u32string_view::npos; pos = text_.find(q, pos + 1)) {
        out.push_back({{pos, pos + q.size()}, 1.0});
      }
      return out;
    }
    if (h == "at") return with_unit_score(target_spans(c.args[0]));
    if (h == "word") return with_unit_score(unit(Unit::word));
    if (h == "letter") return with_unit_score(unit(Unit::letter));
    if (h == "sentence") return with_unit_score(unit(Unit::sentence));
    if (h == "line") return with_unit_score(unit(Unit::line));
    if (h == "phrase") return with_unit_score(unit(Unit::phrase));
    if (h == "passage") return with_unit_score(unit(Unit::passage));
    if (h == "text") return with_unit_score(unit(Unit::text));
    if (h == "empty") return with_unit_score(unit(Unit::position));
    if (h == "parenthetical") return with_unit_score(memo_spans("parenthetical", parenthetical_spans));
    if (h == "extra") return with_unit_score(memo_spans("extra", extra_spans));
    throw ExecutionError("constraint '" + h + "' cannot enumerate candidates");
  }

  std::vector<Scored> generate_like(const std::u32string& q) {
    std::vector<Scored> out;
    const std::size_t n = text_.size();
    if (q.empty()) return with_unit_score(unit(Unit::position));
    auto lq = text::to_lower(q);
    if (q.size() == 1) {
      for (std::size_t i = 0; i < n; ++i) {
        if (text::to_lower(text_[i]) == lq[0]) out.push_back({{i, i + 1}, 1.0});
      }
      return out;
    }
    // Accepted spans satisfy 3|q| <= 5|span| and 3|span| <= 5|q|.
    const std::size_t max_len = (5 * q.size()) / 3;
    for (std::size_t s = 0; s < n; ++s) {
      if (!token_start_[s]) continue;
      for (std::size_t e = s + 1; e <= n && e - s <= max_len; ++e) {
        if (!token_end_[e] || 5 * (e - s) < 3 * q.size()) continue;
        if (auto score = like_score(q, lq, {s, e})) out.push_back({{s, e}, *score});
      }
    }
    return out;
  }

  std::optional<double> like_score(const std::u32string& q, const std::u32string& lq, Span span) {
    if (q.empty()) return span.empty() ? std::optional<double>(1.0) : std::nullopt;
    if (q.size() == 1) {
      if (span.length() != 1) return std::nullopt;
    } else {
      if (span.empty() || !token_start_[span.start] || !token_end_[span.end]) return std::nullopt;
      if (text::is_space(text_[span.start]) != text::is_space(q.front())) return std::nullopt;
      if (text::is_space(text_[span.end - 1]) != text::is_space(q.back())) return std::nullopt;
    }
    auto cand = text::to_lower(text_.substr(span.start, span.length()));
    std::size_t max_len = std::max(cand.size(), lq.size());
    std::size_t d = levenshtein(cand, lq);
    if (!like_accepts(d, max_len)) return std::nullopt;
    return 1.0 - static_cast<double>(d) / static_cast<double>(max_len);
  }

  std::optional<double> test(const Expr& c, Span span) {
    const auto& h = c.head;
    if (h == "and") {
      double score = 1.0;
      for (const auto& child : c.args) {
        auto s = test(child, span);
        if (!s) return std::nullopt;
        score = std::min(score, *s);
      }
      return score;
    }
    if (h == "or" || h == "union") {
      std::optional<double> best;
      for (const auto& child : c.args) {
        if (auto s = test(child, span)) best = best ? std::max(*best, *s) : *s;
      }
      return best;
    }

    auto yes = [](bool b) { return b ? std::optional<double>(1.0) : std::nullopt; };
    auto lit = [&] { return text::from_utf8(c.args[0].text); };
    auto content = [&] { return text_.substr(span.start, span.length()); };

    if (h == "like") {
      auto q = lit();
      return like_score(q, text::to_lower(q), span);
    }
    if (h == "word") return yes(in_unit(Unit::word, span));
    if (h == "letter") return yes(span.length() == 1);
    if (h == "sentence") return yes(in_unit(Unit::sentence, span));
    if (h == "line") return yes(in_unit(Unit::line, span));
    if (h == "phrase") return yes(in_unit(Unit::phrase, span));
    if (h == "passage") return yes(in_unit(Unit::passage, span));
    if (h == "text") return yes(span.start == 0 && span.end == text_.size());
    if (h == "empty") return yes(span.empty());
    if (h == "alwaysTrue") return 1.0;
    if (h == "parenthetical") {
      const auto& v = memo_spans("parenthetical", parenthetical_spans);
      return yes(std::binary_search(v.begin(), v.end(), span));
    }
    if (h == "extra") {
      const auto& v = memo_spans("extra", extra_spans);
      return yes(std::binary_search(v.begin(), v.end(), span));
    }
    if (h == "exactly") return yes(content() == lit());
    if (h == "hasSubstring") return yes(text::to_lower(content()).find(text::to_lower(lit())) != std::u32string::npos);
    if (h == "startsWith") {
      auto body = text::to_lower(content());
      auto q = text::to_lower(lit());
      return yes(body.size() >= q.size() && body.compare(0, q.size(), q) == 0);
    }
    if (h == "endsWith") {
      auto body = text::to_lower(content());
      auto q = text::to_lower(lit());
      return yes(body.size() >= q.size() && body.compare(body.size() - q.size(), q.size(), q) == 0);
    }

    if (h == "atStart" || h == "atEnd") {
      std::vector<Span> whole{Span{0, text_.size()}};
      const auto& ts = c.args.empty() ? whole : target_spans(c.args[0]);
      bool start = h == "atStart";
      return yes(std::any_of(ts.begin(), ts.end(), [&](Span t) {
        return start ? (span.start == t.start && span.end <= t.end) : (span.end == t.end && span.start >= t.start);
      }));
    }
    if (h == "between") {
      const auto& as = target_spans(c.args[0]);
      const auto& bs = target_spans(c.args[1]);
      for (Span a : as) {
        for (Span b : bs) {
          if ((a.end <= span.start && span.end <= b.start) || (b.end <= span.start && span.end <= a.start)) return 1.0;
        }
      }
      return std::nullopt;
    }

    const auto& ts = target_spans(c.args[0]);
    auto any = [&](auto pred) { return yes(std::any_of(ts.begin(), ts.end(), pred)); };
    if (h == "at") return any([&](Span t) { return t == span; });
    if (h == "in") return any([&](Span t) { return t.start <= span.start && span.end <= t.end; });
    if (h == "contains") return any([&](Span t) { return span.start <= t.start && t.end <= span.end; });
    if (h == "before") return any([&](Span t) { return is_before(span, t); });
    if (h == "after") return any([&](Span t) { return is_after(span, t); });
    if (h == "nextTo") return any([&](Span t) { return is_before(span, t) || is_after(span, t); });
    throw ExecutionError("constraint '" + h + "' has no predicate");
  }

  bool is_before(Span s, Span t) const {
    if (s.end == t.start) return true;
    return !s.empty() && s.end < t.start && all_space(text_.substr(s.end, t.start - s.end));
  }

  bool is_after(Span s, Span t) const {
    if (s.start == t.end) return true;
    return !s.empty() && s.start > t.end && all_space(text_.substr(t.end, s.start - t.end));
  }

  const std::vector<Span>& target_spans(const Expr& t) {
    auto it = targets_.find(&t);
    if (it != targets_.end()) return it->second;
    std::vector<Span> spans;
    try {
      spans = target(t).spans;
    } catch (const ResolutionError&) {
    }
    return targets_.emplace(&t, std::move(spans)).first->second;
  }

  const std::vector<Span>& unit(Unit u) {
    auto it = units_.find(u);
    if (it != units_.end()) return it->second;
    return units_.emplace(u, unit_spans(text_, u)).first->second;
  }

  const std::vector<Span>& memo_spans(const std::string& key, std::vector<Span> (*fn)(std::u32string_view)) {
    auto it = named_.find(key);
    if (it != named_.end()) return it->second;
    return named_.emplace(key, fn(text_)).first->second;
  }

  bool in_unit(Unit u, Span s) {
    const auto& v = unit(u);
    return std::binary_search(v.begin(), v.end(), s);
  }

  static std::vector<Scored> with_unit_score(const std::vector<Span>& spans) {
    std::vector<Scored> out;
    out.reserve(spans.size());
    for (Span s : spans) out.push_back({s, 1.0});
    return out;
  }

  std::u32string_view text_;
  std::size_t focus_;
  std::vector<bool> token_start_;
  std::vector<bool> token_end_;
  std::unordered_map<const Expr*, std::vector<Span>> targets_;
  std::map<Unit, std::vector<Span>> units_;
  std::map<std::string, std::vector<Span>> named_;
};

}  // namespace

std::vector<ResolvedTarget> resolve(const DocumentState& d, const Expr& constraint, const ResolutionContext& ctx) {
  Resolver r(d.content, ctx.focus);
  std::vector<ResolvedTarget> out;
  for (const auto& c : r.candidates(constraint, ctx.unit)) out.push_back({{c.span}, c.score});
  return out;
}

ResolvedTarget resolve_target(const DocumentState& d, const Expr& target) {
  Resolver r(d.content, d.selection.focus);
  return r.target(target);
}

}  // namespace dictate::dsl
