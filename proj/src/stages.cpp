#include "dictate/stages.hpp"

#include <cmath>

#include "dictate/errors.hpp"
#include "dictate/text.hpp"

namespace dictate {

using dsl::Expr;

Normalization GoldNormalizer::normalize(const StageInput& in) const {
  auto it = by_start_.find(in.start_ms);
  if (it == by_start_.end()) throw StageError("normalizer", "no gold normalization for segment at " + std::to_string(in.start_ms) + "ms");
  return {it->second, 0.0};
}

Interpretation GoldInterpreter::interpret(const StageInput& in) const {
  auto it = by_start_.find(in.start_ms);
  if (it == by_start_.end()) throw StageError("interpreter", "no gold interpretation for segment at " + std::to_string(in.start_ms) + "ms");
  Interpretation out;
  out.program = it->second.program;
  out.state = it->second.state;
  return out;
}

namespace {

Expr like(const std::string& s) { return Expr::call("like", {Expr::string(s)}); }
Expr the_text(Expr c) { return Expr::call("theText", {std::move(c)}); }
Expr the_position(Expr c) { return Expr::call("thePosition", {std::move(c)}); }
Expr act(const char* head, std::vector<Expr> args) { return Expr::call(head, std::move(args)); }

}  // namespace

TemplateInterpreter::TemplateInterpreter() {
  const auto icase = std::regex::ECMAScript | std::regex::icase;
  auto add = [&](const char* re, Expr (*build)(const std::smatch&)) { rules_.push_back({std::regex(re, icase), build}); };

  add(R"(^capitali[sz]e the (\S+) in (.+)$)", [](const std::smatch& m) {
    return act("capitalize", {the_text(Expr::call("and", {like(m[1]), Expr::call("in", {the_text(like(m[2]))})}))});
  });
  add(R"(^(?:delete|remove|erase) the word (.+)$)", [](const std::smatch& m) {
    return act("delete", {the_text(Expr::call("and", {Expr::call("word"), like(m[1])}))});
  });
  add(R"(^(?:delete|remove|erase) (?:the )?(.+)$)", [](const std::smatch& m) { return act("delete", {the_text(like(m[1]))}); });
  add(R"(^replace (.+) with (.+)$)", [](const std::smatch& m) {
    return act("replace", {the_text(like(m[1])), Expr::string(m[2])});
  });
  add(R"(^change (.+) to (.+)$)", [](const std::smatch& m) {
    return act("replace", {the_text(like(m[1])), Expr::string(m[2])});
  });
  add(R"(^(?:all caps|uppercase|capitali[sz]e all of) (?:the word )?(.+)$)", [](const std::smatch& m) {
    return act("allCaps", {the_text(like(m[1]))});
  });
  add(R"(^capitali[sz]e (?:the word )?(.+)$)", [](const std::smatch& m) { return act("capitalize", {the_text(like(m[1]))}); });
  add(R"(^(?:lower ?case|uncapitali[sz]e) (?:the word )?(.+)$)", [](const std::smatch& m) {
    return act("lowercase", {the_text(like(m[1]))});
  });
  add(R"(^insert (.+) after (.+)$)", [](const std::smatch& m) {
    return act("insert", {the_position(Expr::call("after", {the_text(like(m[2]))})), Expr::string(" " + m[1].str())});
  });
  add(R"(^insert (.+) before (.+)$)", [](const std::smatch& m) {
    return act("insert", {the_position(Expr::call("before", {the_text(like(m[2]))})), Expr::string(m[1].str() + " ")});
  });
  add(R"(^(?:put )?quotes? (?:around )?(.+)$)", [](const std::smatch& m) { return act("quote", {the_text(like(m[1]))}); });
  add(R"(^(?:parenthesi[sz]e|put parenthes[ie]s around) (.+)$)", [](const std::smatch& m) {
    return act("parenthesize", {the_text(like(m[1]))});
  });
  add(R"(^move (?:the )?cursor to (?:the )?end(?: of (?:the )?(?:document|text))?$)", [](const std::smatch&) {
    return act("moveCursor", {the_position(Expr::call("atEnd"))});
  });
  add(R"(^move (?:the )?cursor to (?:the )?(?:start|beginning)(?: of (?:the )?(?:document|text))?$)", [](const std::smatch&) {
    return act("moveCursor", {the_position(Expr::call("atStart"))});
  });
  add(R"(^move (?:the )?cursor (?:to )?after (.+)$)", [](const std::smatch& m) {
    return act("moveCursor", {the_position(Expr::call("after", {the_text(like(m[1]))}))});
  });
  add(R"(^move (?:the )?cursor (?:to )?before (.+)$)", [](const std::smatch& m) {
    return act("moveCursor", {the_position(Expr::call("before", {the_text(like(m[1]))}))});
  });
}

std::pair<dsl::Program, double> TemplateInterpreter::translate(const std::string& utterance) const {
  std::string u(text::trim(std::string_view(utterance)));
  std::string body = u;
  while (!body.empty() && (body.back() == '.' || body.back() == '!' || body.back() == '?')) body.pop_back();
  for (const auto& rule : rules_) {
    std::smatch m;
    if (std::regex_match(body, m, rule.pattern)) return {dsl::Program{rule.build(m)}, std::log(0.95)};
  }
  return {dsl::Program{act("correction", {Expr::string(body)})}, std::log(0.3)};
}

Interpretation TemplateInterpreter::interpret(const StageInput& in) const {
  auto [program, confidence] = translate(in.utterance);
  Interpretation out;
  out.program = std::move(program);
  out.confidence = confidence;
  return out;
}

}  // namespace dictate
