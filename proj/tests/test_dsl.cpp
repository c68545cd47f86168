#include <doctest.h>

#include <random>

#include "dictate/dsl/ast.hpp"
#include "dictate/dsl/execute.hpp"
#include "dictate/dsl/registry.hpp"
#include "dictate/dsl/resolve.hpp"
#include "dictate/dsl/units.hpp"
#include "dictate/errors.hpp"
#include "dictate/text.hpp"
#include "support/random_ast.hpp"
#include "support/resolve_oracle.hpp"

using namespace dictate;
using namespace dictate::dsl;

namespace {

const char* kEspeak = R"((capitalize
  (theText
    (and
      (like "S")
      (in (theText (like "eSpeak")))))))";

const char* kLowerW = R"((lowercase
  (theText
    (and
      (like "W")
      (in
        (theText
          (and
            (word)
            (like "when"))))))))";

const char* kOffSite = R"((replace
  (theText
    (and
      (like " ")
      (between
        (theText (like "off"))
        (theText (like "site")))))
  "-"))";

std::string run(const std::string& program, const std::u32string& content, std::size_t cursor) {
  return execute(parse_program(program), DocumentState(content, cursor, cursor)).content_utf8();
}

std::vector<Span> spans_of(const std::vector<ResolvedTarget>& r) {
  std::vector<Span> out;
  for (const auto& t : r) out.push_back(t.spans.front());
  return out;
}

}  // namespace

TEST_CASE("registry is closed and complete") {
  int actions = 0, targets = 0, constraints = 0;
  for (const auto& h : registry()) {
    actions += h.category == Category::action;
    targets += h.category == Category::target;
    constraints += h.category == Category::constraint;
  }
  CHECK(actions == 16);
  CHECK(targets + constraints == 34);
  CHECK(lookup("capitalize") != nullptr);
  CHECK(lookup("uppercase") == nullptr);
}

TEST_CASE("parse the lowercase listing") {
  auto p = parse_program(kLowerW);
  auto expected = Expr::call(
      "lowercase",
      {Expr::call("theText",
                  {Expr::call("and", {Expr::call("like", {Expr::string("W")}),
                                      Expr::call("in", {Expr::call("theText", {Expr::call("and", {Expr::call("word"), Expr::call("like", {Expr::string("when")})})})})})})});
  CHECK(p.root == expected);
  CHECK(print_canonical(p) ==
        R"((lowercase (theText (and (like "W") (in (theText (and (word) (like "when"))))))))");
}

TEST_CASE("parse errors carry offsets") {
  try {
    parse_program("(capitalize");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.offset() == 11);
  }
  CHECK_THROWS_AS(parse_program("(frobnicate (theText (word)))"), ParseError);
  CHECK_THROWS_AS(parse_program("(capitalize)"), ParseError);
  CHECK_THROWS_AS(parse_program("(capitalize (theText (word))))"), ParseError);
  CHECK_THROWS_AS(parse_program("(nth 0 (word))"), ParseError);
  CHECK_THROWS_AS(parse_program("(delete (theText (nth 0 (word))))"), ParseError);
  CHECK_THROWS_AS(parse_program("(theText (word))"), ParseError);
  CHECK_THROWS_AS(parse_program("(delete (theText (like \"x)))"), ParseError);
  CHECK_NOTHROW(parse_program("(do (delete (theText (like \"x\"))))"));
  CHECK(parse_program("(do (delete (theText (like \"x\"))))").root.args.size() == 1);
}

TEST_CASE("string escapes round trip") {
  auto p = parse_program(R"((insert "say \"hi\" \\ now"))");
  CHECK(p.root.args[0].text == "say \"hi\" \\ now");
  CHECK(print_canonical(p) == R"((insert "say \"hi\" \\ now"))");
}

TEST_CASE("program_match") {
  auto a = parse_program(kLowerW);
  auto b = parse_program(kOffSite);
  CHECK(program_match(a, a));
  CHECK_FALSE(program_match(a, b));
  CHECK(program_match(a, parse_program(print_canonical(a))));
  CHECK_FALSE(program_match(parse_program("(insert \"a\")"), parse_program("(insert \"A\")")));
}

TEST_CASE("parse print round trip on random programs") {
  std::mt19937 rng(2024);
  for (int i = 0; i < 2000; ++i) {
    auto p = gen::program(rng);
    auto text = print_canonical(p);
    auto back = parse_program(text);
    REQUIRE_MESSAGE(back == p, text);
    CHECK(print_canonical(back) == text);
  }
}

TEST_CASE("tokenization units") {
  std::u32string t = U"Hi Bob. See (the draft)!  ok\n\nNext, line";
  CHECK(word_spans(U"a cat.") == std::vector<Span>{{0, 1}, {2, 5}});
  CHECK(sentence_spans(U"Hi. Yo!  x") == std::vector<Span>{{0, 3}, {4, 7}, {9, 10}});
  CHECK(parenthetical_spans(t) == std::vector<Span>{{12, 23}});
  CHECK(line_spans(U"a\n\nb c") == std::vector<Span>{{0, 1}, {3, 6}});
  CHECK(passage_spans(U"a\nb\n\nc") == std::vector<Span>{{0, 3}, {5, 6}});
  CHECK(phrase_spans(U"One, two; three.") == std::vector<Span>{{0, 3}, {5, 8}, {10, 15}});
  CHECK(extra_spans(U"the the  cat") == std::vector<Span>{{3, 7}, {8, 9}});
}

TEST_CASE("resolve examples") {
  DocumentState d(U"Attached are the espeak events.", 31, 31);
  auto r = resolve(d, parse_expr(R"((and (like "S") (in (theText (like "eSpeak")))))"), {31});
  REQUIRE_FALSE(r.empty());
  CHECK(r.front().spans.front() == Span{18, 19});

  DocumentState abc(U"abc", 0, 0);
  auto all = resolve(abc, parse_expr("(alwaysTrue)"), {0, Unit::sentence});
  CHECK(spans_of(all) == std::vector<Span>{{0, 3}});

  DocumentState cats(U"the cat the hat", 15, 15);
  auto like = resolve(cats, parse_expr(R"((like "the"))"), {15});
  CHECK(spans_of(like) == std::vector<Span>{{8, 11}, {0, 3}});

  // A target that resolves to nothing makes the enclosing relation false.
  CHECK(resolve(cats, parse_expr(R"((in (theText (like "zzzz"))))"), {0}).empty());
}

TEST_CASE("target heads") {
  DocumentState d(U"a cat, a hat, a bat", 0, 0);
  auto all = resolve_target(d, parse_expr(R"((findAll (like "a")))"));
  CHECK(all.spans == std::vector<Span>{{0, 1}, {3, 4}, {7, 8}, {10, 11}, {14, 15}, {17, 18}});
  CHECK(resolve_target(d, parse_expr("(nth 2 (word))")).spans == std::vector<Span>{{2, 5}});
  CHECK(resolve_target(d, parse_expr("(nthToLast 1 (word))")).spans == std::vector<Span>{{16, 19}});
  CHECK(resolve_target(d, parse_expr("(take 2 (word))")).spans == std::vector<Span>{{0, 1}, {2, 5}});
  CHECK(resolve_target(d, parse_expr(R"((thePosition (after (theText (like "hat")))))")).spans == std::vector<Span>{{12, 12}});
  CHECK_THROWS_AS(resolve_target(d, parse_expr("(nth 9 (word))")), ResolutionError);
}

TEST_CASE("resolve agrees with the brute-force oracle") {
  std::mt19937 rng(99);
  const Unit units[] = {Unit::word, Unit::letter, Unit::sentence, Unit::position, Unit::phrase};
  for (int i = 0; i < 300; ++i) {
    auto doc = gen::document(rng);
    auto c = gen::constraint(rng, doc, 1 + static_cast<int>(gen::pick(rng, 3)));
    auto content = text::from_utf8(doc);
    std::size_t focus = gen::pick(rng, content.size() + 1);
    Unit u = units[gen::pick(rng, 5)];
    auto got = resolve(DocumentState(content, focus, focus), c, {focus, u});
    auto want = oracle::Oracle(content, focus).resolve(c, u);
    INFO(doc, " | ", print(c));
    REQUIRE(got.size() == want.size());
    for (std::size_t k = 0; k < got.size(); ++k) {
      CHECK(got[k].spans.front() == want[k].span);
      CHECK(got[k].score == doctest::Approx(want[k].score).epsilon(1e-12));
    }
  }
}

TEST_CASE("golden programs execute to their post-states") {
  CHECK(run(kEspeak, U"Attached are the espeak events.", 31) == "Attached are the eSpeak events.");
  CHECK(run(kLowerW, U"Please review When possible.", 28) == "Please review when possible.");
  CHECK(run(kOffSite, U"See you at the off site meeting.", 32) == "See you at the off-site meeting.");
}

TEST_CASE("execute actions") {
  CHECK(run("(do)", U"abc", 1) == "abc");
  CHECK_THROWS_AS(run(R"((delete (theText (like "zzz"))))", U"hello", 5), ResolutionError);

  CHECK(run(R"((delete (theText (like "Bob"))))", U"Hi Bob.", 7) == "Hi.");
  CHECK(run(R"((delete (theText (like "Hi"))))", U"Hi Bob.", 7) == "Bob.");
  CHECK(run(R"((delete (theText (and (like ".") (after (theText (like "Vince")))))))", U"Thanks Vince.", 13) == "Thanks Vince");
  CHECK(run(R"((delete (findAll (like "very"))))", U"a very very big dog", 0) == "a big dog");

  CHECK(run(R"((capitalize (theText (like "new york"))))", U"in new york today", 0) == "in New York today");
  CHECK(run(R"((allCaps (theText (like "asap"))))", U"do it asap.", 0) == "do it ASAP.");
  CHECK(run(R"((lowercase (theText (sentence))))", U"LOUD NOISES.", 0) == "loud noises.");

  CHECK(run(R"((insert (thePosition (after (theText (like "meet")))) " soon"))", U"Let's meet.", 11) == "Let's meet soon.");
  CHECK(run(R"((insert "!"))", U"Hi", 2) == "Hi!");
  CHECK(run(R"((replace (theText (like "3pm")) "2pm"))", U"meet at 3pm", 11) == "meet at 2pm");
  CHECK(run(R"((quote (theText (like "done"))))", U"mark it done today", 0) == "mark it \"done\" today");
  CHECK(run(R"((parenthesize (theText (like "maybe"))))", U"we will maybe go", 0) == "we will (maybe) go");
  CHECK(run(R"((spell (theText (like "vins")) "V I N C E"))", U"Thanks vins.", 0) == "Thanks VINCE.");
  CHECK(run(R"((spell "k-a-y"))", U"Hi ", 3) == "Hi kay");
  CHECK(run(R"((respell (theText (like "jon")) "J O H N"))", U"Ask jon.", 0) == "Ask JOHN.");
  CHECK(run(R"((combineSentences (findAll (sentence))))", U"It rained. The game was off.", 0) == "It rained the game was off.");
  CHECK(run(R"((combine (theText (like "e mail"))))", U"send an e mail", 0) == "send an email");
  CHECK(run(R"((correction "on Friday the 23rd"))", U"the event on the 23rd", 21) == "the event on Friday the 23rd");
  CHECK(run(R"((move (theText (like "today")) (thePosition (atStart))))", U"I will call today", 17) == "today I will call");

  auto moved = execute(parse_program(R"((moveCursor (thePosition (atEnd))))"), DocumentState(U"abc", 0, 0));
  CHECK(moved == DocumentState(U"abc", 3, 3));
}

TEST_CASE("case actions invert where the target is stable") {
  auto d = DocumentState(U"the quick fox", 0, 0);
  auto up = execute(parse_program(R"((capitalize (theText (like "quick"))))"), d);
  auto down = execute(parse_program(R"((lowercase (theText (like "quick"))))"), up);
  CHECK(down.content == d.content);
}

TEST_CASE("do is associative") {
  std::string a = R"((insert (thePosition (atEnd)) " one"))";
  std::string b = R"((capitalize (theText (like "one"))))";
  std::string c = R"((insert (thePosition (atStart)) "Zero "))";
  DocumentState d(U"start", 5, 5);
  auto left = execute(parse_program("(do " + a + " (do " + b + " " + c + "))"), d);
  auto right = execute(parse_program("(do (do " + a + " " + b + ") " + c + ")"), d);
  CHECK(left == right);
  CHECK(left.content_utf8() == "Zero start One");
}

TEST_CASE("join_whitespace") {
  CHECK(join_whitespace(U"a b c", {2, 3}) == Span{1, 3});
  CHECK(join_whitespace(U"b c", {0, 1}) == Span{0, 2});
  CHECK(join_whitespace(U"a b.", {2, 3}) == Span{1, 3});
  CHECK(join_whitespace(U"ab", {0, 1}) == Span{0, 1});
}
