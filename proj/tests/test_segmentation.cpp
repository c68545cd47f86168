#include <doctest.h>

#include <cmath>
#include <random>

#include "dictate/errors.hpp"
#include "dictate/segmentation.hpp"
#include "support/random_bioes.hpp"

using namespace dictate;
using T = Tag;

namespace {

std::vector<AsrToken> words(const std::string& text) { return spread_tokens(text, 0, 100 * static_cast<std::int64_t>(text.size())); }

LabeledSegment dict(std::size_t b, std::size_t e, std::string text = "") { return {b, e, Label::dictation, std::move(text)}; }
LabeledSegment cmd(std::size_t b, std::size_t e, std::string text = "") { return {b, e, Label::command, std::move(text)}; }

void same_spans(const std::vector<LabeledSegment>& got, const std::vector<LabeledSegment>& want) {
  REQUIRE(got.size() == want.size());
  for (std::size_t i = 0; i < got.size(); ++i) CHECK(got[i].same_span(want[i]));
}

}  // namespace

TEST_CASE("decode examples") {
  auto d = decode(std::vector<Tag>(5, T::O), words("Attached is the draft ."));
  REQUIRE(d.size() == 1);
  CHECK(d[0].text == "Attached is the draft .");

  auto toks = gen::tokens(7);
  same_spans(decode({T::O, T::O, T::B, T::I, T::E, T::S, T::O}, toks), {dict(0, 2), cmd(2, 5), cmd(5, 6), dict(6, 7)});

  auto learned = words("You learned. You lie not you learned.");
  auto segs = decode({T::O, T::O, T::B, T::I, T::I, T::I, T::E}, learned);
  REQUIRE(segs.size() == 2);
  CHECK(segs[0].text == "You learned.");
  CHECK(segs[1].text == "You lie not you learned.");
  CHECK(segs[1].is_command());

  CHECK_THROWS_AS(decode({T::O}, gen::tokens(2)), AlignmentError);
}

TEST_CASE("encode inverts the decode examples") {
  auto toks = gen::tokens(7);
  std::vector<Tag> tags{T::O, T::O, T::B, T::I, T::E, T::S, T::O};
  CHECK(encode(decode(tags, toks)).tags == tags);
  CHECK(encode({dict(0, 5)}).tags == std::vector<Tag>(5, T::O));
  CHECK(encode({cmd(0, 1)}).tags == std::vector<Tag>{T::S});
  CHECK_THROWS_AS(encode({dict(0, 2), dict(2, 3)}), PartitionError);
  CHECK_THROWS_AS(encode({dict(0, 2), cmd(3, 4)}), PartitionError);
  CHECK_THROWS_AS(encode({cmd(0, 0)}), PartitionError);
}

TEST_CASE("repair is deterministic and yields valid tags") {
  CHECK(repair({T::B, T::I, T::O}) == std::vector<Tag>{T::B, T::E, T::O});
  CHECK(repair({T::B, T::O}) == std::vector<Tag>{T::S, T::O});
  CHECK(repair({T::I, T::E}) == std::vector<Tag>{T::O, T::S});
  CHECK(repair({T::B, T::I, T::I}) == std::vector<Tag>{T::B, T::I, T::E});
  CHECK(repair({T::B, T::B, T::E}) == std::vector<Tag>{T::S, T::B, T::E});

  std::mt19937 rng(5);
  for (int i = 0; i < 2000; ++i) {
    auto tags = gen::any_tags(rng, std::uniform_int_distribution<std::size_t>(1, 12)(rng));
    auto fixed = repair(tags);
    CHECK(repair(fixed) == fixed);
    auto segs = decode(tags, gen::tokens(tags.size()));
    CHECK(gen::no_adjacent_dictations(segs));
    CHECK(encode(segs).tags == fixed);
  }
}

TEST_CASE("BIOES bijection on random valid inputs") {
  std::mt19937 rng(17);
  for (int i = 0; i < 2000; ++i) {
    auto toks = gen::tokens(std::uniform_int_distribution<std::size_t>(1, 20)(rng));
    auto segs = gen::segmentation(rng, toks);
    CHECK(decode(encode(segs), toks) == segs);
    auto tags = gen::valid_tags(rng, toks.size());
    auto round = encode(decode(tags, toks)).tags;
    CHECK(round == tags);
  }
}

TEST_CASE("gold_from_keys") {
  std::vector<AsrToken> toks{{"attached", 0, 300}, {"is", 300, 600}, {"the", 600, 1050}, {"draft.", 1050, 2150}};
  auto segs = gold_from_keys(toks, {{450, 2150}});
  REQUIRE(segs.size() == 2);
  CHECK(segs[0].text == "attached is");
  CHECK_FALSE(segs[0].is_command());
  CHECK(segs[1].text == "the draft.");
  CHECK(segs[1].is_command());

  same_spans(gold_from_keys(toks, {}), {dict(0, 4)});
  // Releasing and re-pressing inside one run gives consecutive commands.
  same_spans(gold_from_keys(toks, {{0, 700}, {700, 3000}}), {cmd(0, 2), cmd(2, 4)});
  // An interval that catches no midpoint adds nothing.
  same_spans(gold_from_keys(toks, {{10, 20}}), {dict(0, 4)});
}

TEST_CASE("baseline tagger") {
  auto view = [](const std::string& text) {
    TranscriptView v;
    v.tokens = words(text);
    v.text = text;
    v.final_tokens = v.tokens.size();
    v.final_ends = {v.tokens.size()};
    return v;
  };
  auto segs = decode(baseline_tag(view("Delete the period after Vince.")), words("Delete the period after Vince."));
  same_spans(segs, {cmd(0, 5)});

  auto hi = baseline_tag(view("Hi Bob."));
  CHECK(hi.tags == std::vector<Tag>{T::O, T::O});
  CHECK(hi.confidences[0] == doctest::Approx(std::log(0.9)));

  std::string mixed = "Just wanted to ask about the event. Capitalize event.";
  same_spans(decode(baseline_tag(view(mixed)), words(mixed)), {dict(0, 7), cmd(7, 9)});

  // A trigger word mid-sentence stays dictation with low confidence.
  auto mid = baseline_tag(view("Please delete it."));
  CHECK(mid.tags == std::vector<Tag>(3, T::O));
  CHECK(mid.confidences[1] == doctest::Approx(std::log(0.5)));
}

TEST_CASE("seg_metrics") {
  auto s = seg_metrics({dict(0, 2), cmd(2, 7)}, {dict(0, 2), cmd(2, 7)});
  CHECK(s.em);
  CHECK(s.f1 == 1.0);

  auto miss = seg_metrics({dict(0, 7)}, {dict(0, 2), cmd(2, 7)});
  CHECK_FALSE(miss.em);
  CHECK(miss.f1 == 0.0);

  auto partial = seg_metrics({dict(0, 2), cmd(2, 6)}, {dict(0, 2), cmd(2, 4), cmd(4, 6)});
  CHECK(partial.precision == 0.5);
  CHECK(partial.recall == doctest::Approx(1.0 / 3.0));
  CHECK(partial.f1 == doctest::Approx(0.4));

  CHECK_THROWS_AS(seg_metrics({dict(0, 3)}, {dict(0, 4)}), AlignmentError);
}

TEST_CASE("segmentation JSON") {
  nlohmann::json j = TagSequence{{T::B, T::E}, {-0.1, -0.2}};
  CHECK(j["tags"] == nlohmann::json::array({"B", "E"}));
  CHECK(j.get<TagSequence>() == TagSequence{{T::B, T::E}, {-0.1, -0.2}});
  nlohmann::json k = KeyInterval{450, 2150};
  CHECK(k == nlohmann::json::array({450, 2150}));
  CHECK_THROWS_AS(nlohmann::json::parse(R"({"tags":["X"],"confidences":[0]})").get<TagSequence>(), SchemaError);
}
