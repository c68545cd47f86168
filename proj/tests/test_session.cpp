#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <thread>

#include "dictate/errors.hpp"
#include "dictate/json_codec.hpp"
#include "dictate/session.hpp"
#include "support/random_stream.hpp"

using namespace dictate;
using nlohmann::json;

namespace {

std::vector<AsrEvent> draft_events() {
  std::ifstream in("tests/data/draft_stream/events.jsonl");
  REQUIRE(in);
  return read_event_log(in);
}

json ev(const AsrEvent& e) { return {{"type", "asr_event"}, {"event", e}}; }
json key(const char* type, std::int64_t t) { return {{"type", type}, {"t_ms", t}}; }

json last_snapshot(const std::vector<json>& replies) {
  REQUIRE(!replies.empty());
  return replies.back();
}

std::vector<std::pair<std::string, std::string>> labels(const json& snap) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& s : snap["segments"]) out.emplace_back(s["label"], s["asr"]);
  return out;
}

std::filesystem::path temp_store(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("dictate_session_" + name + "_" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

// Two utterances: "See you in paris." then the command "capitalize paris".
std::vector<json> paris_script() {
  std::vector<json> m;
  m.push_back(ev(AsrEvent::partial(1, spread_tokens("see you", 0, 600))));
  m.push_back(ev(AsrEvent::final_result(1, spread_tokens("See you in paris.", 0, 1200))));
  m.push_back(key("key_down", 1980));
  m.push_back(ev(AsrEvent::partial(2, spread_tokens("capitalize", 2000, 2300))));
  m.push_back(ev(AsrEvent::final_result(2, spread_tokens("capitalize paris", 2000, 2600))));
  m.push_back(key("key_up", 2600));
  return m;
}

}  // namespace

TEST_CASE("client messages round-trip through JSON") {
  std::vector<json> msgs = {
      {{"type", "attach"}, {"clock_offset_ms", -25}},
      ev(AsrEvent::partial(3, spread_tokens("hi there", 0, 400))),
      key("key_down", 10),
      key("key_up", 20),
      {{"type", "set_gold_normalization"}, {"segment", 2}, {"text", "Delete that."}},
      {{"type", "set_post_state"}, {"segment", 1}, {"state", DocumentState::at_end(U"ab")}},
      {{"type", "truncate_from"}, {"segment", 0}},
      {{"type", "reset"}, {"task", "elaborate_doc"}, {"prompt", "p"}, {"initial_state", DocumentState::at_end(U"x")}},
      {{"type", "submit"}},
  };
  for (const auto& j : msgs) {
    auto m = client_message_from_json(j);
    CHECK(client_message_from_json(to_json(m)) == m);
  }
}

TEST_CASE("malformed client messages name the field") {
  auto path_of = [](const json& j) {
    try {
      client_message_from_json(j);
    } catch (const SchemaError& e) {
      return e.path();
    }
    return std::string("<none>");
  };
  CHECK(path_of({{"type", "warp"}}) == "type");
  CHECK(path_of({{"t_ms", 3}}) == "type");
  CHECK(path_of({{"type", "key_down"}}) == "t_ms");
  CHECK(path_of({{"type", "set_post_state"}, {"segment", 0}, {"state", {{"content", 5}}}}).rfind("state", 0) == 0);
  CHECK(path_of({{"type", "asr_event"}, {"event", {{"kind", "later"}}}}).rfind("event", 0) == 0);
}

TEST_CASE("registry lifecycle") {
  SessionRegistry reg;
  reg.create("a", {});
  json snap;
  auto s = reg.attach("a", 0, &snap);
  CHECK(snap["type"] == "snapshot");
  CHECK(snap["seq"] == 1);
  CHECK(s->id() == "a");
  CHECK_THROWS_AS(reg.create("a", {}), SessionError);
  try {
    reg.attach("nope", 0);
    FAIL("attached to a missing session");
  } catch (const SessionError& e) {
    CHECK(e.code() == "unknown_session");
  }
  reg.close("a");
  CHECK(reg.find("a") == nullptr);
  CHECK_THROWS_AS(reg.close("a"), SessionError);
  CHECK(reg.ids().empty());
}

TEST_CASE("held key over the recorded draft stream segments the command") {
  Session s("a1", {});
  s.handle(key("key_down", 450));
  auto events = draft_events();
  json snap;
  for (std::size_t i = 0; i < 4; ++i) snap = last_snapshot(s.handle(ev(events[i])));
  CHECK(snap["key_down_ms"] == 450);
  CHECK(labels(snap) == std::vector<std::pair<std::string, std::string>>{{"dictation", "attached is"}, {"command", "the draft"}});
  s.handle(key("key_up", 2150));
  snap = last_snapshot(s.handle(ev(events[4])));
  CHECK(labels(snap) == std::vector<std::pair<std::string, std::string>>{{"dictation", "Attached is"}, {"command", "the draft."}});
  CHECK(snap["key_intervals"] == json::parse("[[450, 2150]]"));
  CHECK(snap["document"]["content"] == "Attached is");
}

TEST_CASE("clock offset shifts key timestamps") {
  Session s("off", {});
  s.handle(json{{"type", "attach"}, {"clock_offset_ms", 400}});
  s.handle(key("key_down", 50));
  s.handle(key("key_up", 1750));
  auto snap = last_snapshot(s.handle(ev(draft_events()[4])));
  CHECK(labels(snap) == std::vector<std::pair<std::string, std::string>>{{"dictation", "Attached is"}, {"command", "the draft."}});
}

TEST_CASE("annotate workflow: flags, diff, normalization, submit") {
  auto store = temp_store("workflow");
  SessionOptions opts;
  opts.prompt = "See you in Paris.";
  opts.store = store;
  Session s("paris", opts);
  json snap;
  for (const auto& m : paris_script()) snap = last_snapshot(s.handle(m));
  REQUIRE(snap["segments"].size() == 2);
  auto cmd = snap["segments"][1];
  CHECK(cmd["label"] == "command");
  CHECK(cmd["gold_asr"].is_null());
  CHECK(cmd["flags"] == json::array({"missing_normalization", "no_change"}));
  CHECK(snap["valid"] == false);

  // Submit names the unnormalized segment and writes nothing.
  auto rejected = s.handle(json{{"type", "submit"}});
  REQUIRE(rejected.size() == 1);
  CHECK(rejected[0]["type"] == "error");
  CHECK(rejected[0]["code"] == "validation");
  CHECK(rejected[0]["message"].get<std::string>().find("segment 1") != std::string::npos);
  CHECK(rejected[0]["message"].get<std::string>().find("no gold normalization") != std::string::npos);
  CHECK(std::filesystem::is_empty(store));

  snap = last_snapshot(s.handle(json{{"type", "set_gold_normalization"}, {"segment", 1}, {"text", "Capitalize Paris."}}));
  CHECK(snap["segments"][1]["gold_asr"] == "Capitalize Paris.");
  CHECK(snap["segments"][1]["flags"] == json::array({"no_change"}));

  // A post-state equal to the pre-state stays flagged.
  auto pre = snap["segments"][1]["pre_state"];
  snap = last_snapshot(s.handle(json{{"type", "set_post_state"}, {"segment", 1}, {"state", pre}}));
  CHECK(snap["segments"][1]["flags"] == json::array({"no_change"}));
  CHECK(snap["problems"][0]["reason"].get<std::string>().find("not associated with any change") != std::string::npos);

  auto post = DocumentState::at_end(U"See you in Paris.");
  snap = last_snapshot(s.handle(json{{"type", "set_post_state"}, {"segment", 1}, {"state", post}}));
  CHECK(snap["segments"][1]["flags"].empty());
  CHECK(snap["segments"][1]["diff"] == edit_script_to_json(diff(DocumentState::at_end(U"See you in paris."), post)));
  CHECK(snap["document"]["content"] == "See you in Paris.");
  CHECK(snap["valid"] == true);

  auto ok = s.handle(json{{"type", "submit"}});
  REQUIRE(ok.size() == 1);
  CHECK(ok[0]["type"] == "submitted");
  auto saved = load_trajectory(ok[0]["path"].get<std::string>());
  CHECK(saved.id == "paris");
  CHECK(saved.prompt == "See you in Paris.");
  REQUIRE(saved.segments.size() == 2);
  CHECK(saved.segments[1].normalized == "Capitalize Paris.");
  CHECK(saved.partial_versions.size() == 2);
  auto report = replay_gold(saved);
  CHECK(report.ok());
  std::filesystem::remove_all(store);
}

TEST_CASE("dictation segments reject annotations") {
  Session s("d", {});
  for (const auto& m : paris_script()) s.handle(m);
  auto r = s.handle(json{{"type", "set_gold_normalization"}, {"segment", 0}, {"text", "See you."}});
  CHECK(r[0]["type"] == "error");
  CHECK(r[0]["code"] == "not_command");
  r = s.handle(json{{"type", "set_post_state"}, {"segment", 7}, {"state", DocumentState{}}});
  CHECK(r[0]["code"] == "bounds");
}

TEST_CASE("editing an earlier command erases later command states") {
  Session s("chain", {});
  s.handle(ev(AsrEvent::final_result(1, spread_tokens("a b c", 0, 900))));
  s.handle(key("key_down", 1000));
  s.handle(ev(AsrEvent::final_result(2, spread_tokens("first", 1000, 1300))));
  s.handle(key("key_up", 1300));
  s.handle(key("key_down", 1400));
  s.handle(ev(AsrEvent::final_result(3, spread_tokens("second", 1400, 1700))));
  auto snap = last_snapshot(s.handle(key("key_up", 1700)));
  REQUIRE(labels(snap).size() == 3);
  s.handle(json{{"type", "set_post_state"}, {"segment", 1}, {"state", DocumentState::at_end(U"A b c")}});
  snap = last_snapshot(s.handle(json{{"type", "set_post_state"}, {"segment", 2}, {"state", DocumentState::at_end(U"A B c")}}));
  CHECK(snap["document"]["content"] == "A B c");

  auto replies = s.handle(json{{"type", "set_post_state"}, {"segment", 1}, {"state", DocumentState::at_end(U"a b C")}});
  REQUIRE(replies.size() == 2);
  CHECK(replies[0]["type"] == "erased");
  CHECK(replies[0]["segments"] == json::array({2}));
  CHECK(replies[1]["segments"][2]["post_state"]["content"] == "a b C");
  CHECK(replies[1]["segments"][2]["flags"] == json::array({"missing_normalization", "no_change"}));
}

TEST_CASE("truncate_from drops the segment and everything after it") {
  Session s("trunc", {});
  for (const auto& m : paris_script()) s.handle(m);
  s.handle(json{{"type", "set_gold_normalization"}, {"segment", 1}, {"text", "Capitalize Paris."}});
  auto snap = last_snapshot(s.handle(json{{"type", "truncate_from"}, {"segment", 1}}));
  CHECK(labels(snap) == std::vector<std::pair<std::string, std::string>>{{"dictation", "See you in paris."}});
  CHECK(snap["key_intervals"].empty());
  CHECK(snap["transcript"] == "See you in paris.");

  // Mid-utterance cut: the final keeps the tokens before the command.
  Session t("mid", {});
  t.handle(key("key_down", 580));
  t.handle(ev(AsrEvent::final_result(1, spread_tokens("hello there delete there", 0, 1200))));
  t.handle(key("key_up", 1200));
  snap = last_snapshot(t.handle(ev(AsrEvent::final_result(2, spread_tokens("more words", 2000, 2600)))));
  REQUIRE(labels(snap).size() == 3);
  snap = last_snapshot(t.handle(json{{"type", "truncate_from"}, {"segment", 1}}));
  CHECK(labels(snap) == std::vector<std::pair<std::string, std::string>>{{"dictation", "hello there"}});
  // New speech continues after the cut.
  snap = last_snapshot(t.handle(ev(AsrEvent::final_result(3, spread_tokens("again", 3000, 3300)))));
  CHECK(snap["document"]["content"] == "hello there again");
}

TEST_CASE("reset clears the recording and takes a new scenario") {
  Session s("r", {});
  for (const auto& m : paris_script()) s.handle(m);
  auto snap = last_snapshot(s.handle(json{{"type", "reset"}, {"task", "elaborate_doc"}, {"initial_state", DocumentState::at_end(U"Hi,\n")}}));
  CHECK(snap["segments"].empty());
  CHECK(snap["task"] == "elaborate_doc");
  CHECK(snap["document"]["content"] == "Hi,\n");
  CHECK(snap["key_intervals"].empty());
}

TEST_CASE("key and event ordering errors leave the session unchanged") {
  Session s("k", {});
  CHECK(s.handle(key("key_up", 5))[0]["code"] == "key_state");
  s.handle(key("key_down", 100));
  CHECK(s.handle(key("key_down", 200))[0]["code"] == "key_state");
  CHECK(s.handle(key("key_up", 50))[0]["code"] == "key_order");
  s.handle(key("key_up", 300));
  CHECK(s.handle(key("key_down", 250))[0]["code"] == "key_order");
  s.handle(ev(AsrEvent::final_result(2, spread_tokens("x", 0, 100))));
  auto at = s.snapshot();
  auto r = s.handle(ev(AsrEvent::partial(1, spread_tokens("y", 0, 100))));
  CHECK(r[0]["code"] == "stale_event");
  CHECK(s.snapshot() == at);
  CHECK(s.handle(json{{"type", "nonsense"}})[0]["code"] == "schema");
}

TEST_CASE("sequence numbers increase across replies") {
  Session s("seq", {});
  std::uint64_t last = 0;
  for (const auto& m : paris_script()) {
    for (const auto& r : s.handle(m)) {
      CHECK(r["seq"].get<std::uint64_t>() == last + 1);
      last = r["seq"];
    }
  }
  CHECK(s.handle(key("key_up", 1))[0]["seq"] == last + 1);
}

TEST_CASE("snapshots replay from the message log") {
  std::mt19937 rng(41);
  for (int round = 0; round < 60; ++round) {
    Session a("x", {});
    std::vector<json> replies;
    auto send = [&](const json& m) {
      for (auto& r : a.handle(m)) replies.push_back(r);
    };
    std::int64_t t = 0;
    for (const auto& e : gen::stream(rng, 5, true)) {
      // Interleave key presses and annotations with the ASR events.
      auto roll = rng() % 6;
      if (roll == 0) send(key("key_down", t));
      if (roll == 1) send(key("key_up", t + 400));
      if (roll == 2) send(json{{"type", "set_gold_normalization"}, {"segment", rng() % 4}, {"text", "Fix it."}});
      if (roll == 3) send(json{{"type", "set_post_state"}, {"segment", rng() % 4}, {"state", DocumentState::at_end(U"edited")}});
      if (roll == 4 && rng() % 3 == 0) send(json{{"type", "truncate_from"}, {"segment", rng() % 4}});
      send(ev(e));
      if (!e.tokens.empty()) t = e.tokens.back().end_ms;
    }
    Session b("x", {});
    std::vector<json> replayed;
    for (const auto& m : a.log()) {
      for (auto& r : b.handle(m)) replayed.push_back(r);
    }
    CHECK(replayed == replies);
    CHECK(b.snapshot() == a.snapshot());
  }
}

TEST_CASE("demo mode runs the configured stages and freezes commits") {
  SessionOptions opts;
  opts.mode = SessionMode::demo;
  opts.stages = {std::make_shared<BaselineTagger>(), std::make_shared<IdentityNormalizer>(), std::make_shared<TemplateInterpreter>()};
  opts.pipeline.tau_commit = -1e9;  // every final commits
  Session s("demo", opts);
  auto r = s.handle(ev(AsrEvent::final_result(1, spread_tokens("The report is due monday.", 0, 1500))));
  REQUIRE(r.size() == 2);
  CHECK(r[0]["type"] == "commit");
  CHECK(r[0]["commits"] == 1);
  r = s.handle(ev(AsrEvent::final_result(2, spread_tokens("Capitalize monday.", 2000, 2600))));
  auto snap = r.back();
  CHECK(snap["document"]["content"] == "The report is due Monday.");
  CHECK(snap["segments"][0]["frozen"] == true);
  CHECK(snap["segments"][1]["label"] == "command");
  CHECK(snap["segments"][1]["program"] == "(capitalize (theText (like \"monday\")))");
  CHECK(s.handle(json{{"type", "truncate_from"}, {"segment", 0}})[0]["code"] == "frozen");
  CHECK(s.handle(json{{"type", "set_gold_normalization"}, {"segment", 0}, {"text", "x"}})[0]["code"] == "frozen");
  CHECK(s.handle(json{{"type", "submit"}})[0]["code"] == "mode");
}

TEST_CASE("demo sessions need stages") {
  SessionOptions opts;
  opts.mode = SessionMode::demo;
  CHECK_THROWS_AS(Session("x", opts), SessionError);
}

TEST_CASE("sessions evolve independently across threads") {
  SessionRegistry reg;
  for (int i = 0; i < 4; ++i) reg.create("s" + std::to_string(i), {});
  std::vector<std::thread> threads;
  for (int i = 0; i < 4; ++i) {
    threads.emplace_back([&, i] {
      auto s = reg.attach("s" + std::to_string(i), 0);
      for (int u = 1; u <= 20; ++u) {
        s->handle(ev(AsrEvent::final_result(u, spread_tokens("w" + std::to_string(i), u * 1000, u * 1000 + 300))));
      }
    });
  }
  for (auto& t : threads) t.join();
  for (int i = 0; i < 4; ++i) {
    auto snap = reg.find("s" + std::to_string(i))->snapshot();
    std::string want;
    for (int u = 1; u <= 20; ++u) want += (u > 1 ? " w" : "w") + std::to_string(i);
    CHECK(snap["document"]["content"] == want);
  }
}
