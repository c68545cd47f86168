#include <doctest.h>

#include <fstream>
#include <sstream>
#include <thread>

#include <httplib.h>

#include "dictate/errors.hpp"
#include "dictate/external.hpp"
#include "dictate/json_codec.hpp"
#include "dictate/plugin.hpp"

using namespace dictate;
using nlohmann::json;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

struct Fixture {
  std::vector<Demonstration> demos;
  DocumentState prev;
  std::string asr;
};

Fixture prompt_fixture() {
  auto j = json::parse(slurp("tests/data/prompts/input.json"));
  return {j["demonstrations"].get<std::vector<Demonstration>>(), j["query"]["prev"].get<DocumentState>(),
          j["query"]["asr"].get<std::string>()};
}

class CannedClient : public CompletionClient {
 public:
  explicit CannedClient(std::string reply) : reply_(std::move(reply)) {}
  std::string complete(const std::string& prompt) const override {
    last_prompt = prompt;
    return reply_;
  }
  mutable std::string last_prompt;

 private:
  std::string reply_;
};

}  // namespace

TEST_CASE("prompts byte-match the fixture in both modes") {
  auto f = prompt_fixture();
  CHECK(render_prompt(f.demos, f.prev, f.asr, InterpretMode::state) == slurp("tests/data/prompts/expected_state.txt"));
  CHECK(render_prompt(f.demos, f.prev, f.asr, InterpretMode::program) == slurp("tests/data/prompts/expected_program.txt"));
}

TEST_CASE("program mode needs programs on every demonstration") {
  auto f = prompt_fixture();
  f.demos[1].program.reset();
  CHECK_THROWS_AS(render_prompt(f.demos, f.prev, f.asr, InterpretMode::program), SchemaError);
  CHECK_NOTHROW(render_prompt(f.demos, f.prev, f.asr, InterpretMode::state));
}

TEST_CASE("parse_completion") {
  auto s = parse_completion(" Hyphenate off site.\n[Final State:]\nSee you at the off-site meeting.\n", InterpretMode::state);
  CHECK(*s.normalized == "Hyphenate off site.");
  REQUIRE(s.state);
  CHECK(s.state->content_utf8() == "See you at the off-site meeting.");
  CHECK(s.state->selection.focus == 32);
  CHECK_FALSE(s.program);

  auto p = parse_completion(" Delete Bob.\n[Lispress:] (delete (theText (like \"Bob\")))", InterpretMode::program);
  REQUIRE(p.program);
  CHECK(dsl::print_canonical(*p.program) == R"((delete (theText (like "Bob"))))");
  CHECK_FALSE(p.state);

  auto empty = parse_completion(" Never mind.\n[Lispress:] (do)\n", InterpretMode::program);
  CHECK(empty.program->root.args.empty());

  // Multi-line states survive; only the block's closing newline is dropped.
  auto multi = parse_completion(" x\n[Final State:]\nline one\nline two\n", InterpretMode::state);
  CHECK(multi.state->content_utf8() == "line one\nline two");

  try {
    parse_completion("no markers here", InterpretMode::state);
    FAIL("expected a completion error");
  } catch (const StageError& e) {
    CHECK(e.code() == "completion");
  }
  CHECK_THROWS_AS(parse_completion(" x\n[Lispress:] (delete", InterpretMode::program), StageError);
}

TEST_CASE("external interpreter sends the rendered prompt") {
  auto f = prompt_fixture();
  auto client = std::make_shared<CannedClient>(" Hyphenate off site.\n[Final State:]\nSee you at the off-site meeting.\n");
  ExternalInterpreter interp(client, InterpretMode::state, f.demos);
  StageInput in{f.prev, f.asr, 0, 0};
  auto out = interp.interpret(in);
  CHECK(client->last_prompt == slurp("tests/data/prompts/expected_state.txt"));
  CHECK(out.state->content_utf8() == "See you at the off-site meeting.");
  CHECK(*out.normalized == "Hyphenate off site.");
}

TEST_CASE("HTTP completion client") {
  httplib::Server server;
  json seen;
  server.Post("/v1/completions", [&](const httplib::Request& req, httplib::Response& res) {
    seen = json::parse(req.body);
    seen["auth"] = req.get_header_value("Authorization");
    if (seen["prompt"] == "slow") std::this_thread::sleep_for(std::chrono::milliseconds(600));
    if (seen["prompt"] == "bad") {
      res.set_content("{\"nope\":1}", "application/json");
      return;
    }
    res.set_content(json{{"choices", {{{"text", " ok"}}}}}.dump(), "application/json");
  });
  int port = server.bind_to_any_port("127.0.0.1");
  std::thread t([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  std::string url = "http://127.0.0.1:" + std::to_string(port) + "/v1/completions";
  HttpCompletionClient client(url, "m1", "secret", 2000);
  CHECK(client.complete("hello") == " ok");
  CHECK(seen["model"] == "m1");
  CHECK(seen["temperature"] == 0);
  CHECK(seen["auth"] == "Bearer secret");

  try {
    client.complete("bad");
    FAIL("expected a completion error");
  } catch (const StageError& e) {
    CHECK(e.code() == "completion");
  }

  HttpCompletionClient hasty(url, "m1", "", 200);
  try {
    hasty.complete("slow");
    FAIL("expected a timeout");
  } catch (const StageError& e) {
    CHECK(e.code() == "timeout");
  }
  server.stop();
  t.join();

  HttpCompletionClient nowhere("http://127.0.0.1:1/v1/completions", "m", "", 500);
  try {
    nowhere.complete("x");
    FAIL("expected a transport error");
  } catch (const StageError& e) {
    CHECK(e.code() == "transport");
  }
}

TEST_CASE("subprocess stages") {
  const std::string cmd = FAKE_PLUGIN_PATH;
  DocumentState prev = DocumentState::at_end(U"abc");

  SubprocessNormalizer norm(cmd, 2000);
  auto n = norm.normalize({prev, "hello", 0, 0});
  CHECK(n.text == "hello!");
  CHECK(n.confidence == -0.5);

  SubprocessInterpreter interp(cmd, 2000);
  auto p = interp.interpret({prev, "go", 0, 0});
  REQUIRE(p.program);
  CHECK(dsl::print_canonical(*p.program) == R"((insert "1"))");
  auto s = interp.interpret({prev, "state", 0, 0});
  CHECK(s.state->content_utf8() == "replaced");

  try {
    interp.interpret({prev, "fail", 0, 0});
    FAIL("expected a plugin error");
  } catch (const StageError& e) {
    CHECK(e.code() == "plugin");
  }

  // A crashed child is restarted on the next call (its counter starts over).
  CHECK_THROWS_AS(interp.interpret({prev, "crash", 0, 0}), StageError);
  CHECK(dsl::print_canonical(*interp.interpret({prev, "go", 0, 0}).program) == R"((insert "1"))");

  SubprocessInterpreter slow(cmd, 300);
  try {
    slow.interpret({prev, "hang", 0, 0});
    FAIL("expected a timeout");
  } catch (const StageError& e) {
    CHECK(e.code() == "timeout");
  }
  CHECK(slow.interpret({prev, "go", 0, 0}).program.has_value());

  SubprocessTagger tagger(cmd, 2000);
  TranscriptView v;
  v.tokens = {{"hi", 0, 10}, {"CMD", 10, 20}};
  v.final_ends = {2};
  auto tags = tagger.tag(v);
  CHECK(tags.tags == std::vector<Tag>{Tag::O, Tag::S});

  SubprocessInterpreter missing("/nonexistent/plugin-binary", 500);
  CHECK_THROWS_AS(missing.interpret({prev, "go", 0, 0}), StageError);
}

TEST_CASE("subprocess stages tolerate concurrent callers") {
  SubprocessNormalizer norm(FAKE_PLUGIN_PATH, 2000);
  DocumentState prev;
  std::vector<std::thread> threads;
  std::atomic<int> ok{0};
  for (int i = 0; i < 4; ++i) {
    threads.emplace_back([&, i] {
      for (int k = 0; k < 25; ++k) {
        auto word = "t" + std::to_string(i) + "_" + std::to_string(k);
        if (norm.normalize({prev, word, 0, 0}).text == word + "!") ++ok;
      }
    });
  }
  for (auto& t : threads) t.join();
  CHECK(ok == 100);
}
