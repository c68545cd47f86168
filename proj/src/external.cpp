#include "dictate/external.hpp"

#include <chrono>

#include <httplib.h>

#include "dictate/errors.hpp"
#include "dictate/json_codec.hpp"
#include "dictate/text.hpp"

namespace dictate {

InterpretMode mode_from_string(const std::string& s) {
  if (s == "state") return InterpretMode::state;
  if (s == "program") return InterpretMode::program;
  throw SchemaError("mode", "expected \"state\" or \"program\"");
}

std::string to_string(InterpretMode m) { return m == InterpretMode::state ? "state" : "program"; }

namespace {

std::string query_block(const DocumentState& prev, const std::string& asr) {
  return "[Input State:]\n" + prev.content_utf8() + "\n[Utterance ASR:] " + asr + "\n[Gold Utterance:]";
}

}  // namespace

std::string render_demonstration(const Demonstration& d, InterpretMode mode) {
  std::string out = query_block(d.prev, d.asr) + " " + d.gold + "\n";
  if (mode == InterpretMode::state) {
    out += "[Final State:]\n" + d.post.content_utf8() + "\n";
  } else {
    if (!d.program) throw SchemaError("program", "program-mode demonstration without a program");
    out += "[Lispress:] " + dsl::print_canonical(*d.program) + "\n";
  }
  return out;
}

std::string render_prompt(const std::vector<Demonstration>& demos, const DocumentState& prev, const std::string& asr, InterpretMode mode) {
  std::string out;
  for (const auto& d : demos) out += render_demonstration(d, mode) + "\n";
  return out + query_block(prev, asr);
}

Interpretation parse_completion(const std::string& completion, InterpretMode mode) {
  const std::string marker = mode == InterpretMode::state ? "\n[Final State:]\n" : "\n[Lispress:]";
  auto at = completion.find(marker);
  if (at == std::string::npos) throw StageError("completion", "completion lacks \"" + std::string(text::trim(std::string_view(marker))) + "\"");
  Interpretation out;
  out.normalized = std::string(text::trim(std::string_view(completion).substr(0, at)));
  std::string rest = completion.substr(at + marker.size());
  if (mode == InterpretMode::state) {
    // The final state runs to the end, minus the newline that closes the block.
    if (!rest.empty() && rest.back() == '\n') rest.pop_back();
    out.state = DocumentState::at_end(text::from_utf8(rest));
    return out;
  }
  try {
    out.program = dsl::parse_program(text::trim(std::string_view(rest)));
  } catch (const ParseError& e) {
    throw StageError("completion", std::string("unparseable program: ") + e.what());
  }
  return out;
}

HttpCompletionClient::HttpCompletionClient(std::string endpoint, std::string model, std::string api_key, int timeout_ms)
    : model_(std::move(model)), api_key_(std::move(api_key)), timeout_ms_(timeout_ms) {
  auto scheme = endpoint.find("://");
  auto slash = endpoint.find('/', scheme == std::string::npos ? 0 : scheme + 3);
  base_ = endpoint.substr(0, slash);
  path_ = slash == std::string::npos ? "/" : endpoint.substr(slash);
}

std::string HttpCompletionClient::complete(const std::string& prompt) const {
  httplib::Client cli(base_);
  auto timeout = std::chrono::milliseconds(timeout_ms_);
  cli.set_connection_timeout(timeout);
  cli.set_read_timeout(timeout);
  cli.set_write_timeout(timeout);
  httplib::Headers headers;
  if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);
  nlohmann::json body = {{"model", model_}, {"prompt", prompt}, {"max_tokens", 512}, {"temperature", 0}, {"stop", {"\n\n[Input State:]"}}};

  auto started = std::chrono::steady_clock::now();
  auto res = cli.Post(path_, headers, body.dump(), "application/json");
  if (!res) {
    auto err = res.error();
    bool timed_out = err == httplib::Error::ConnectionTimeout ||
                     ((err == httplib::Error::Read || err == httplib::Error::Write) && std::chrono::steady_clock::now() - started >= timeout);
    throw StageError(timed_out ? "timeout" : "transport", "completion request failed: " + httplib::to_string(err));
  }
  if (res->status != 200) throw StageError("transport", "completion endpoint returned HTTP " + std::to_string(res->status));
  try {
    return nlohmann::json::parse(res->body).at("choices").at(0).at("text").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw StageError("completion", std::string("malformed completion response: ") + e.what());
  }
}

ExternalInterpreter::ExternalInterpreter(std::shared_ptr<const CompletionClient> client, InterpretMode mode, std::vector<Demonstration> demos)
    : client_(std::move(client)), mode_(mode), demos_(std::move(demos)) {}

Interpretation ExternalInterpreter::interpret(const StageInput& in) const {
  return parse_completion(client_->complete(render_prompt(demos_, in.prev, in.utterance, mode_)), mode_);
}

void from_json(const nlohmann::json& j, Demonstration& d) {
  d.prev = j.at("prev").get<DocumentState>();
  d.asr = j.at("asr").get<std::string>();
  d.gold = j.at("gold").get<std::string>();
  d.post = j.at("post").get<DocumentState>();
  if (j.contains("program") && !j["program"].is_null()) d.program = dsl::parse_program(j["program"].get<std::string>());
}

}  // namespace dictate
