#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dictate/doc.hpp"
#include "dictate/dsl/ast.hpp"
#include "dictate/stages.hpp"

namespace dictate {

enum class InterpretMode { state, program };

InterpretMode mode_from_string(const std::string& s);
std::string to_string(InterpretMode m);

// One worked example shown to the completion model.
struct Demonstration {
  DocumentState prev;
  std::string asr;
  std::string gold;
  DocumentState post;
  std::optional<dsl::Program> program;
};

// Prompt layout, one block per demonstration followed by the query:
//
//   [Input State:]
//   <prev content>
//   [Utterance ASR:] <asr>
//   [Gold Utterance:] <gold>
//   [Final State:]
//   <post content>
//
// In program mode the last two lines become "[Lispress:] <program>". Blocks
// are separated by a blank line. The query block stops after
// "[Gold Utterance:]" so the model completes the rest.
std::string render_demonstration(const Demonstration& d, InterpretMode mode);
std::string render_prompt(const std::vector<Demonstration>& demos, const DocumentState& prev, const std::string& asr, InterpretMode mode);

// Parses what the model wrote after "[Gold Utterance:]". Throws
// StageError("completion") when it does not follow the layout.
Interpretation parse_completion(const std::string& completion, InterpretMode mode);

class CompletionClient {
 public:
  virtual ~CompletionClient() = default;
  // Throws StageError with code "transport" or "timeout".
  virtual std::string complete(const std::string& prompt) const = 0;
};

// POSTs {"model", "prompt", "max_tokens", "temperature": 0, "stop"} to an
// OpenAI-style completions endpoint and returns choices[0].text.
class HttpCompletionClient : public CompletionClient {
 public:
  HttpCompletionClient(std::string endpoint, std::string model, std::string api_key, int timeout_ms);
  std::string complete(const std::string& prompt) const override;

 private:
  std::string base_;
  std::string path_;
  std::string model_;
  std::string api_key_;
  int timeout_ms_;
};

// Joint normalizer + interpreter backed by a completion model. Pair it with
// the identity normalizer: it sees the raw ASR and reports its own repair.
class ExternalInterpreter : public Interpreter {
 public:
  ExternalInterpreter(std::shared_ptr<const CompletionClient> client, InterpretMode mode, std::vector<Demonstration> demos);
  Interpretation interpret(const StageInput& in) const override;

 private:
  std::shared_ptr<const CompletionClient> client_;
  InterpretMode mode_;
  std::vector<Demonstration> demos_;
};

void from_json(const nlohmann::json& j, Demonstration& d);

}  // namespace dictate
