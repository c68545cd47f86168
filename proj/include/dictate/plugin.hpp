#pragma once

#include <mutex>
#include <string>

#include <json.hpp>

#include "dictate/segmentation.hpp"
#include "dictate/stages.hpp"

namespace dictate {

// A long-lived child process speaking line-delimited JSON: one request object
// per line on its stdin, one response object per line on its stdout. A
// response carrying "error" is reported as a stage failure. Calls are
// serialized; a dead or wedged child is restarted on the next call.
class PluginProcess {
 public:
  PluginProcess(std::string command, int timeout_ms = 10000);
  ~PluginProcess();
  PluginProcess(const PluginProcess&) = delete;
  PluginProcess& operator=(const PluginProcess&) = delete;

  // Throws StageError("transport" | "timeout" | "plugin").
  nlohmann::json call(const nlohmann::json& request) const;

 private:
  void start() const;
  void stop() const;

  std::string command_;
  int timeout_ms_;
  mutable std::mutex mu_;
  mutable int pid_ = -1;
  mutable int to_child_ = -1;
  mutable int from_child_ = -1;
  mutable std::string pending_;
};

// Request {"op":"tag","tokens":[...],"final_ends":[...]} -> {"tags":[...],"confidences":[...]}
class SubprocessTagger : public Tagger {
 public:
  explicit SubprocessTagger(std::string command, int timeout_ms = 10000) : proc_(std::move(command), timeout_ms) {}
  TagSequence tag(const TranscriptView& t) const override;

 private:
  PluginProcess proc_;
};

// Request {"op":"normalize","state":{...},"utterance":"..."} -> {"text":"...","confidence":x}
class SubprocessNormalizer : public Normalizer {
 public:
  explicit SubprocessNormalizer(std::string command, int timeout_ms = 10000) : proc_(std::move(command), timeout_ms) {}
  Normalization normalize(const StageInput& in) const override;

 private:
  PluginProcess proc_;
};

// Request {"op":"interpret","state":{...},"utterance":"..."} ->
// {"program":"(...)"} or {"state":{...}}, optionally "normalized" and "confidence".
class SubprocessInterpreter : public Interpreter {
 public:
  explicit SubprocessInterpreter(std::string command, int timeout_ms = 10000) : proc_(std::move(command), timeout_ms) {}
  Interpretation interpret(const StageInput& in) const override;

 private:
  PluginProcess proc_;
};

}  // namespace dictate
