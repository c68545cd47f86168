#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <regex>
#include <string>
#include <vector>

#include "dictate/doc.hpp"
#include "dictate/dsl/ast.hpp"

namespace dictate {

// What a normalizer or interpreter sees for one command segment.
struct StageInput {
  const DocumentState& prev;
  std::string utterance;
  std::int64_t start_ms = 0;
  std::int64_t end_ms = 0;
};

struct Normalization {
  std::string text;
  double confidence = 0.0;
};

// An interpreter returns a program, a direct state, or both; the pipeline
// applies the state when present and executes the program otherwise.
// `normalized` is set by stages that repair the utterance themselves.
struct Interpretation {
  std::optional<dsl::Program> program;
  std::optional<DocumentState> state;
  std::optional<std::string> normalized;
  double confidence = 0.0;
};

// Stage implementations must tolerate concurrent calls from several sessions.
class Normalizer {
 public:
  virtual ~Normalizer() = default;
  virtual Normalization normalize(const StageInput& in) const = 0;
};

class Interpreter {
 public:
  virtual ~Interpreter() = default;
  virtual Interpretation interpret(const StageInput& in) const = 0;
};

class IdentityNormalizer : public Normalizer {
 public:
  Normalization normalize(const StageInput& in) const override { return {in.utterance, 0.0}; }
};

// Gold annotations keyed by the segment's start time, which is what stays
// stable between transcript versions.
class GoldNormalizer : public Normalizer {
 public:
  explicit GoldNormalizer(std::map<std::int64_t, std::string> by_start) : by_start_(std::move(by_start)) {}
  Normalization normalize(const StageInput& in) const override;

 private:
  std::map<std::int64_t, std::string> by_start_;
};

struct GoldInterpretation {
  std::optional<dsl::Program> program;
  DocumentState state;
};

class GoldInterpreter : public Interpreter {
 public:
  explicit GoldInterpreter(std::map<std::int64_t, GoldInterpretation> by_start) : by_start_(std::move(by_start)) {}
  Interpretation interpret(const StageInput& in) const override;

 private:
  std::map<std::int64_t, GoldInterpretation> by_start_;
};

// Ordered regex table over the (trimmed, final-period-stripped) utterance.
// Anything unmatched becomes a speech repair: (correction "<utterance>").
class TemplateInterpreter : public Interpreter {
 public:
  TemplateInterpreter();
  Interpretation interpret(const StageInput& in) const override;

  // Exposed for tests; confidence ln 0.95 on a template hit, ln 0.3 otherwise.
  std::pair<dsl::Program, double> translate(const std::string& utterance) const;

 private:
  struct Rule {
    std::regex pattern;
    dsl::Expr (*build)(const std::smatch&);
  };
  std::vector<Rule> rules_;
};

}  // namespace dictate
