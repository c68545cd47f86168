#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dictate {

// Every library failure derives from Error; `code()` is the stable
// machine-readable tag the CLI and the service put in error JSON.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

class BoundsError : public Error {
 public:
  explicit BoundsError(const std::string& message) : Error("bounds", message) {}
};

class ParseError : public Error {
 public:
  ParseError(std::size_t offset, const std::string& message)
      : Error("parse", message + " at offset " + std::to_string(offset)), offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

class ResolutionError : public Error {
 public:
  explicit ResolutionError(const std::string& constraint)
      : Error("resolution", "no text satisfies " + constraint), constraint_(constraint) {}

  const std::string& constraint() const noexcept { return constraint_; }

 private:
  std::string constraint_;
};

class ExecutionError : public Error {
 public:
  explicit ExecutionError(const std::string& message) : Error("execution", message) {}
};

class AlignmentError : public Error {
 public:
  explicit AlignmentError(const std::string& message) : Error("alignment", message) {}
};

class PartitionError : public Error {
 public:
  explicit PartitionError(const std::string& message) : Error("partition", message) {}
};

class StaleEventError : public Error {
 public:
  explicit StaleEventError(const std::string& message) : Error("stale_event", message) {}
};

class SchemaError : public Error {
 public:
  SchemaError(std::string path, const std::string& message)
      : Error("schema", path + ": " + message), path_(std::move(path)), detail_(message) {}

  const std::string& path() const noexcept { return path_; }
  // The message without the path prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  std::string path_;
  std::string detail_;
};

class ChainError : public Error {
 public:
  ChainError(std::size_t segment, const std::string& message)
      : Error("chain", "segment " + std::to_string(segment) + ": " + message), segment_(segment) {}

  std::size_t segment() const noexcept { return segment_; }

 private:
  std::size_t segment_;
};

// Stage plug-in failures (normalizer, interpreter, tagger transport).
class StageError : public Error {
 public:
  StageError(std::string kind, const std::string& message) : Error(std::move(kind), message) {}
};

// Session lifecycle and message handling (duplicate id, unknown session,
// rejected message). `code()` is the specific reason.
class SessionError : public Error {
 public:
  SessionError(std::string code, const std::string& message) : Error(std::move(code), message) {}
};

}  // namespace dictate
