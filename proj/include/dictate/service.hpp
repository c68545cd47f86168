#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include <json.hpp>

#include "dictate/config.hpp"
#include "dictate/session.hpp"

namespace dictate {

struct ServiceOptions {
  // Trajectory store: one <id>.json per trajectory. Sessions submit here.
  std::filesystem::path store;
  // Stages for demo sessions; gold stages are not allowed there.
  Config config;
  // Body of GET /prompts.
  nlohmann::json prompts;
};

// Target documents for the three demonstration tasks.
nlohmann::json default_prompts();

struct HttpReply {
  int status = 200;
  nlohmann::json body;
};

// {"error": {"code", "message", "path"?}}
nlohmann::json error_json(const std::exception& e);

// Transport-independent half of the server:
//   GET    /prompts
//   GET    /trajectories           [{id, task, prompt}] (or {id, error})
//   GET    /trajectories/{id}
//   PUT    /trajectories/{id}      validated, then saved atomically
//   GET    /sessions               live session ids
//   POST   /sessions               {"id", "mode"?, "task"?, "prompt"?, "initial_state"?}
//   DELETE /sessions/{id}
// and the socket endpoint /session/{id}?create=1&mode=annotate&clock_offset_ms=0.
class Service {
 public:
  explicit Service(ServiceOptions options);

  HttpReply http(const std::string& method, const std::string& target, const std::string& body);

  // Resolves a socket target to its session, creating it when the query asks
  // for that, and returns the attach snapshot. Throws Error.
  std::shared_ptr<Session> open_socket(const std::string& target, nlohmann::json& snapshot);

  SessionRegistry& sessions() { return sessions_; }

 private:
  SessionOptions session_options(SessionMode mode) const;
  std::filesystem::path trajectory_path(const std::string& id) const;

  ServiceOptions options_;
  StageFactory factory_;
  SessionRegistry sessions_;
};

}  // namespace dictate
