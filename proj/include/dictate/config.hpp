#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "dictate/external.hpp"
#include "dictate/pipeline.hpp"
#include "dictate/trajectory.hpp"

namespace dictate {

// A stage is named by kind ("baseline", "keys", "gold", "identity",
// "template", "external", "subprocess"); subprocess stages carry a command.
struct StageSpec {
  std::string kind;
  std::string command;
  int timeout_ms = 10000;
};

struct ExternalSettings {
  std::string endpoint = "http://127.0.0.1:8000/v1/completions";
  std::string model;
  // Name of the environment variable holding the API key; never the key itself.
  std::string api_key_env = "DICTATE_API_KEY";
  int timeout_ms = 30000;
  std::filesystem::path demonstrations;
};

// {
//   "tagger": "baseline" | "gold" | {"kind": "subprocess", "command": "..."},
//   "normalizer": "identity" | "gold" | {...},
//   "interpreter": "template" | "external" | "gold" | {...},
//   "mode": "state" | "program",
//   "tau_commit": -0.693, "max_open_finals": 4,
//   "external": {"endpoint", "model", "api_key_env", "timeout_ms", "demonstrations"}
// }
struct Config {
  StageSpec tagger{"baseline", ""};
  StageSpec normalizer{"identity", ""};
  StageSpec interpreter{"template", ""};
  InterpretMode mode = InterpretMode::state;
  PipelineConfig pipeline;
  ExternalSettings external;

  bool needs_trajectory() const { return tagger.kind == "gold" || normalizer.kind == "gold" || interpreter.kind == "gold"; }
};

// Relative paths inside the file resolve against `base_dir`. Throws SchemaError.
Config config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
Config load_config(const std::filesystem::path& path);
// Every stage gold.
Config gold_config();

// Builds stage instances once (subprocesses and HTTP clients are shared) and
// returns a factory that fills in gold stages from each trajectory.
StageFactory make_stage_factory(const Config& cfg);

}  // namespace dictate
