#include "dictate/config.hpp"

#include <cstdlib>
#include <fstream>

#include "dictate/errors.hpp"
#include "dictate/plugin.hpp"

namespace dictate {

using nlohmann::json;

namespace {

StageSpec stage_from(const json& j, const std::string& key, StageSpec fallback, std::initializer_list<const char*> kinds) {
  if (!j.contains(key)) return fallback;
  const auto& v = j[key];
  StageSpec s;
  if (v.is_string()) {
    s.kind = v.get<std::string>();
  } else if (v.is_object() && v.contains("kind")) {
    s.kind = v["kind"].get<std::string>();
    s.command = v.value("command", "");
    s.timeout_ms = v.value("timeout_ms", 10000);
  } else {
    throw SchemaError(key, "expected a stage name or {\"kind\": ...}");
  }
  if (s.kind == "subprocess") {
    if (s.command.empty()) throw SchemaError(key + "/command", "subprocess stages need a command");
    return s;
  }
  for (const char* k : kinds) {
    if (s.kind == k) return s;
  }
  throw SchemaError(key, "unknown stage '" + s.kind + "'");
}

std::vector<Demonstration> load_demonstrations(const std::filesystem::path& path) {
  if (path.empty()) return {};
  std::ifstream in(path);
  if (!in) throw SchemaError("external/demonstrations", "cannot open " + path.string());
  try {
    return json::parse(in).get<std::vector<Demonstration>>();
  } catch (const json::exception& e) {
    throw SchemaError("external/demonstrations", e.what());
  }
}

}  // namespace

Config config_from_json(const json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) throw SchemaError("", "config must be a JSON object");
  Config c;
  try {
    c.tagger = stage_from(j, "tagger", c.tagger, {"baseline", "gold"});
    c.normalizer = stage_from(j, "normalizer", c.normalizer, {"identity", "gold"});
    c.interpreter = stage_from(j, "interpreter", c.interpreter, {"template", "external", "gold"});
    if (j.contains("mode")) c.mode = mode_from_string(j["mode"].get<std::string>());
    c.pipeline.tau_commit = j.value("tau_commit", c.pipeline.tau_commit);
    c.pipeline.max_open_finals = j.value("max_open_finals", c.pipeline.max_open_finals);
    c.pipeline.commits_enabled = j.value("commits_enabled", c.pipeline.commits_enabled);
    if (j.contains("external")) {
      const auto& e = j["external"];
      c.external.endpoint = e.value("endpoint", c.external.endpoint);
      c.external.model = e.value("model", c.external.model);
      c.external.api_key_env = e.value("api_key_env", c.external.api_key_env);
      c.external.timeout_ms = e.value("timeout_ms", c.external.timeout_ms);
      if (e.contains("demonstrations")) {
        std::filesystem::path p = e["demonstrations"].get<std::string>();
        c.external.demonstrations = p.is_relative() && !base_dir.empty() ? base_dir / p : p;
      }
    }
  } catch (const json::exception& e) {
    throw SchemaError("config", e.what());
  } catch (const SchemaError&) {
    throw;
  } catch (const Error& e) {
    throw SchemaError("mode", e.what());
  }
  if (c.pipeline.max_open_finals == 0) throw SchemaError("max_open_finals", "must be at least 1");
  return c;
}

Config load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError(path.string(), "cannot open");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw SchemaError(path.string(), e.what());
  }
  return config_from_json(j, path.parent_path());
}

Config gold_config() {
  Config c;
  c.tagger.kind = c.normalizer.kind = c.interpreter.kind = "gold";
  return c;
}

StageFactory make_stage_factory(const Config& cfg) {
  Stages fixed;
  if (cfg.tagger.kind == "baseline") fixed.tagger = std::make_shared<BaselineTagger>();
  if (cfg.tagger.kind == "subprocess") fixed.tagger = std::make_shared<SubprocessTagger>(cfg.tagger.command, cfg.tagger.timeout_ms);
  if (cfg.normalizer.kind == "identity") fixed.normalizer = std::make_shared<IdentityNormalizer>();
  if (cfg.normalizer.kind == "subprocess") {
    fixed.normalizer = std::make_shared<SubprocessNormalizer>(cfg.normalizer.command, cfg.normalizer.timeout_ms);
  }
  if (cfg.interpreter.kind == "template") fixed.interpreter = std::make_shared<TemplateInterpreter>();
  if (cfg.interpreter.kind == "subprocess") {
    fixed.interpreter = std::make_shared<SubprocessInterpreter>(cfg.interpreter.command, cfg.interpreter.timeout_ms);
  }
  if (cfg.interpreter.kind == "external") {
    const char* key = std::getenv(cfg.external.api_key_env.c_str());
    auto client = std::make_shared<HttpCompletionClient>(cfg.external.endpoint, cfg.external.model, key ? key : "", cfg.external.timeout_ms);
    fixed.interpreter = std::make_shared<ExternalInterpreter>(client, cfg.mode, load_demonstrations(cfg.external.demonstrations));
  }
  return [fixed](const Trajectory& t) {
    Stages s = fixed;
    if (!s.tagger || !s.normalizer || !s.interpreter) {
      Stages gold = gold_stages(t);
      if (!s.tagger) s.tagger = gold.tagger;
      if (!s.normalizer) s.normalizer = gold.normalizer;
      if (!s.interpreter) s.interpreter = gold.interpreter;
    }
    return s;
  };
}

}  // namespace dictate
