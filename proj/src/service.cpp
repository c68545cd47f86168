#include "dictate/service.hpp"

#include <algorithm>
#include <cctype>
#include <map>

#include "dictate/errors.hpp"
#include "dictate/json_codec.hpp"
#include "dictate/text.hpp"

namespace dictate {

using nlohmann::json;

json default_prompts() {
  auto scenario = [](const char* task, const char* prompt, const char* initial) {
    return json{{"task", task}, {"prompt", prompt}, {"initial_state", DocumentState::at_end(text::from_utf8(initial))}};
  };
  return {{"prompts",
           {scenario("replicate_doc", "Hi Ann,\nThe report is due Tuesday. Could you send me your section by Monday?\nThanks,\nSam", ""),
            scenario("elaborate_doc", "Let the team know the launch moved to June and ask who can present the demo.", ""),
            scenario("replicate_op", "Dear Sam, thank you for the lovely gift.", "Dear Sam, thank you for the gift.")}}};
}

json error_json(const std::exception& e) {
  json err = {{"code", "internal"}, {"message", e.what()}};
  if (auto* de = dynamic_cast<const Error*>(&e)) err["code"] = de->code();
  if (auto* se = dynamic_cast<const SchemaError*>(&e)) err["path"] = se->path();
  if (dynamic_cast<const json::exception*>(&e)) err["code"] = "schema";
  return {{"error", err}};
}

namespace {

struct Target {
  std::vector<std::string> path;
  std::map<std::string, std::string> query;
};

std::string percent_decode(std::string_view s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '%' && i + 2 < s.size() && std::isxdigit(static_cast<unsigned char>(s[i + 1])) &&
        std::isxdigit(static_cast<unsigned char>(s[i + 2]))) {
      out += static_cast<char>(std::stoi(std::string(s.substr(i + 1, 2)), nullptr, 16));
      i += 2;
    } else {
      out += s[i] == '+' ? ' ' : s[i];
    }
  }
  return out;
}

Target parse_target(const std::string& target) {
  Target t;
  auto q = target.find('?');
  std::string_view path(target.data(), q == std::string::npos ? target.size() : q);
  std::size_t at = 0;
  while (at < path.size()) {
    auto next = path.find('/', at);
    if (next == std::string_view::npos) next = path.size();
    if (next > at) t.path.push_back(percent_decode(path.substr(at, next - at)));
    at = next + 1;
  }
  if (q != std::string::npos) {
    std::string_view query(target.data() + q + 1, target.size() - q - 1);
    at = 0;
    while (at < query.size()) {
      auto next = query.find('&', at);
      if (next == std::string_view::npos) next = query.size();
      auto pair = query.substr(at, next - at);
      auto eq = pair.find('=');
      if (eq == std::string_view::npos) {
        t.query[percent_decode(pair)] = "";
      } else {
        t.query[percent_decode(pair.substr(0, eq))] = percent_decode(pair.substr(eq + 1));
      }
      at = next + 1;
    }
  }
  return t;
}

// Ids name files in the store, so keep them to a safe alphabet.
void check_id(const std::string& id) {
  bool ok = !id.empty() && id.size() <= 128 && id[0] != '.' &&
            std::all_of(id.begin(), id.end(), [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.'; });
  if (!ok) throw SessionError("bad_id", "ids use letters, digits, '_', '-' and '.'");
}

class NotFound : public Error {
 public:
  explicit NotFound(const std::string& what) : Error("not_found", what) {}
};

}  // namespace

Service::Service(ServiceOptions options) : options_(std::move(options)) {
  if (options_.prompts.is_null()) options_.prompts = default_prompts();
  if (!options_.store.empty()) std::filesystem::create_directories(options_.store);
  if (!options_.config.needs_trajectory()) factory_ = make_stage_factory(options_.config);
}

SessionOptions Service::session_options(SessionMode mode) const {
  SessionOptions o;
  o.mode = mode;
  o.store = options_.store;
  if (mode == SessionMode::demo) {
    if (!factory_) throw SessionError("config", "demo sessions cannot use gold stages");
    o.stages = factory_(Trajectory{});
    o.pipeline = options_.config.pipeline;
  }
  return o;
}

std::filesystem::path Service::trajectory_path(const std::string& id) const {
  check_id(id);
  if (options_.store.empty()) throw SessionError("no_store", "the server has no trajectory store");
  return options_.store / (id + ".json");
}

HttpReply Service::http(const std::string& method, const std::string& target, const std::string& body) {
  try {
    auto t = parse_target(target);
    const auto& p = t.path;
    if (p.size() == 1 && p[0] == "prompts" && method == "GET") return {200, options_.prompts};

    if (!p.empty() && p[0] == "trajectories") {
      if (p.size() == 1 && method == "GET") {
        json list = json::array();
        if (!options_.store.empty()) {
          for (const auto& f : corpus_files(options_.store)) {
            json entry = {{"id", f.stem().string()}};
            try {
              auto traj = load_trajectory(f);
              entry["task"] = to_string(traj.task);
              entry["prompt"] = traj.prompt;
              entry["segments"] = traj.segments.size();
            } catch (const std::exception& e) {
              entry["error"] = error_json(e)["error"];
            }
            list.push_back(std::move(entry));
          }
        }
        return {200, {{"trajectories", list}}};
      }
      if (p.size() == 2 && method == "GET") {
        auto path = trajectory_path(p[1]);
        if (!std::filesystem::exists(path)) throw NotFound("no trajectory '" + p[1] + "'");
        return {200, to_json(load_trajectory(path))};
      }
      if (p.size() == 2 && method == "PUT") {
        auto path = trajectory_path(p[1]);
        auto traj = trajectory_from_json(json::parse(body));
        if (traj.id != p[1]) throw SchemaError("id", "trajectory id '" + traj.id + "' does not match the URL");
        validate(traj);
        const bool existed = std::filesystem::exists(path);
        save_trajectory(traj, path);
        return {existed ? 200 : 201, {{"id", traj.id}, {"saved", path.string()}}};
      }
    }

    if (!p.empty() && p[0] == "sessions") {
      if (p.size() == 1 && method == "GET") return {200, {{"sessions", sessions_.ids()}}};
      if (p.size() == 1 && method == "POST") {
        auto j = json::parse(body);
        if (!j.is_object() || !j.contains("id") || !j["id"].is_string()) throw SchemaError("id", "missing");
        auto id = j["id"].get<std::string>();
        check_id(id);
        auto o = session_options(session_mode_from_string(j.value("mode", std::string("annotate"))));
        if (j.contains("task")) o.task = task_from_string(j["task"].get<std::string>());
        if (j.contains("prompt")) o.prompt = j["prompt"].get<std::string>();
        if (j.contains("initial_state")) o.initial_state = j["initial_state"].get<DocumentState>();
        return {201, sessions_.create(id, std::move(o))->snapshot()};
      }
      if (p.size() == 2 && method == "DELETE") {
        sessions_.close(p[1]);
        return {200, {{"closed", p[1]}}};
      }
    }
    return {404, {{"error", {{"code", "not_found"}, {"message", method + " " + target + " is not an endpoint"}}}}};
  } catch (const std::exception& e) {
    auto err = error_json(e);
    const auto code = err["error"]["code"].get<std::string>();
    int status = 400;
    if (code == "not_found" || code == "unknown_session") status = 404;
    if (code == "duplicate_session") status = 409;
    if (code == "internal" || code == "io") status = 500;
    return {status, err};
  }
}

std::shared_ptr<Session> Service::open_socket(const std::string& target, json& snapshot) {
  auto t = parse_target(target);
  if (t.path.size() != 2 || t.path[0] != "session") throw NotFound("no socket endpoint at " + target);
  const auto& id = t.path[1];
  check_id(id);
  std::int64_t offset = 0;
  if (auto it = t.query.find("clock_offset_ms"); it != t.query.end()) {
    try {
      offset = std::stoll(it->second);
    } catch (const std::exception&) {
      throw SchemaError("clock_offset_ms", "expected an integer");
    }
  }
  if (t.query.count("create") && t.query["create"] != "0") {
    auto mode = t.query.count("mode") ? session_mode_from_string(t.query["mode"]) : SessionMode::annotate;
    sessions_.create(id, session_options(mode));
  }
  return sessions_.attach(id, offset, &snapshot);
}

}  // namespace dictate
