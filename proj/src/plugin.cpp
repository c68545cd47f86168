#include "dictate/plugin.hpp"

#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>

#include "dictate/errors.hpp"
#include "dictate/json_codec.hpp"

namespace dictate {

PluginProcess::PluginProcess(std::string command, int timeout_ms) : command_(std::move(command)), timeout_ms_(timeout_ms) {
  // A child that exits mid-write must surface as an error, not kill us.
  ::signal(SIGPIPE, SIG_IGN);
}

PluginProcess::~PluginProcess() { stop(); }

void PluginProcess::start() const {
  int in[2];
  int out[2];
  if (::pipe(in) != 0) throw StageError("transport", std::string("pipe: ") + std::strerror(errno));
  if (::pipe(out) != 0) {
    ::close(in[0]);
    ::close(in[1]);
    throw StageError("transport", std::string("pipe: ") + std::strerror(errno));
  }
  pid_t pid = ::fork();
  if (pid < 0) throw StageError("transport", std::string("fork: ") + std::strerror(errno));
  if (pid == 0) {
    // Own process group, so stop() also reaches whatever the shell spawned.
    ::setpgid(0, 0);
    ::dup2(in[0], STDIN_FILENO);
    ::dup2(out[1], STDOUT_FILENO);
    ::close(in[0]);
    ::close(in[1]);
    ::close(out[0]);
    ::close(out[1]);
    ::execl("/bin/sh", "sh", "-c", command_.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }
  ::setpgid(pid, pid);
  ::close(in[0]);
  ::close(out[1]);
  pid_ = pid;
  to_child_ = in[1];
  from_child_ = out[0];
  pending_.clear();
}

void PluginProcess::stop() const {
  if (pid_ < 0) return;
  ::close(to_child_);
  ::close(from_child_);
  ::kill(-pid_, SIGKILL);
  ::waitpid(pid_, nullptr, 0);
  pid_ = to_child_ = from_child_ = -1;
  pending_.clear();
}

nlohmann::json PluginProcess::call(const nlohmann::json& request) const {
  std::lock_guard lock(mu_);
  if (pid_ < 0) start();

  std::string line = request.dump() + "\n";
  for (std::size_t sent = 0; sent < line.size();) {
    auto n = ::write(to_child_, line.data() + sent, line.size() - sent);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) {
      stop();
      throw StageError("transport", "plugin closed its input: " + command_);
    }
    sent += static_cast<std::size_t>(n);
  }

  auto deadline = std::chrono::steady_clock::now() + std::chrono::milliseconds(timeout_ms_);
  while (pending_.find('\n') == std::string::npos) {
    auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now()).count();
    if (left <= 0) {
      stop();
      throw StageError("timeout", "plugin did not answer within " + std::to_string(timeout_ms_) + "ms: " + command_);
    }
    pollfd p{from_child_, POLLIN, 0};
    int r = ::poll(&p, 1, static_cast<int>(left));
    if (r < 0 && errno == EINTR) continue;
    if (r <= 0) continue;
    char buf[4096];
    auto n = ::read(from_child_, buf, sizeof buf);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) {
      stop();
      throw StageError("transport", "plugin exited: " + command_);
    }
    pending_.append(buf, static_cast<std::size_t>(n));
  }
  auto nl = pending_.find('\n');
  std::string reply = pending_.substr(0, nl);
  pending_.erase(0, nl + 1);

  nlohmann::json j;
  try {
    j = nlohmann::json::parse(reply);
  } catch (const nlohmann::json::exception& e) {
    throw StageError("plugin", std::string("plugin reply is not JSON: ") + e.what());
  }
  if (j.is_object() && j.contains("error")) throw StageError("plugin", j["error"].dump());
  return j;
}

TagSequence SubprocessTagger::tag(const TranscriptView& t) const {
  auto reply = proc_.call({{"op", "tag"}, {"tokens", t.tokens}, {"final_ends", t.final_ends}});
  try {
    return reply.get<TagSequence>();
  } catch (const std::exception& e) {
    throw StageError("plugin", std::string("bad tagger reply: ") + e.what());
  }
}

Normalization SubprocessNormalizer::normalize(const StageInput& in) const {
  auto reply = proc_.call({{"op", "normalize"}, {"state", in.prev}, {"utterance", in.utterance}});
  try {
    return {reply.at("text").get<std::string>(), reply.value("confidence", 0.0)};
  } catch (const nlohmann::json::exception& e) {
    throw StageError("plugin", std::string("bad normalizer reply: ") + e.what());
  }
}

Interpretation SubprocessInterpreter::interpret(const StageInput& in) const {
  auto reply = proc_.call({{"op", "interpret"}, {"state", in.prev}, {"utterance", in.utterance}});
  Interpretation out;
  try {
    if (reply.contains("program")) out.program = dsl::parse_program(reply["program"].get<std::string>());
    if (reply.contains("state")) out.state = reply["state"].get<DocumentState>();
    if (reply.contains("normalized")) out.normalized = reply["normalized"].get<std::string>();
    out.confidence = reply.value("confidence", 0.0);
  } catch (const nlohmann::json::exception& e) {
    throw StageError("plugin", std::string("bad interpreter reply: ") + e.what());
  } catch (const ParseError& e) {
    throw StageError("plugin", std::string("unparseable program from plugin: ") + e.what());
  }
  return out;
}

}  // namespace dictate
