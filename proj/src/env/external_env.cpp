#include "mia/env/external_env.hpp"

#include <istream>
#include <ostream>

#include <sys/wait.h>
#include <unistd.h>

#include "mia/core/errors.hpp"

namespace mia {

using nlohmann::json;

json handle_environment_request(Environment& env, const json& request) {
  try {
    const auto op = request.at("op").get<std::string>();
    if (op == "spec") return {{"ok", true}, {"spec", to_json(env.spec())}};
    if (op == "reset") return {{"ok", true}, {"state", env.reset(request.at("seed").get<std::uint64_t>())}};
    if (op == "step") {
      const auto action = request.at("action").get<std::vector<double>>();
      const auto r = env.step(action);
      return {{"ok", true}, {"next_state", r.next_state}, {"reward", r.reward}, {"terminal", r.terminal}};
    }
    return {{"ok", false}, {"error", "unknown op '" + op + "'"}};
  } catch (const std::exception& e) {
    return {{"ok", false}, {"error", e.what()}};
  }
}

void serve_environment(Environment& env, std::istream& in, std::ostream& out) {
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json response;
    try {
      response = handle_environment_request(env, json::parse(line));
    } catch (const json::exception& e) {
      response = {{"ok", false}, {"error", std::string("bad request: ") + e.what()}};
    }
    out << response.dump() << '\n' << std::flush;
  }
}

StreamEnvironment::StreamEnvironment(std::FILE* to_server, std::FILE* from_server)
    : to_server_(to_server), from_server_(from_server) {
  spec_ = env_spec_from_json(call({{"op", "spec"}}).at("spec"));
}

json StreamEnvironment::call(const json& request) {
  const std::string line = request.dump() + "\n";
  if (std::fputs(line.c_str(), to_server_) < 0 || std::fflush(to_server_) != 0)
    throw FormatError("external environment: write failed");
  std::string reply;
  int c = 0;
  while ((c = std::fgetc(from_server_)) != EOF && c != '\n') reply.push_back(static_cast<char>(c));
  if (reply.empty()) throw FormatError("external environment: connection closed");
  json response;
  try {
    response = json::parse(reply);
  } catch (const json::exception& e) {
    throw FormatError(std::string("external environment: malformed reply: ") + e.what());
  }
  if (!response.value("ok", false)) {
    const auto msg = response.value("error", std::string("unspecified error"));
    if (msg.find("after terminal") != std::string::npos || msg.find("before reset") != std::string::npos)
      throw StateError("external environment: " + msg);
    throw FormatError("external environment: " + msg);
  }
  return response;
}

std::vector<double> StreamEnvironment::reset(std::uint64_t seed) {
  return call({{"op", "reset"}, {"seed", seed}}).at("state").get<std::vector<double>>();
}

StepResult StreamEnvironment::step(std::span<const double> action) {
  const auto clamped = clamp_action(action, spec_);
  const json r = call({{"op", "step"}, {"action", clamped}});
  return {r.at("next_state").get<std::vector<double>>(), r.at("reward").get<double>(),
          r.at("terminal").get<bool>()};
}

ProcessEnvironment::Pipes ProcessEnvironment::spawn(const std::vector<std::string>& argv) {
  if (argv.empty()) throw DomainError("ProcessEnvironment: empty command");
  int to_child[2];
  int from_child[2];
  if (pipe(to_child) != 0 || pipe(from_child) != 0)
    throw std::runtime_error("ProcessEnvironment: pipe() failed");
  const pid_t pid = fork();
  if (pid < 0) throw std::runtime_error("ProcessEnvironment: fork() failed");
  if (pid == 0) {
    dup2(to_child[0], STDIN_FILENO);
    dup2(from_child[1], STDOUT_FILENO);
    close(to_child[0]);
    close(to_child[1]);
    close(from_child[0]);
    close(from_child[1]);
    std::vector<char*> args;
    for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
    args.push_back(nullptr);
    execvp(args[0], args.data());
    _exit(127);
  }
  close(to_child[0]);
  close(from_child[1]);
  return {fdopen(to_child[1], "w"), fdopen(from_child[0], "r"), pid};
}

ProcessEnvironment::ProcessEnvironment(const std::vector<std::string>& argv)
    : ProcessEnvironment(spawn(argv)) {}

ProcessEnvironment::ProcessEnvironment(Pipes pipes)
    : StreamEnvironment(pipes.to_child, pipes.from_child),
      to_child_(pipes.to_child),
      from_child_(pipes.from_child),
      pid_(pipes.pid) {}

ProcessEnvironment::~ProcessEnvironment() {
  std::fclose(to_child_);
  std::fclose(from_child_);
  int status = 0;
  waitpid(pid_, &status, 0);
}

}  // namespace mia
