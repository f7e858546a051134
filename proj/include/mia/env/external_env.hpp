#pragma once

#include <cstdio>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "mia/env/environment.hpp"

namespace mia {

// Line-delimited JSON protocol for out-of-process simulators.
//
// Requests (one JSON object per line):
//   {"op":"spec"}
//   {"op":"reset","seed":<uint64>}
//   {"op":"step","action":[...]}
// Responses:
//   {"ok":true,"spec":{<EnvSpec fields>}}
//   {"ok":true,"state":[...]}
//   {"ok":true,"next_state":[...],"reward":r,"terminal":bool}
//   {"ok":false,"error":"message"}
// An adapter must honour the seeding contract: equal reset seeds give equal states.

// Answers protocol requests read from `in` using `env` until EOF.
void serve_environment(Environment& env, std::istream& in, std::ostream& out);

// Handles a single request; exposed for tests.
nlohmann::json handle_environment_request(Environment& env, const nlohmann::json& request);

// Client side over a pair of C streams (pipe or socket fds wrapped with fdopen).
class StreamEnvironment : public Environment {
 public:
  StreamEnvironment(std::FILE* to_server, std::FILE* from_server);

  const EnvSpec& spec() const override { return spec_; }
  std::vector<double> reset(std::uint64_t seed) override;
  StepResult step(std::span<const double> action) override;

 protected:
  nlohmann::json call(const nlohmann::json& request);

 private:
  std::FILE* to_server_;
  std::FILE* from_server_;
  EnvSpec spec_;
};

// Spawns `argv` as a child process and talks to it over its stdin/stdout.
class ProcessEnvironment final : public StreamEnvironment {
 public:
  explicit ProcessEnvironment(const std::vector<std::string>& argv);
  ~ProcessEnvironment() override;

  ProcessEnvironment(const ProcessEnvironment&) = delete;
  ProcessEnvironment& operator=(const ProcessEnvironment&) = delete;

 private:
  struct Pipes {
    std::FILE* to_child;
    std::FILE* from_child;
    int pid;
  };
  ProcessEnvironment(Pipes pipes);
  static Pipes spawn(const std::vector<std::string>& argv);

  std::FILE* to_child_;
  std::FILE* from_child_;
  int pid_;
};

}  // namespace mia
