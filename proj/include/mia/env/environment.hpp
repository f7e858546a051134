#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "mia/env/env_spec.hpp"

namespace mia {

struct StepResult {
  std::vector<double> next_state;
  double reward = 0.0;
  bool terminal = false;
};

// Episodic task with a seeded initial-state distribution.
//
// Contract: reset(seed) is a pure function of seed (bitwise), so two instances
// of the same spec produce the same s0 for the same seed. step() reports
// terminal when an absorbing state is entered or the T_max-th step is taken,
// and throws StateError if called after termination or before reset.
class Environment {
 public:
  virtual ~Environment() = default;
  virtual const EnvSpec& spec() const = 0;
  virtual std::vector<double> reset(std::uint64_t seed) = 0;
  virtual StepResult step(std::span<const double> action) = 0;
};

using EnvFactory = std::function<std::unique_ptr<Environment>()>;

// Componentwise clamp of an action into the spec's box.
std::vector<double> clamp_action(std::span<const double> action, const EnvSpec& spec);

}  // namespace mia
