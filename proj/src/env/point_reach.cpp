#include "mia/env/point_reach.hpp"

#include <algorithm>
#include <cmath>

#include "mia/core/errors.hpp"
#include "mia/core/random.hpp"

namespace mia {

std::vector<double> clamp_action(std::span<const double> action, const EnvSpec& spec) {
  if (action.size() != spec.action_dim)
    throw DomainError("action has " + std::to_string(action.size()) + " components, expected " +
                      std::to_string(spec.action_dim));
  std::vector<double> out(action.size());
  for (std::size_t i = 0; i < action.size(); ++i)
    out[i] = std::clamp(action[i], spec.action_low[i], spec.action_high[i]);
  return out;
}

EnvSpec PointReach2D::make_spec(std::size_t t_max) {
  return EnvSpec{"PointReach2D", 2, 2, {-1.0, -1.0}, {1.0, 1.0}, t_max};
}

PointReach2D::PointReach2D(PointReachConfig config)
    : config_(config), spec_(make_spec(config.t_max)) {
  if (config_.sparse_reward) spec_.name = "PointReach2D-sparse";
  spec_.validate();
}

double PointReach2D::distance_to_goal(std::span<const double> state) {
  return std::hypot(state[0] - kGoal[0], state[1] - kGoal[1]);
}

std::vector<double> PointReach2D::reset(std::uint64_t seed) {
  Rng rng = make_rng(seed);
  std::uniform_real_distribution<double> u(-kInitHalfWidth, kInitHalfWidth);
  state_[0] = u(rng);
  state_[1] = u(rng);
  steps_ = 0;
  started_ = true;
  done_ = false;
  return {state_[0], state_[1]};
}

StepResult PointReach2D::step(std::span<const double> action) {
  if (!started_) throw StateError("PointReach2D: step before reset");
  if (done_) throw StateError("PointReach2D: step after terminal");
  const auto a = clamp_action(action, spec_);
  for (int i = 0; i < 2; ++i) state_[i] = std::clamp(state_[i] + kDt * a[i], -kBound, kBound);
  ++steps_;
  const double dist = distance_to_goal(state_);
  const bool at_goal = dist < kGoalRadius;
  StepResult r;
  r.next_state = {state_[0], state_[1]};
  r.reward = config_.sparse_reward ? (at_goal ? 1.0 : 0.0) : -dist;
  r.terminal = at_goal || steps_ >= config_.t_max;
  done_ = r.terminal;
  return r;
}

std::unique_ptr<Environment> make_environment(const std::string& name, std::size_t t_max) {
  if (name == "PointReach2D") return std::make_unique<PointReach2D>(PointReachConfig{t_max, false});
  if (name == "PointReach2D-sparse")
    return std::make_unique<PointReach2D>(PointReachConfig{t_max, true});
  throw DomainError("unknown built-in environment '" + name + "'");
}

EnvFactory environment_factory(const std::string& name, std::size_t t_max) {
  make_environment(name, t_max);  // fail fast on unknown names
  return [name, t_max] { return make_environment(name, t_max); };
}

}  // namespace mia
