#pragma once

#include <cstdint>
#include <vector>

#include "mia/env/environment.hpp"
#include "mia/oracle/policies.hpp"

namespace mia {

struct DdpgConfig {
  std::vector<int> hidden{64, 64};
  double actor_lr = 1e-3;
  double critic_lr = 1e-3;
  double gamma = 0.99;
  double tau = 0.005;           // soft target-update rate
  double explore_noise = 0.1;   // Gaussian, per action component
  std::size_t warmup_steps = 1000;  // uniform-random actions before learning starts
  std::size_t batch_size = 64;
  std::size_t buffer_capacity = 100000;
  std::size_t eval_episodes = 20;
};

struct BehaviorTrainingResult {
  ActorPolicy policy;
  double eval_return = 0.0;  // mean undiscounted return of noiseless evaluation rollouts
  std::size_t updates = 0;
};

// Deterministic actor-critic training (critic regression on one-step
// bootstrapped targets, actor ascent on the critic, soft target updates) from
// online interaction. total_steps == 0 returns the randomly initialised actor;
// otherwise total_steps must be >= warmup_steps. Throws DivergenceError when a
// loss or the evaluation return is non-finite.
BehaviorTrainingResult train_behavior_policy(Environment& env, std::size_t total_steps, const DdpgConfig& config,
                                             std::uint64_t seed);

}  // namespace mia
