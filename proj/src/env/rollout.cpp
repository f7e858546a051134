#include "mia/env/rollout.hpp"

#include <cmath>

#include "mia/core/errors.hpp"
#include "mia/core/random.hpp"

namespace mia {

std::vector<float> to_float(std::span<const double> v) {
  return {v.begin(), v.end()};
}

std::vector<double> to_double(std::span<const float> v) {
  return {v.begin(), v.end()};
}

Trajectory rollout(Environment& env, const Policy& policy, std::uint64_t seed,
                   double explore_noise, double noise_correlation) {
  const EnvSpec& spec = env.spec();
  if (policy.action_dim() != spec.action_dim)
    throw DomainError("rollout: policy action dim does not match environment");
  if (!(explore_noise >= 0.0)) throw DomainError("rollout: exploration noise must be >= 0");
  if (!(noise_correlation >= 0.0 && noise_correlation < 1.0))
    throw DomainError("rollout: noise correlation must lie in [0, 1)");

  Rng noise_rng = make_rng(seed, 1);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double innovation = std::sqrt(1.0 - noise_correlation * noise_correlation);
  std::vector<double> noise(spec.action_dim, 0.0);

  std::vector<Transition> transitions;
  transitions.reserve(spec.t_max);
  std::vector<double> state = env.reset(seed);
  for (std::size_t t = 0; t < spec.t_max; ++t) {
    auto action = policy.act(state);
    if (explore_noise > 0.0) {
      for (std::size_t i = 0; i < action.size(); ++i) {
        const double eps = explore_noise * gauss(noise_rng);
        noise[i] = t == 0 ? eps : noise_correlation * noise[i] + innovation * eps;
        action[i] += noise[i];
      }
    }
    action = clamp_action(action, spec);
    StepResult r = env.step(action);
    for (double x : r.next_state)
      if (!std::isfinite(x)) throw DivergenceError("rollout: environment produced a non-finite state");
    // Stored flag marks absorbing states only; hitting the horizon is truncation.
    const bool absorbing = r.terminal && t + 1 < spec.t_max;
    transitions.push_back(Transition{to_float(state), to_float(action), static_cast<float>(r.reward),
                                     to_float(r.next_state), absorbing});
    state = std::move(r.next_state);
    if (r.terminal) break;
  }
  return Trajectory(std::move(transitions));
}

}  // namespace mia
