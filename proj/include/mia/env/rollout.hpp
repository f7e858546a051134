#pragma once

#include <cstdint>

#include "mia/core/policy.hpp"
#include "mia/core/types.hpp"
#include "mia/env/environment.hpp"

namespace mia {

// One episode from reset(seed) until terminal. Each action is the policy output
// plus zero-mean Gaussian noise with marginal std explore_noise per component
// (drawn from a stream derived from `seed`), clamped to the action box.
// noise_correlation in [0, 1) makes the noise a stationary AR(1) process,
//   n_t = rho * n_{t-1} + sqrt(1 - rho^2) * explore_noise * eps_t;
// rho = 0 gives independent draws.
Trajectory rollout(Environment& env, const Policy& policy, std::uint64_t seed,
                   double explore_noise = 0.0, double noise_correlation = 0.0);

std::vector<float> to_float(std::span<const double> v);
std::vector<double> to_double(std::span<const float> v);

}  // namespace mia
