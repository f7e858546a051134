#include "mia/core/returns.hpp"

#include <cmath>

#include "mia/core/errors.hpp"

namespace mia {

Discount::Discount(double gamma) : gamma_(gamma) {
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw DomainError("discount factor must lie in [0, 1]");
}

double discounted_return(std::span<const double> rewards, double gamma) {
  const Discount discount(gamma);
  // Horner evaluation from the tail: G_t = r_t + gamma * G_{t+1}.
  double g = 0.0;
  for (auto it = rewards.rbegin(); it != rewards.rend(); ++it) g = *it + discount.gamma() * g;
  return g;
}

double state_value_estimate(std::span<const Trajectory> trajectories, double gamma) {
  if (trajectories.empty()) throw DomainError("state_value_estimate: no trajectories");
  double total = 0.0;
  for (const auto& t : trajectories) {
    const auto r = t.rewards();
    total += discounted_return(r, gamma);
  }
  return total / static_cast<double>(trajectories.size());
}

}  // namespace mia
