#pragma once

#include <span>

#include "mia/core/types.hpp"

namespace mia {

// Validated discount factor in [0, 1].
class Discount {
 public:
  explicit Discount(double gamma);
  double gamma() const { return gamma_; }

 private:
  double gamma_;
};

// Finite-horizon return sum_k gamma^k * rewards[k]. Throws DomainError for gamma outside [0, 1].
double discounted_return(std::span<const double> rewards, double gamma);

// Monte-Carlo estimate of the start-state value: mean discounted return over trajectories.
double state_value_estimate(std::span<const Trajectory> trajectories, double gamma);

}  // namespace mia
