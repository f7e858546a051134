#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace mia {

// Deterministic state -> action map. Exploration noise is added by the caller.
class Policy {
 public:
  virtual ~Policy() = default;
  virtual std::size_t action_dim() const = 0;
  virtual std::vector<double> act(std::span<const double> state) const = 0;
};

}  // namespace mia
