#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <json.hpp>

namespace mia {

// Public description of a task: dimensions, action box and episode horizon.
struct EnvSpec {
  std::string name;
  std::size_t state_dim = 0;
  std::size_t action_dim = 0;
  std::vector<double> action_low;
  std::vector<double> action_high;
  std::size_t t_max = 0;

  // Throws DomainError when dims are zero, bounds are inconsistent or t_max == 0.
  void validate() const;

  // Same dims, bounds and horizon (names may differ only if ignore_name).
  bool compatible_with(const EnvSpec& other, bool ignore_name = false) const;

  bool operator==(const EnvSpec&) const = default;
};

nlohmann::json to_json(const EnvSpec& spec);
EnvSpec env_spec_from_json(const nlohmann::json& j);

// Fixtures for the MuJoCo tasks reachable through the external adapter.
EnvSpec hopper_v2_spec(std::size_t t_max = 1000);
EnvSpec half_cheetah_v2_spec(std::size_t t_max = 1000);

}  // namespace mia
