#include "mia/env/env_spec.hpp"

#include "mia/core/errors.hpp"

namespace mia {

void EnvSpec::validate() const {
  if (state_dim == 0 || action_dim == 0) throw DomainError("EnvSpec: dimensions must be positive");
  if (action_low.size() != action_dim || action_high.size() != action_dim)
    throw DomainError("EnvSpec: action bounds must have action_dim entries");
  for (std::size_t i = 0; i < action_dim; ++i) {
    if (!(action_low[i] < action_high[i]))
      throw DomainError("EnvSpec: action_low must be < action_high componentwise");
  }
  if (t_max == 0) throw DomainError("EnvSpec: t_max must be >= 1");
}

bool EnvSpec::compatible_with(const EnvSpec& other, bool ignore_name) const {
  return (ignore_name || name == other.name) && state_dim == other.state_dim &&
         action_dim == other.action_dim && action_low == other.action_low &&
         action_high == other.action_high && t_max == other.t_max;
}

nlohmann::json to_json(const EnvSpec& spec) {
  return {{"name", spec.name},
          {"state_dim", spec.state_dim},
          {"action_dim", spec.action_dim},
          {"action_low", spec.action_low},
          {"action_high", spec.action_high},
          {"t_max", spec.t_max}};
}

EnvSpec env_spec_from_json(const nlohmann::json& j) {
  try {
    EnvSpec spec;
    spec.name = j.at("name").get<std::string>();
    spec.state_dim = j.at("state_dim").get<std::size_t>();
    spec.action_dim = j.at("action_dim").get<std::size_t>();
    spec.action_low = j.at("action_low").get<std::vector<double>>();
    spec.action_high = j.at("action_high").get<std::vector<double>>();
    spec.t_max = j.at("t_max").get<std::size_t>();
    spec.validate();
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed EnvSpec: ") + e.what());
  }
}

namespace {
EnvSpec box_spec(std::string name, std::size_t ds, std::size_t da, std::size_t t_max) {
  return EnvSpec{std::move(name), ds, da, std::vector<double>(da, -1.0),
                 std::vector<double>(da, 1.0), t_max};
}
}  // namespace

EnvSpec hopper_v2_spec(std::size_t t_max) { return box_spec("Hopper-v2", 11, 3, t_max); }

EnvSpec half_cheetah_v2_spec(std::size_t t_max) {
  return box_spec("HalfCheetah-v2", 17, 6, t_max);
}

}  // namespace mia
