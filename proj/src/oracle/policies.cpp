#include "mia/oracle/policies.hpp"

#include <algorithm>

#include "mia/core/errors.hpp"
#include "mia/nn/archive.hpp"

namespace mia {

GoalSeekingPolicy::GoalSeekingPolicy(std::vector<double> goal, double gain, const EnvSpec& spec)
    : goal_(std::move(goal)), gain_(gain), spec_(spec) {
  if (goal_.size() != spec.action_dim || spec.state_dim < goal_.size())
    throw DomainError("GoalSeekingPolicy: goal dimension does not fit the environment");
}

std::vector<double> GoalSeekingPolicy::act(std::span<const double> state) const {
  std::vector<double> a(goal_.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    a[i] = std::clamp(gain_ * (goal_[i] - state[i]), spec_.action_low[i], spec_.action_high[i]);
  return a;
}

std::vector<double> UniformRandomPolicy::act(std::span<const double>) const {
  std::vector<double> a(spec_.action_dim);
  for (std::size_t i = 0; i < a.size(); ++i)
    a[i] = std::uniform_real_distribution<double>(spec_.action_low[i], spec_.action_high[i])(rng_);
  return a;
}

nn::Vec<double> bound_half_range(const EnvSpec& spec) {
  nn::Vec<double> h(static_cast<Eigen::Index>(spec.action_dim));
  for (std::size_t i = 0; i < spec.action_dim; ++i)
    h(static_cast<Eigen::Index>(i)) = 0.5 * (spec.action_high[i] - spec.action_low[i]);
  return h;
}

nn::Mat<double> scale_to_bounds(const nn::Mat<double>& unit, const EnvSpec& spec) {
  nn::Mat<double> out = unit;
  for (std::size_t i = 0; i < spec.action_dim; ++i) {
    const double mid = 0.5 * (spec.action_high[i] + spec.action_low[i]);
    const double half = 0.5 * (spec.action_high[i] - spec.action_low[i]);
    out.row(static_cast<Eigen::Index>(i)) = (unit.row(static_cast<Eigen::Index>(i)).array() * half + mid).matrix();
  }
  return out;
}

ActorPolicy::ActorPolicy(nn::Mlp<double> actor, EnvSpec spec) : actor_(std::move(actor)), spec_(std::move(spec)) {
  if (actor_.in_dim() != static_cast<int>(spec_.state_dim) || actor_.out_dim() != static_cast<int>(spec_.action_dim))
    throw DomainError("ActorPolicy: network shape does not match the EnvSpec");
}

std::vector<double> ActorPolicy::act(std::span<const double> state) const {
  const nn::Mat<double> s = Eigen::Map<const nn::Vec<double>>(state.data(), static_cast<Eigen::Index>(state.size()));
  const nn::Mat<double> a = scale_to_bounds(actor_.forward(s), spec_);
  std::vector<double> out(a.data(), a.data() + a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::clamp(out[i], spec_.action_low[i], spec_.action_high[i]);
  return out;
}


void ActorPolicy::save(const std::filesystem::path& path) const {
  const nlohmann::json config = {{"layers", actor_.sizes()}, {"output", "tanh"}};
  nn::save_archive(path, nn::make_archive("behavior-policy", to_json(spec_), config, nlohmann::json::object(),
                                          nn::tensors_to_json(actor_.params())));
}

ActorPolicy ActorPolicy::load(const std::filesystem::path& path, const std::optional<EnvSpec>& expected) {
  const auto a = nn::load_archive(path, "behavior-policy");
  const EnvSpec spec = env_spec_from_json(a.at("env_spec"));
  if (expected && !spec.compatible_with(*expected, true))
    throw FormatError("behaviour-policy archive was trained for " + spec.name + " with incompatible dims");
  Rng rng(0);
  nn::Mlp<double> actor(a.at("config").at("layers").get<std::vector<int>>(), nn::OutputActivation::tanh, rng, "actor");
  try {
    nn::tensors_from_json(actor.params(), a.at("tensors"));
  } catch (const std::runtime_error& e) {
    throw FormatError(std::string("behaviour-policy archive: ") + e.what());
  }
  return ActorPolicy(std::move(actor), spec);
}

}  // namespace mia
