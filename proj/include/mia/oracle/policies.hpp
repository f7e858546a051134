#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <vector>

#include "mia/core/policy.hpp"
#include "mia/core/random.hpp"
#include "mia/env/env_spec.hpp"
#include "mia/nn/mlp.hpp"

namespace mia {

class ConstantPolicy final : public Policy {
 public:
  explicit ConstantPolicy(std::vector<double> action) : action_(std::move(action)) {}
  std::size_t action_dim() const override { return action_.size(); }
  std::vector<double> act(std::span<const double>) const override { return action_; }

 private:
  std::vector<double> action_;
};

// Proportional controller toward a goal point: a = clamp(gain * (goal - s)).
class GoalSeekingPolicy final : public Policy {
 public:
  GoalSeekingPolicy(std::vector<double> goal, double gain, const EnvSpec& spec);
  std::size_t action_dim() const override { return goal_.size(); }
  std::vector<double> act(std::span<const double> state) const override;

 private:
  std::vector<double> goal_;
  double gain_;
  EnvSpec spec_;
};

// Uniform draws from the action box. Ignores the state; not thread-safe.
class UniformRandomPolicy final : public Policy {
 public:
  UniformRandomPolicy(const EnvSpec& spec, std::uint64_t seed) : spec_(spec), rng_(make_rng(seed, 3)) {}
  std::size_t action_dim() const override { return spec_.action_dim; }
  std::vector<double> act(std::span<const double> state) const override;

 private:
  EnvSpec spec_;
  mutable Rng rng_;
};

// Deterministic actor network: tanh output mapped affinely onto the action box.
class ActorPolicy final : public Policy {
 public:
  ActorPolicy(nn::Mlp<double> actor, EnvSpec spec);

  std::size_t action_dim() const override { return spec_.action_dim; }
  std::vector<double> act(std::span<const double> state) const override;

  const EnvSpec& spec() const { return spec_; }
  const nn::Mlp<double>& network() const { return actor_; }

  // Parameter archive of kind "behavior-policy" with the EnvSpec embedded.
  void save(const std::filesystem::path& path) const;
  // Throws FormatError when the archive's spec is incompatible with `expected`.
  static ActorPolicy load(const std::filesystem::path& path, const std::optional<EnvSpec>& expected = std::nullopt);

 private:
  nn::Mlp<double> actor_;
  EnvSpec spec_;
};

// Affine map of tanh outputs in [-1, 1] onto [low, high], column-batched.
nn::Mat<double> scale_to_bounds(const nn::Mat<double>& unit, const EnvSpec& spec);
// d(action)/d(unit) per component: (high - low) / 2.
nn::Vec<double> bound_half_range(const EnvSpec& spec);

}  // namespace mia
