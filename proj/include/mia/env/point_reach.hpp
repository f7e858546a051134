#pragma once

#include <array>

#include "mia/env/environment.hpp"

namespace mia {

struct PointReachConfig {
  std::size_t t_max = 50;
  bool sparse_reward = false;  // reward 1 inside the goal ball, 0 elsewhere
};

// Planar point mass steered toward a fixed goal.
//
//   s' = clamp(s + dt * a, [-2, 2]^2),  a in [-1, 1]^2 (clamped)
//   r  = -||s' - g||  (dense)  or  1[||s' - g|| < eps]  (sparse)
//   s0 ~ U([-0.5, 0.5]^2) drawn from the reset seed
//   terminal when ||s' - g|| < eps or the step counter reaches t_max
class PointReach2D final : public Environment {
 public:
  static constexpr double kDt = 0.1;
  static constexpr double kGoalRadius = 0.05;
  static constexpr double kBound = 2.0;
  static constexpr double kInitHalfWidth = 0.5;
  static constexpr std::array<double, 2> kGoal{1.0, 1.0};

  explicit PointReach2D(PointReachConfig config = {});

  const EnvSpec& spec() const override { return spec_; }
  std::vector<double> reset(std::uint64_t seed) override;
  StepResult step(std::span<const double> action) override;

  static EnvSpec make_spec(std::size_t t_max);
  static double distance_to_goal(std::span<const double> state);

 private:
  PointReachConfig config_;
  EnvSpec spec_;
  std::array<double, 2> state_{};
  std::size_t steps_ = 0;
  bool started_ = false;
  bool done_ = false;
};

// Builds an environment by name. Known names: "PointReach2D" and
// "PointReach2D-sparse"; anything else throws DomainError.
std::unique_ptr<Environment> make_environment(const std::string& name, std::size_t t_max);
EnvFactory environment_factory(const std::string& name, std::size_t t_max);

}  // namespace mia
