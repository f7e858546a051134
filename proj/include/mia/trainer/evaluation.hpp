#pragma once

#include <cstdint>
#include <ostream>
#include <vector>

#include "mia/core/policy.hpp"
#include "mia/core/types.hpp"
#include "mia/env/environment.hpp"

namespace mia {

struct EvaluationResult {
  double mean_return = 0.0;
  double stderr_return = 0.0;  // sample standard deviation / sqrt(episodes); 0 for one episode
};

struct CurvePoint {
  std::size_t step = 0;
  double mean_return = 0.0;
  double stderr_return = 0.0;
  bool operator==(const CurvePoint&) const = default;
};

// Evaluation returns over training; steps strictly increasing.
class LearningCurve {
 public:
  // Throws DomainError when step does not exceed the previous one.
  void add(std::size_t step, const EvaluationResult& r);
  const std::vector<CurvePoint>& points() const { return points_; }
  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }
  const CurvePoint& back() const { return points_.back(); }
  bool operator==(const LearningCurve&) const = default;

 private:
  std::vector<CurvePoint> points_;
};

// CSV with header "step,mean_return,stderr".
void write_learning_curve_csv(std::ostream& out, const LearningCurve& curve);

// Noiseless rollouts reset with seeds kEvaluationSeedBase + 0..episodes-1.
// gamma == 1 gives undiscounted returns.
EvaluationResult evaluate_policy(Environment& env, const Policy& policy, std::size_t episodes, double gamma = 1.0,
                                 std::uint64_t seed_base = 0x7E57'0000'0000'0000ULL);

// One noiseless rollout per seed, tagged model_output, seed_record = seeds.
TrajectoryBatch query_output_trajectories(Environment& env, const Policy& policy,
                                          const std::vector<std::int64_t>& seeds);

}  // namespace mia
