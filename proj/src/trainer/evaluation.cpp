#include "mia/trainer/evaluation.hpp"

#include <cmath>
#include <cstdio>

#include "mia/core/errors.hpp"
#include "mia/core/returns.hpp"
#include "mia/env/rollout.hpp"

namespace mia {

EvaluationResult evaluate_policy(Environment& env, const Policy& policy, std::size_t episodes, double gamma,
                                 std::uint64_t seed_base) {
  if (episodes == 0) throw DomainError("evaluate_policy: episodes must be >= 1");
  std::vector<double> returns;
  returns.reserve(episodes);
  for (std::size_t e = 0; e < episodes; ++e) {
    const Trajectory t = rollout(env, policy, seed_base + e, 0.0);
    const auto rewards = t.rewards();
    returns.push_back(discounted_return(rewards, gamma));
  }
  EvaluationResult r;
  for (double x : returns) r.mean_return += x;
  r.mean_return /= static_cast<double>(episodes);
  if (episodes > 1) {
    double ss = 0.0;
    for (double x : returns) ss += (x - r.mean_return) * (x - r.mean_return);
    r.stderr_return = std::sqrt(ss / static_cast<double>(episodes - 1)) / std::sqrt(static_cast<double>(episodes));
  }
  return r;
}

void LearningCurve::add(std::size_t step, const EvaluationResult& r) {
  if (!points_.empty() && step <= points_.back().step)
    throw DomainError("LearningCurve: steps must be strictly increasing");
  points_.push_back(CurvePoint{step, r.mean_return, r.stderr_return});
}

void write_learning_curve_csv(std::ostream& out, const LearningCurve& curve) {
  out << "step,mean_return,stderr\n";
  char buf[64];
  for (const auto& p : curve.points()) {
    out << p.step;
    std::snprintf(buf, sizeof buf, ",%.10g", p.mean_return);
    out << buf;
    std::snprintf(buf, sizeof buf, ",%.10g\n", p.stderr_return);
    out << buf;
  }
}

TrajectoryBatch query_output_trajectories(Environment& env, const Policy& policy,
                                          const std::vector<std::int64_t>& seeds) {
  if (seeds.empty()) throw DomainError("query_output_trajectories: no seeds");
  TrajectoryBatch batch;
  batch.spec = env.spec();
  batch.source = SourceTag::model_output;
  batch.seeds = seeds;
  batch.trajectories.reserve(seeds.size());
  for (auto s : seeds) batch.trajectories.push_back(rollout(env, policy, static_cast<std::uint64_t>(s), 0.0));
  return batch;
}

}  // namespace mia
