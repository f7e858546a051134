#include "mia/oracle/collect.hpp"

#include "mia/core/errors.hpp"
#include "mia/env/rollout.hpp"

namespace mia {

TrajectoryBatch collect_batch(Environment& env, const Policy& policy, std::size_t n_trajectories, double noise,
                              std::int64_t seed_base, SourceTag tag, double noise_correlation) {
  return collect_batch(env, std::vector<const Policy*>{&policy}, n_trajectories, noise, seed_base, tag,
                       noise_correlation);
}

TrajectoryBatch collect_batch(Environment& env, const std::vector<const Policy*>& policies,
                              std::size_t n_trajectories, double noise, std::int64_t seed_base, SourceTag tag,
                              double noise_correlation) {
  if (n_trajectories == 0) throw DomainError("collect_batch: n_trajectories must be >= 1");
  if (policies.empty()) throw DomainError("collect_batch: no exploration policy given");
  TrajectoryBatch batch;
  batch.spec = env.spec();
  batch.source = tag;
  batch.trajectories.reserve(n_trajectories);
  for (std::size_t i = 0; i < n_trajectories; ++i) {
    const std::int64_t seed = seed_base + static_cast<std::int64_t>(i);
    batch.trajectories.push_back(
        rollout(env, *policies[i % policies.size()], static_cast<std::uint64_t>(seed), noise, noise_correlation));
    batch.seeds.push_back(seed);
  }
  return batch;
}

}  // namespace mia
