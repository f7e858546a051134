#pragma once

#include <cstdint>
#include <vector>

#include "mia/core/policy.hpp"
#include "mia/core/types.hpp"
#include "mia/env/environment.hpp"

namespace mia {

// n i.i.d. noisy rollouts; trajectory i is reset with seed seed_base + i, which
// is recorded in the batch's seed_record.
TrajectoryBatch collect_batch(Environment& env, const Policy& policy, std::size_t n_trajectories, double noise,
                              std::int64_t seed_base, SourceTag tag = SourceTag::member,
                              double noise_correlation = 0.0);

// Mixture of exploration policies: trajectory i is driven by policies[i % k].
TrajectoryBatch collect_batch(Environment& env, const std::vector<const Policy*>& policies,
                              std::size_t n_trajectories, double noise, std::int64_t seed_base,
                              SourceTag tag = SourceTag::member, double noise_correlation = 0.0);

}  // namespace mia
