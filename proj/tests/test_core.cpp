#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "mia/core/errors.hpp"
#include "mia/core/random.hpp"
#include "mia/core/replay_buffer.hpp"
#include "mia/core/returns.hpp"
#include "mia/core/trajectory_io.hpp"
#include "mia/env/point_reach.hpp"
#include "mia/env/rollout.hpp"
#include "mia/oracle/policies.hpp"
#include "oracles.hpp"

using namespace mia;

namespace {

Transition tuple(float s, float a, float r, float s2, bool terminal = false) {
  return Transition{{s}, {a}, r, {s2}, terminal};
}

Trajectory chain(std::size_t n, float offset = 0.0F) {
  std::vector<Transition> ts;
  for (std::size_t i = 0; i < n; ++i)
    ts.push_back(tuple(offset + static_cast<float>(i), static_cast<float>(i) * 0.5F, 1.0F,
                       offset + static_cast<float>(i + 1), i + 1 == n));
  return Trajectory(std::move(ts));
}

EnvSpec line_spec(std::size_t t_max = 50) {
  return EnvSpec{"line", 1, 1, {-1.0}, {1.0}, t_max};
}

}  // namespace

TEST(Trajectory, ChainInvariants) {
  EXPECT_NO_THROW(chain(5));
  EXPECT_TRUE(chain_consistent(chain(5)));
  EXPECT_THROW(Trajectory({}), DomainError);
  EXPECT_THROW(Trajectory({tuple(0, 0, 0, 1), tuple(2, 0, 0, 3)}), DomainError);
  EXPECT_THROW(Trajectory({tuple(0, 0, 0, 1, true), tuple(1, 0, 0, 2)}), DomainError);
  const Trajectory s = Trajectory::synthetic({tuple(0, 0, 0, 1), tuple(5, 0, 0, 6)});
  EXPECT_TRUE(s.is_synthetic());
  EXPECT_FALSE(chain_consistent(s));
}

TEST(Trajectory, ValidationAgainstSpec) {
  EXPECT_NO_THROW(validate_trajectory(chain(5), line_spec()));
  EXPECT_THROW(validate_trajectory(chain(5), line_spec(4)), DomainError);
  EnvSpec wide = line_spec();
  wide.state_dim = 2;
  EXPECT_THROW(validate_trajectory(chain(3), wide), DomainError);
}

TEST(Trajectory, BatchValidationChecksSeeds) {
  TrajectoryBatch b{line_spec(), SourceTag::member, {chain(3), chain(4)}, {1, 2}};
  EXPECT_NO_THROW(b.validate());
  b.seeds.pop_back();
  EXPECT_THROW(b.validate(), DomainError);
}

TEST(SourceTag, RoundTrip) {
  for (auto t : {SourceTag::member, SourceTag::nonmember, SourceTag::model_output})
    EXPECT_EQ(parse_source_tag(to_string(t)), t);
  EXPECT_THROW(parse_source_tag("shadow"), FormatError);
}

TEST(Returns, BruteForceOracle) {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<int> len(0, 50);
  std::normal_distribution<double> reward(0.0, 3.0);
  for (double gamma : {0.0, 0.5, 0.99, 1.0})
    for (int trial = 0; trial < 100; ++trial) {
      std::vector<double> r(static_cast<std::size_t>(len(rng)));
      for (auto& x : r) x = reward(rng);
      EXPECT_NEAR(discounted_return(r, gamma), oracle::discounted_sum(r, gamma), 1e-12);
    }
}

TEST(Returns, EdgeCases) {
  const std::vector<double> r{2.0, 3.0, 4.0};
  EXPECT_EQ(discounted_return(r, 0.0), 2.0);
  EXPECT_EQ(discounted_return(r, 1.0), 9.0);
  EXPECT_EQ(discounted_return(std::vector<double>{}, 0.9), 0.0);
  EXPECT_THROW(discounted_return(r, -0.1), DomainError);
  EXPECT_THROW(discounted_return(r, 1.1), DomainError);
  EXPECT_THROW(Discount(2.0), DomainError);
}

TEST(Returns, StateValueIsMeanReturn) {
  const std::vector<Trajectory> ts{chain(2), chain(4)};
  EXPECT_DOUBLE_EQ(state_value_estimate(ts, 1.0), 3.0);
  EXPECT_DOUBLE_EQ(state_value_estimate(ts, 0.5), (1.5 + 1.875) / 2.0);
}

TEST(Random, DerivedStreamsDiffer) {
  EXPECT_NE(derive_seed(1, 0), derive_seed(1, 1));
  EXPECT_NE(derive_seed(1, 0), derive_seed(2, 0));
  EXPECT_EQ(make_rng(9, 4)(), make_rng(9, 4)());
}

TEST(ReplayBuffer, SamplingIsUniform) {
  ReplayBuffer buffer(100, 123);
  for (int i = 0; i < 20; ++i) buffer.insert(tuple(static_cast<float>(i), 0, 0, 0));
  std::vector<std::size_t> counts(20, 0);
  for (const auto& t : buffer.sample(100000)) ++counts[static_cast<std::size_t>(t.state[0])];
  EXPECT_GT(oracle::chi_square_uniform_p(counts), 0.01);
  EXPECT_EQ(buffer.draws(), 100000u);
}

TEST(ReplayBuffer, EmptyBufferThrows) {
  ReplayBuffer buffer(10, 1);
  EXPECT_THROW(buffer.sample(1), StateError);
  EXPECT_THROW(ReplayBuffer(0, 1), DomainError);
}

TEST(ReplayBuffer, SingleTupleAlwaysReturned) {
  ReplayBuffer buffer(10, 1);
  buffer.insert(tuple(7, 1, 2, 8));
  for (const auto& t : buffer.sample(50)) EXPECT_EQ(t, tuple(7, 1, 2, 8));
}

TEST(ReplayBuffer, EvictsOldestFirst) {
  ReplayBuffer buffer(3, 1);
  for (int i = 0; i < 5; ++i) buffer.insert(tuple(static_cast<float>(i), 0, 0, 0));
  EXPECT_EQ(buffer.size(), 3u);
  EXPECT_EQ(buffer.at(0).state[0], 2.0F);
  EXPECT_EQ(buffer.at(2).state[0], 4.0F);
}

TEST(ReplayBuffer, TrajectoryInsertBreaksIntoTuples) {
  ReplayBuffer buffer(100, 1);
  buffer.insert(chain(7));
  EXPECT_EQ(buffer.size(), 7u);
  EXPECT_EQ(buffer.at(3), chain(7)[3]);
}

TEST(ReplayBuffer, SameSeedSameDraws) {
  ReplayBuffer a(100, 5), b(100, 5);
  a.insert(chain(10));
  b.insert(chain(10));
  EXPECT_EQ(a.sample_indices(64), b.sample_indices(64));
}

TEST(TrajectoryIo, RoundTripIsBitExact) {
  PointReach2D env(PointReachConfig{15, false});
  const GoalSeekingPolicy policy({1.0, 1.0}, 1.0, env.spec());
  TrajectoryBatch batch{env.spec(), SourceTag::nonmember, {}, {}};
  for (std::int64_t s = 0; s < 4; ++s) {
    batch.trajectories.push_back(rollout(env, policy, static_cast<std::uint64_t>(s), 0.3));
    batch.seeds.push_back(s);
  }
  std::stringstream io;
  write_trajectory_batch(io, batch);
  const TrajectoryBatch back = read_trajectory_batch(io, env.spec());
  EXPECT_EQ(back.spec, batch.spec);
  EXPECT_EQ(back.source, batch.source);
  EXPECT_EQ(back.seeds, batch.seeds);
  ASSERT_EQ(back.size(), batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) EXPECT_EQ(back.trajectories[i], batch.trajectories[i]);
}

TEST(TrajectoryIo, RejectsIncompatibleSpecAndBadHeader) {
  TrajectoryBatch batch{line_spec(), SourceTag::member, {chain(3)}, {0}};
  std::stringstream io;
  write_trajectory_batch(io, batch);
  EXPECT_THROW(read_trajectory_batch(io, line_spec(2)), FormatError);
  std::stringstream bad("{\"format\":\"other\"}\n");
  EXPECT_THROW(read_trajectory_batch(bad), FormatError);
}
