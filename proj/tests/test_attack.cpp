#include <gtest/gtest.h>

#include <filesystem>
#include <random>
#include <set>

#include "mia/attack/classifier.hpp"
#include "mia/attack/dataset.hpp"
#include "mia/core/errors.hpp"
#include "mia/env/point_reach.hpp"
#include "mia/env/rollout.hpp"
#include "mia/metrics/metrics.hpp"
#include "mia/oracle/collect.hpp"
#include "mia/oracle/policies.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace mia;
using fixture::random_actions;
using fixture::separable_dataset;

namespace {

struct Batches {
  TrajectoryBatch members, nonmembers, outputs;
};

// Members and nonmembers from a noisy goal-seeking controller; outputs from a
// noiseless one started at the same seeds.
Batches point_reach_batches(std::size_t n, std::size_t t_max) {
  PointReach2D env(PointReachConfig{t_max, false});
  const GoalSeekingPolicy policy({1.0, 1.0}, 1.0, env.spec());
  Batches b;
  b.members = collect_batch(env, policy, n, 0.3, 0, SourceTag::member);
  b.nonmembers = collect_batch(env, policy, n, 0.3, 100000, SourceTag::nonmember);
  b.outputs = collect_batch(env, policy, n, 0.0, 0, SourceTag::model_output);
  const TrajectoryBatch more = collect_batch(env, policy, n, 0.0, 100000, SourceTag::model_output);
  for (std::size_t i = 0; i < more.size(); ++i) {
    b.outputs.trajectories.push_back(more.trajectories[i]);
    b.outputs.seeds.push_back(more.seeds[i]);
  }
  return b;
}

}  // namespace

TEST(ClipOrPad, ShapesAndPaddedTail) {
  std::mt19937_64 rng(1);
  for (std::size_t dim : {1u, 3u})
    for (std::size_t t : {3u, 5u, 10u})
      for (std::size_t l : {2u, 7u}) {
        const ActionTrajectory at = random_actions(dim, t, 0, SourceTag::member, rng);
        const Eigen::MatrixXf c = clip_or_pad(at, l);
        ASSERT_EQ(c.rows(), static_cast<Eigen::Index>(dim));
        ASSERT_EQ(c.cols(), static_cast<Eigen::Index>(l));
        const auto kept = static_cast<Eigen::Index>(std::min(t, l));
        EXPECT_TRUE((c.leftCols(kept).array() == at.actions.leftCols(kept).array()).all());
        for (Eigen::Index j = kept; j < c.cols(); ++j)
          EXPECT_TRUE((c.col(j).array() == at.actions.col(at.actions.cols() - 1).array()).all());
      }
  EXPECT_THROW(clip_or_pad(Eigen::MatrixXf(2, 3), 0), DomainError);
}

TEST(MakePair, HalvesAreBitExactAndSeedsMustMatch) {
  std::mt19937_64 rng(2);
  for (std::size_t dim : {1u, 3u})
    for (std::size_t t : {3u, 5u, 10u})
      for (std::size_t l : {2u, 7u}) {
        const ActionTrajectory a = random_actions(dim, t, 5, SourceTag::member, rng);
        const ActionTrajectory b = random_actions(dim, t + 1, 5, SourceTag::model_output, rng);
        const PairedSample p = make_pair(a, b, l, 1);
        const auto d = static_cast<Eigen::Index>(dim);
        EXPECT_EQ(p.matrix.rows(), 2 * d);
        EXPECT_TRUE((p.matrix.topRows(d).array() == clip_or_pad(a, l).array()).all());
        EXPECT_TRUE((p.matrix.bottomRows(d).array() == clip_or_pad(b, l).array()).all());
        EXPECT_EQ(p.seed, 5);
        EXPECT_EQ(p.label, 1);
        const ActionTrajectory other = random_actions(dim, t, 6, SourceTag::model_output, rng);
        EXPECT_THROW(make_pair(a, other, l, 1), DomainError);
      }
  const ActionTrajectory a = random_actions(2, 4, 1, SourceTag::member, rng);
  EXPECT_THROW(make_pair(a, a, 4, 1), DomainError);
  const ActionTrajectory wide = random_actions(3, 4, 1, SourceTag::model_output, rng);
  EXPECT_THROW(make_pair(a, wide, 4, 1), DomainError);
}

TEST(ExtractActions, ColumnPerStep) {
  PointReach2D env(PointReachConfig{6, false});
  const ConstantPolicy p({0.5, -0.25});
  const Trajectory t = rollout(env, p, 3);
  const ActionTrajectory at = extract_actions(t, SourceTag::nonmember, 3);
  EXPECT_EQ(at.length(), t.length());
  EXPECT_EQ(at.actions(0, 2), 0.5F);
  EXPECT_EQ(at.actions(1, 5), -0.25F);
  EXPECT_EQ(at.origin, SourceTag::nonmember);
}

TEST(Split, DeterministicWithRequestedProportions) {
  std::size_t counts[3] = {0, 0, 0};
  for (std::int64_t s = 0; s < 20000; ++s) {
    const Split a = split_for_seed(s, {});
    EXPECT_EQ(a, split_for_seed(s, {}));
    ++counts[static_cast<int>(a)];
  }
  EXPECT_NEAR(counts[0] / 20000.0, 0.7, 0.015);
  EXPECT_NEAR(counts[1] / 20000.0, 0.1, 0.015);
  EXPECT_NEAR(counts[2] / 20000.0, 0.2, 0.015);
  for (std::int64_t s = 0; s < 100; ++s) EXPECT_EQ(split_for_seed(s, SplitRatios{0, 0, 1}), Split::test);
  EXPECT_THROW(split_for_seed(0, SplitRatios{0, 0, 0}), DomainError);
}

TEST(IndividualDataset, LabelsSplitsAndSources) {
  const Batches b = point_reach_batches(40, 12);
  const AttackDataset ds = build_individual_dataset(b.members, b.nonmembers, b.outputs, 8);
  ASSERT_EQ(ds.size(), 80u);
  EXPECT_EQ(ds.mode, AttackMode::individual);
  EXPECT_EQ(ds.clip_length, 8u);
  std::size_t positives = 0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto& p = ds.pairs[i];
    positives += static_cast<std::size_t>(p.label);
    EXPECT_EQ(ds.splits[i], split_for_seed(p.seed, {}));
    EXPECT_EQ(p.label == 1, p.seed < 100000);
  }
  EXPECT_EQ(positives, 40u);
  EXPECT_NO_THROW(ds.validate());
  const AttackDataset eval = build_individual_dataset(b.members, b.nonmembers, b.outputs, 8, SplitRatios{0, 0, 1});
  EXPECT_EQ(eval.indices(Split::test).size(), 80u);
}

TEST(IndividualDataset, MissingOutputRejected) {
  Batches b = point_reach_batches(10, 6);
  b.outputs.trajectories.pop_back();
  b.outputs.seeds.pop_back();
  EXPECT_THROW(build_individual_dataset(b.members, b.nonmembers, b.outputs, 6), DomainError);
  Batches c = point_reach_batches(10, 6);
  c.outputs.source = SourceTag::member;
  EXPECT_THROW(build_individual_dataset(c.members, c.nonmembers, c.outputs, 6), DomainError);
}

TEST(CollectiveDataset, StacksAreHomogeneousAndDisjoint) {
  const Batches b = point_reach_batches(120, 8);
  const AttackDataset ind = build_individual_dataset(b.members, b.nonmembers, b.outputs, 8);
  for (std::size_t passes : {1u, 3u}) {
    const AttackDataset col = build_collective_dataset(ind, 5, 9, passes);
    EXPECT_EQ(col.mode, AttackMode::collective);
    EXPECT_EQ(col.m, 5u);
    for (Split split : {Split::train, Split::validation, Split::test})
      for (int label : {0, 1}) EXPECT_EQ(col.count(split, label), passes * (ind.count(split, label) / 5));
    for (std::size_t i = 0; i < col.size(); ++i) {
      const auto& s = col.stacks[i];
      EXPECT_EQ(s.m(), 5u);
      std::set<std::int64_t> seeds(s.seeds.begin(), s.seeds.end());
      EXPECT_EQ(seeds.size(), 5u);
      for (auto seed : s.seeds) {
        EXPECT_EQ(split_for_seed(seed, {}), col.splits[i]);
        EXPECT_EQ(seed < 100000 ? 1 : 0, s.label);
      }
    }
  }
  EXPECT_EQ(attack_dataset_hash(build_collective_dataset(ind, 5, 9)),
            attack_dataset_hash(build_collective_dataset(ind, 5, 9)));
  EXPECT_THROW(build_collective_dataset(ind, 0, 1), DomainError);
  EXPECT_THROW(build_collective_dataset(ind, 1000, 1), DomainError);
}

TEST(Decorrelate, PreservesTupleMultisetSeedsAndLengths) {
  PointReach2D env(PointReachConfig{15, false});
  const GoalSeekingPolicy policy({1.0, 1.0}, 3.0, env.spec());
  const TrajectoryBatch batch = collect_batch(env, policy, 30, 0.4, 7);
  const TrajectoryBatch d = decorrelate_batch(batch, 3);
  EXPECT_EQ(d.seeds, batch.seeds);
  EXPECT_EQ(d.source, batch.source);
  ASSERT_EQ(d.size(), batch.size());
  bool any_broken = false;
  for (std::size_t i = 0; i < d.size(); ++i) {
    EXPECT_EQ(d.trajectories[i].length(), batch.trajectories[i].length());
    EXPECT_TRUE(d.trajectories[i].is_synthetic());
    any_broken = any_broken || !chain_consistent(d.trajectories[i]);
  }
  EXPECT_TRUE(any_broken);
  EXPECT_EQ(oracle::tuple_multiset(d.trajectories), oracle::tuple_multiset(batch.trajectories));
  const TrajectoryBatch again = decorrelate_batch(batch, 3);
  for (std::size_t i = 0; i < d.size(); ++i) EXPECT_EQ(again.trajectories[i], d.trajectories[i]);
  EXPECT_THROW(decorrelate_batch(TrajectoryBatch{}, 1), DomainError);
}

TEST(DatasetIo, RoundTripKeepsHash) {
  const Batches b = point_reach_batches(100, 6);
  const AttackDataset ind = build_individual_dataset(b.members, b.nonmembers, b.outputs, 6);
  const AttackDataset col = build_collective_dataset(ind, 2, 1);
  const auto dir = std::filesystem::temp_directory_path() / "mia_test_dataset";
  for (const AttackDataset* ds : {&ind, &col}) {
    std::filesystem::remove_all(dir);
    save_attack_dataset(dir, *ds);
    const AttackDataset back = load_attack_dataset(dir);
    EXPECT_EQ(attack_dataset_hash(back), attack_dataset_hash(*ds));
    EXPECT_EQ(back.mode, ds->mode);
    EXPECT_EQ(back.splits, ds->splits);
  }
  std::filesystem::remove_all(dir);
  EXPECT_ANY_THROW(load_attack_dataset(dir));
}

TEST(TcnConfig, ReceptiveField) {
  EXPECT_EQ((TcnConfig{1, 8, 2, 0.0}).receptive_field(), 3u);
  EXPECT_EQ((TcnConfig{4, 8, 3, 0.0}).receptive_field(), 61u);
}

TEST(NetworkInput, Layouts) {
  std::mt19937_64 rng(4);
  const ActionTrajectory a = random_actions(2, 4, 1, SourceTag::member, rng);
  const ActionTrajectory b = random_actions(2, 4, 1, SourceTag::model_output, rng);
  const PairedSample p = make_pair(a, b, 4, 1);
  const nn::Mat<double> x = to_network_input(p);
  EXPECT_EQ(x.rows(), 4);
  EXPECT_EQ(x(3, 2), static_cast<double>(p.matrix(3, 2)));
  CollectiveSample cs;
  cs.pairs = {p.matrix, p.matrix * 2.0F, p.matrix * 3.0F};
  cs.seeds = {1, 2, 3};
  const nn::Mat<double> y = to_network_input(cs);
  EXPECT_EQ(y.cols(), 12);
  EXPECT_EQ(y(1, 2 * 3 + 1), static_cast<double>(cs.pairs[1](1, 2)));
}

TEST(GradientCheck, TinyTcn) {
  const AttackDataset probe = separable_dataset(6, 2, 5, 1);
  const auto r = gradient_check(TcnConfig{2, 3, 2, 0.5}, probe, 3, 1000);
  EXPECT_EQ(r.checked, r.parameters);
  EXPECT_LT(r.max_relative_error, 1e-4);
}

TEST(GradientCheck, TinyResNet) {
  const AttackDataset ind = separable_dataset(40, 1, 4, 2);
  const AttackDataset probe = build_collective_dataset(ind, 2, 1);
  const auto r = gradient_check(ResNetConfig{2, 1, 2, 1.0}, probe, 5, 1000);
  EXPECT_EQ(r.checked, r.parameters);
  EXPECT_LT(r.max_relative_error, 1e-4);
}

TEST(Classifier, ArchitectureMustMatchMode) {
  const AttackDataset ds = separable_dataset(40, 2, 6, 3);
  EXPECT_THROW(train_attack(ds, ResNetConfig{}, TrainSpec{}, 1), DomainError);
  EXPECT_THROW(AttackClassifier::create(ds, ResNetConfig{}, 1), DomainError);
}

TEST(Classifier, LearnsSeparablePairsAndRoundTrips) {
  const AttackDataset ds = separable_dataset(300, 2, 8, 4);
  TrainSpec spec;
  spec.epochs = 15;
  spec.patience = 15;
  const AttackClassifier c = train_attack(ds, TcnConfig{2, 8, 3, 0.1}, spec, 7);
  EXPECT_LT(c.metadata().best_validation_loss, c.metadata().validation_losses.front() + 1e-12);
  EXPECT_LT(c.loss(ds, ds.indices(Split::train)), c.metadata().initial_train_loss);
  const auto test = ds.indices(Split::test);
  const auto p = c.predict(ds, test);
  std::vector<int> y;
  for (auto i : test) y.push_back(ds.label(i));
  EXPECT_GT(accuracy(confusion(p, y, 0.5)), 0.9);
  for (double x : p) {
    EXPECT_GT(x, 0.0);
    EXPECT_LT(x, 1.0);
  }

  const auto path = std::filesystem::temp_directory_path() / "mia_test_classifier.json";
  c.save(path, attack_dataset_hash(ds));
  const AttackClassifier back = AttackClassifier::load(path);
  EXPECT_EQ(back.predict(ds, test), p);
  EXPECT_EQ(back.metadata().epochs_run, c.metadata().epochs_run);
  std::filesystem::remove(path);

  const AttackClassifier again = train_attack(ds, TcnConfig{2, 8, 3, 0.1}, spec, 7);
  EXPECT_EQ(again.predict(ds, test), p);
}

TEST(Classifier, CollectiveResNetTrains) {
  const AttackDataset ind = separable_dataset(400, 1, 6, 5);
  const AttackDataset col = build_collective_dataset(ind, 4, 2);
  TrainSpec spec;
  spec.epochs = 8;
  const AttackClassifier c = train_attack(col, ResNetConfig{2, 1, 4, 1e-3}, spec, 3);
  EXPECT_EQ(c.architecture(), "resnet");
  EXPECT_EQ(c.m(), 4u);
  EXPECT_LT(c.loss(col, col.indices(Split::train)), c.metadata().initial_train_loss);
  const PairedSample& p = ind.pairs.front();
  EXPECT_THROW(c.logit(p), DomainError);
}
