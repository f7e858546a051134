#include "mia/attack/dataset.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <string>

#include "mia/core/errors.hpp"
#include "mia/core/hash.hpp"
#include "mia/core/random.hpp"

namespace mia {

std::string_view to_string(AttackMode mode) {
  return mode == AttackMode::individual ? "individual" : "collective";
}

AttackMode parse_attack_mode(std::string_view text) {
  if (text == "individual") return AttackMode::individual;
  if (text == "collective") return AttackMode::collective;
  throw DomainError("unknown attack mode '" + std::string(text) + "'");
}

std::string_view to_string(Split split) {
  switch (split) {
    case Split::train:
      return "train";
    case Split::validation:
      return "validation";
    case Split::test:
      return "test";
  }
  return "unknown";
}

Split split_for_seed(std::int64_t seed, const SplitRatios& ratios) {
  const double total = ratios.train + ratios.validation + ratios.test;
  if (!(total > 0.0) || ratios.train < 0 || ratios.validation < 0 || ratios.test < 0)
    throw DomainError("split ratios must be non-negative with a positive sum");
  const double u = static_cast<double>(splitmix64(static_cast<std::uint64_t>(seed)) >> 11) * 0x1.0p-53;
  if (u < ratios.train / total) return Split::train;
  if (u < (ratios.train + ratios.validation) / total) return Split::validation;
  return Split::test;
}

std::vector<std::size_t> AttackDataset::indices(Split split) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < splits.size(); ++i)
    if (splits[i] == split) out.push_back(i);
  return out;
}

std::size_t AttackDataset::count(Split split, int lbl) const {
  std::size_t n = 0;
  for (std::size_t i = 0; i < splits.size(); ++i)
    if (splits[i] == split && label(i) == lbl) ++n;
  return n;
}

void AttackDataset::validate() const {
  if (splits.size() != size()) throw DomainError("attack dataset: split tags do not cover every sample");
  const Eigen::Index rows = static_cast<Eigen::Index>(2 * action_dim);
  const Eigen::Index cols = static_cast<Eigen::Index>(clip_length);
  auto check_matrix = [&](const Eigen::MatrixXf& mtx) {
    if (mtx.rows() != rows || mtx.cols() != cols)
      throw DomainError("attack dataset: sample matrix is not 2d^A x L");
  };
  std::map<std::int64_t, Split> seed_split;
  auto check_seed = [&](std::int64_t seed, Split split) {
    const auto [it, inserted] = seed_split.emplace(seed, split);
    if (!inserted && it->second != split)
      throw DomainError("attack dataset: seed " + std::to_string(seed) + " appears in two splits");
  };
  if (mode == AttackMode::individual) {
    if (!stacks.empty()) throw DomainError("attack dataset: individual mode holds collective samples");
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      check_matrix(pairs[i].matrix);
      check_seed(pairs[i].seed, splits[i]);
    }
  } else {
    if (!pairs.empty()) throw DomainError("attack dataset: collective mode holds individual samples");
    for (std::size_t i = 0; i < stacks.size(); ++i) {
      if (stacks[i].m() != m || stacks[i].seeds.size() != m)
        throw DomainError("attack dataset: collective sample does not hold m pairs");
      for (const auto& p : stacks[i].pairs) check_matrix(p);
      for (auto s : stacks[i].seeds) check_seed(s, splits[i]);
    }
  }
  for (Split s : {Split::train, Split::validation, Split::test}) {
    const auto n0 = count(s, 0), n1 = count(s, 1);
    if ((n0 + n1) > 0 && (n0 == 0 || n1 == 0))
      throw DomainError("attack dataset: " + std::string(to_string(s)) + " split lacks one label");
  }
}

ActionTrajectory extract_actions(const Trajectory& trajectory, SourceTag origin, std::int64_t seed) {
  const auto T = static_cast<Eigen::Index>(trajectory.length());
  const auto da = static_cast<Eigen::Index>(trajectory.action_dim());
  ActionTrajectory at;
  at.actions.resize(da, T);
  for (Eigen::Index j = 0; j < T; ++j) {
    const auto& a = trajectory[static_cast<std::size_t>(j)].action;
    for (Eigen::Index i = 0; i < da; ++i) at.actions(i, j) = a[static_cast<std::size_t>(i)];
  }
  at.origin = origin;
  at.seed = seed;
  return at;
}

Eigen::MatrixXf clip_or_pad(const Eigen::MatrixXf& actions, std::size_t length) {
  if (length == 0) throw DomainError("clip_or_pad: clipping length must be positive");
  if (actions.cols() == 0) throw DomainError("clip_or_pad: empty action trajectory");
  const auto L = static_cast<Eigen::Index>(length);
  const Eigen::Index T = actions.cols();
  if (T >= L) return actions.leftCols(L);
  Eigen::MatrixXf out(actions.rows(), L);
  out.leftCols(T) = actions;
  out.rightCols(L - T) = actions.col(T - 1).replicate(1, L - T);
  return out;
}

PairedSample make_pair(const ActionTrajectory& train_at, const ActionTrajectory& output_at,
                       std::size_t length, int label) {
  if (train_at.seed != output_at.seed)
    throw DomainError("make_pair: seeds differ (" + std::to_string(train_at.seed) + " vs " +
                      std::to_string(output_at.seed) + "), initial states would not match");
  if (output_at.origin != SourceTag::model_output)
    throw DomainError("make_pair: second trajectory must be a model output");
  if (train_at.actions.rows() != output_at.actions.rows())
    throw DomainError("make_pair: action dimensions differ");
  if (label != 0 && label != 1) throw DomainError("make_pair: label must be 0 or 1");
  const auto da = train_at.actions.rows();
  PairedSample p;
  p.matrix.resize(2 * da, static_cast<Eigen::Index>(length));
  p.matrix.topRows(da) = clip_or_pad(train_at, length);
  p.matrix.bottomRows(da) = clip_or_pad(output_at, length);
  p.label = label;
  p.seed = train_at.seed;
  return p;
}

AttackDataset build_individual_dataset(const TrajectoryBatch& member, const TrajectoryBatch& nonmember,
                                       const TrajectoryBatch& outputs, std::size_t length,
                                       const SplitRatios& ratios) {
  if (member.empty() || nonmember.empty())
    throw DomainError("build_individual_dataset: member and nonmember batches must both be nonempty");
  if (outputs.source != SourceTag::model_output)
    throw DomainError("build_individual_dataset: outputs batch must be tagged model_output");
  if (member.spec.action_dim != nonmember.spec.action_dim ||
      member.spec.action_dim != outputs.spec.action_dim)
    throw DomainError("build_individual_dataset: batches disagree on action dimension");
  if (length == 0) throw DomainError("build_individual_dataset: clipping length must be positive");

  std::map<std::int64_t, std::size_t> output_by_seed;
  for (std::size_t i = 0; i < outputs.size(); ++i) output_by_seed.emplace(outputs.seeds[i], i);

  std::vector<std::int64_t> unmatched;
  for (const auto* b : {&member, &nonmember})
    for (auto s : b->seeds)
      if (!output_by_seed.contains(s)) unmatched.push_back(s);
  if (!unmatched.empty()) {
    std::string list;
    for (std::size_t i = 0; i < unmatched.size() && i < 20; ++i)
      list += (i ? ", " : "") + std::to_string(unmatched[i]);
    if (unmatched.size() > 20) list += ", ...";
    throw DomainError("build_individual_dataset: no output trajectory for seeds [" + list + "]");
  }

  AttackDataset ds;
  ds.mode = AttackMode::individual;
  ds.action_dim = member.spec.action_dim;
  ds.clip_length = length;
  ds.m = 1;
  auto add = [&](const TrajectoryBatch& b, int label) {
    for (std::size_t i = 0; i < b.size(); ++i) {
      const auto seed = b.seeds[i];
      const auto train_at = extract_actions(b.trajectories[i], b.source, seed);
      const auto out_at =
          extract_actions(outputs.trajectories[output_by_seed.at(seed)], SourceTag::model_output, seed);
      ds.pairs.push_back(make_pair(train_at, out_at, length, label));
      ds.splits.push_back(split_for_seed(seed, ratios));
    }
  };
  add(member, 1);
  add(nonmember, 0);
  ds.provenance = {{"env", member.spec.name},
                   {"t_max", member.spec.t_max},
                   {"members", member.size()},
                   {"nonmembers", nonmember.size()},
                   {"split_ratios", {ratios.train, ratios.validation, ratios.test}}};
  ds.validate();
  return ds;
}

AttackDataset build_collective_dataset(const AttackDataset& individual, std::size_t m, std::uint64_t seed,
                                       std::size_t passes) {
  if (individual.mode != AttackMode::individual)
    throw DomainError("build_collective_dataset: input must be an individual-mode dataset");
  if (m == 0) throw DomainError("build_collective_dataset: m must be positive");
  if (passes == 0) throw DomainError("build_collective_dataset: passes must be positive");

  AttackDataset out;
  out.mode = AttackMode::collective;
  out.action_dim = individual.action_dim;
  out.clip_length = individual.clip_length;
  out.m = m;
  out.provenance = individual.provenance;
  out.provenance["m"] = m;
  out.provenance["passes"] = passes;

  Rng rng = make_rng(seed, 7);
  for (Split split : {Split::train, Split::validation, Split::test}) {
    for (int label : {1, 0}) {
      std::vector<std::size_t> pool;
      for (std::size_t i = 0; i < individual.size(); ++i)
        if (individual.splits[i] == split && individual.pairs[i].label == label) pool.push_back(i);
      if (pool.empty()) continue;
      if (pool.size() < m)
        throw DomainError("build_collective_dataset: " + std::string(to_string(split)) + " split has " +
                          std::to_string(pool.size()) + " pairs with label " + std::to_string(label) +
                          ", fewer than m = " + std::to_string(m));
      for (std::size_t pass = 0; pass < passes; ++pass) {
        std::shuffle(pool.begin(), pool.end(), rng);
        for (std::size_t start = 0; start + m <= pool.size(); start += m) {
          CollectiveSample cs;
          cs.label = label;
          for (std::size_t k = start; k < start + m; ++k) {
            cs.pairs.push_back(individual.pairs[pool[k]].matrix);
            cs.seeds.push_back(individual.pairs[pool[k]].seed);
          }
          out.stacks.push_back(std::move(cs));
          out.splits.push_back(split);
        }
      }
    }
  }
  out.validate();
  return out;
}

TrajectoryBatch decorrelate_batch(const TrajectoryBatch& batch, std::uint64_t seed) {
  if (batch.empty()) throw DomainError("decorrelate_batch: empty batch");
  std::vector<Transition> pool;
  for (const auto& t : batch.trajectories)
    pool.insert(pool.end(), t.transitions().begin(), t.transitions().end());
  Rng rng = make_rng(seed, 11);
  std::shuffle(pool.begin(), pool.end(), rng);

  TrajectoryBatch out;
  out.spec = batch.spec;
  out.source = batch.source;
  out.seeds = batch.seeds;
  std::size_t next = 0;
  for (const auto& t : batch.trajectories) {
    std::vector<Transition> ts(pool.begin() + static_cast<std::ptrdiff_t>(next),
                               pool.begin() + static_cast<std::ptrdiff_t>(next + t.length()));
    next += t.length();
    out.trajectories.push_back(Trajectory::synthetic(std::move(ts)));
  }
  return out;
}

std::string attack_dataset_hash(const AttackDataset& ds) {
  Fnv1a h;
  auto mix_matrix = [&](const Eigen::MatrixXf& m) {
    h.bytes(m.data(), static_cast<std::size_t>(m.size()) * sizeof(float));
  };
  h.u64(static_cast<std::uint64_t>(ds.mode));
  h.u64(ds.action_dim);
  h.u64(ds.clip_length);
  h.u64(ds.m);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    h.u64(static_cast<std::uint64_t>(ds.label(i)));
    h.u64(static_cast<std::uint64_t>(ds.splits[i]));
    if (ds.mode == AttackMode::individual) {
      h.u64(static_cast<std::uint64_t>(ds.pairs[i].seed));
      mix_matrix(ds.pairs[i].matrix);
    } else {
      for (auto s : ds.stacks[i].seeds) h.u64(static_cast<std::uint64_t>(s));
      for (const auto& p : ds.stacks[i].pairs) mix_matrix(p);
    }
  }
  return h.hex();
}

}  // namespace mia
