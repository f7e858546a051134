#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "mia/core/types.hpp"

namespace mia {

// Action-only view of a trajectory: d^A x T, column j = action j.
struct ActionTrajectory {
  Eigen::MatrixXf actions;
  SourceTag origin = SourceTag::member;
  std::int64_t seed = 0;

  std::size_t length() const { return static_cast<std::size_t>(actions.cols()); }
};

// 2d^A x L: rows [0, d^A) candidate training actions, rows [d^A, 2d^A) model outputs.
struct PairedSample {
  Eigen::MatrixXf matrix;
  int label = 0;  // 1 = member pair
  std::int64_t seed = 0;
};

// m same-label pairs, i.e. a 2d^A x L x m tensor stored as m slices.
struct CollectiveSample {
  std::vector<Eigen::MatrixXf> pairs;
  int label = 0;
  std::vector<std::int64_t> seeds;

  std::size_t m() const { return pairs.size(); }
};

enum class AttackMode { individual, collective };
enum class Split { train, validation, test };

std::string_view to_string(AttackMode mode);
AttackMode parse_attack_mode(std::string_view text);
std::string_view to_string(Split split);

struct SplitRatios {
  double train = 0.7;
  double validation = 0.1;
  double test = 0.2;
};

// Deterministic split of a trajectory seed by hash under the given ratios.
Split split_for_seed(std::int64_t seed, const SplitRatios& ratios);

struct AttackDataset {
  AttackMode mode = AttackMode::individual;
  std::size_t action_dim = 0;
  std::size_t clip_length = 0;
  std::size_t m = 1;
  std::vector<PairedSample> pairs;        // individual mode
  std::vector<CollectiveSample> stacks;   // collective mode
  std::vector<Split> splits;              // one entry per sample
  nlohmann::json provenance = nlohmann::json::object();

  std::size_t size() const { return mode == AttackMode::individual ? pairs.size() : stacks.size(); }
  int label(std::size_t i) const {
    return mode == AttackMode::individual ? pairs[i].label : stacks[i].label;
  }
  std::vector<std::size_t> indices(Split split) const;
  std::size_t count(Split split, int label) const;

  // Shape, label and split-hygiene checks; throws DomainError.
  void validate() const;
};

ActionTrajectory extract_actions(const Trajectory& trajectory, SourceTag origin = SourceTag::member,
                                 std::int64_t seed = 0);

// First L columns when T >= L, otherwise the last column repeated up to length L.
Eigen::MatrixXf clip_or_pad(const Eigen::MatrixXf& actions, std::size_t length);
inline Eigen::MatrixXf clip_or_pad(const ActionTrajectory& at, std::size_t length) {
  return clip_or_pad(at.actions, length);
}

PairedSample make_pair(const ActionTrajectory& train_at, const ActionTrajectory& output_at,
                       std::size_t length, int label);

// Positives pair members with the output rolled out from the same seed,
// negatives pair nonmembers with theirs. Every member and nonmember seed needs a
// matching output trajectory.
AttackDataset build_individual_dataset(const TrajectoryBatch& member, const TrajectoryBatch& nonmember,
                                       const TrajectoryBatch& outputs, std::size_t length,
                                       const SplitRatios& ratios = {});

// Stacks of m same-label pairs drawn without replacement within each split.
// Each pass reshuffles and emits floor(count / m) stacks per label; leftovers
// are dropped.
AttackDataset build_collective_dataset(const AttackDataset& individual, std::size_t m,
                                       std::uint64_t seed, std::size_t passes = 1);

// Pools every tuple of the batch, shuffles, and deals them back into synthetic
// trajectories of the original lengths. Seeds and the tuple multiset are preserved.
TrajectoryBatch decorrelate_batch(const TrajectoryBatch& batch, std::uint64_t seed);

// FNV-1a digest (hex) over shapes, labels, splits and sample values.
std::string attack_dataset_hash(const AttackDataset& dataset);

// Directory layout: manifest.json (dims, L, m, labels, splits, seeds,
// provenance) and samples.f32 (little-endian float32, samples in order, each
// matrix column-major, collective slices in order).
void save_attack_dataset(const std::filesystem::path& dir, const AttackDataset& dataset);
AttackDataset load_attack_dataset(const std::filesystem::path& dir);

}  // namespace mia
