#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mia/attack/dataset.hpp"
#include "mia/experiment/config.hpp"
#include "mia/metrics/export.hpp"
#include "mia/trainer/bcq.hpp"
#include "mia/trainer/evaluation.hpp"

namespace mia {

// Reset-seed layout of one repetition: seed * 10^7 plus a per-pool offset, so
// the four pools of every repetition are pairwise disjoint.
struct SeedPlan {
  std::int64_t shadow_member = 0;
  std::int64_t shadow_nonmember = 0;
  std::int64_t private_member = 0;
  std::int64_t private_nonmember = 0;
};
SeedPlan seed_plan(std::int64_t seed);

// The data oracle's four pools for one (T_max, seed).
struct OracleData {
  TrajectoryBatch shadow_members, shadow_nonmembers;
  TrajectoryBatch target_members, target_nonmembers;
  double behavior_return = 0.0;  // mean return of the first exploration policy, noiseless
  std::vector<std::shared_ptr<Policy>> policies;  // member-side exploration policies
};

OracleData collect_stage(const ExperimentConfig& config, Environment& env, std::int64_t seed);

// Trajectories of one target model: its training batch, the held-out
// nonmembers, and its outputs queried from both seed sets.
struct ModelData {
  TrajectoryBatch members;
  TrajectoryBatch nonmembers;
  TrajectoryBatch outputs;  // member seeds first, then nonmember seeds
  LearningCurve curve;
  std::shared_ptr<const BcqPolicy> policy;
};

// Trains pi_f on `members` and queries it from every member and nonmember seed.
ModelData train_model(const ExperimentConfig& config, Environment& env, TrajectoryBatch members,
                      TrajectoryBatch nonmembers, std::uint64_t trainer_seed);

// Seeds of the shadow and private trainers for one (T_max, seed).
std::uint64_t trainer_seed(std::int64_t seed, std::size_t t_max, bool shadow);
// Seed of the attack classifier's initialisation and minibatch order.
std::uint64_t attack_seed(std::int64_t seed);

// Individual or collective attack dataset of one model's data under a setting.
// `evaluation` puts every sample in the test split (the attacked model);
// otherwise samples are split 70/10/20 by seed hash (the shadow model).
AttackDataset format_dataset(const ExperimentConfig& config, const Setting& setting, const ModelData& data,
                             std::int64_t seed, bool evaluation);

// Everything upstream of the attack for one (T_max, seed): the data oracle,
// one shadow model and one private model. Independent of L, mode and correlation.
struct RlStage {
  std::size_t t_max = 0;
  std::int64_t seed = 0;
  double behavior_return = 0.0;
  ModelData shadow;
  ModelData target;  // the privately trained model under attack
};

RlStage run_rl_stage(const ExperimentConfig& config, std::size_t t_max, std::int64_t seed);

struct CellResult {
  Setting setting;
  std::int64_t seed = 0;
  bool ok = false;
  std::string error;
  std::vector<MetricRow> rows;  // one per theta
  RocCurve roc;
  double shadow_test_accuracy = 0.0;  // theta = 0.5 on the shadow test split
  std::size_t evaluation_samples = 0;
};

// Metric rows (one per theta), ROC and shadow-side accuracy of a trained classifier.
CellResult evaluate_attack(const ExperimentConfig& config, const Setting& setting, std::int64_t seed,
                           const AttackClassifier& classifier, const AttackDataset& target,
                           const AttackDataset* shadow = nullptr);

// ACC of the row with the given theta; throws DomainError when absent.
double accuracy_at(const std::vector<MetricRow>& rows, double theta);

// Attack stage: dataset formatting (with optional decorrelation), classifier
// training on shadow pairs and evaluation on the private model's pairs.
CellResult run_cell(const ExperimentConfig& config, const Setting& setting, const RlStage& stage);

// Full pipeline for one cell. Exceptions propagate.
std::vector<MetricRow> run_pipeline(const ExperimentConfig& config, const Setting& setting, std::int64_t seed);

struct Aggregate {
  Setting setting;
  double theta = 0.5;
  std::size_t n = 0;  // completed seeds
  bool partial = false;  // n < |seeds|
  double acc_mean = 0.0, acc_stderr = 0.0;
  double mcc_mean = 0.0, mcc_stderr = 0.0;
};

struct RunReport {
  nlohmann::json config;
  std::string config_hash;
  std::string code_version;
  std::vector<CellResult> cells;
  std::vector<Aggregate> aggregates;
  // Keyed "T<t_max>_seed<seed>_<shadow|target>".
  std::map<std::string, LearningCurve> curves;
  std::map<std::string, double> behavior_returns;  // keyed "T<t_max>_seed<seed>"

  bool all_ok() const;
  std::vector<MetricRow> rows() const;
};

// Sample mean and standard error s / sqrt(n) (0 for n < 2).
std::pair<double, double> mean_stderr(const std::vector<double>& xs);

std::vector<Aggregate> aggregate(const std::vector<CellResult>& cells, const ExperimentConfig& config);

using ProgressFn = std::function<void(const std::string&)>;

// Runs every (setting, seed) cell. The RL stage is computed once per
// (T_max, seed) and shared by the settings with that horizon. A failing cell
// is recorded and the sweep continues.
RunReport sweep(const ExperimentConfig& config, const ProgressFn& progress = {});

}  // namespace mia
