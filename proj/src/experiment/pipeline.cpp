#include "mia/experiment/pipeline.hpp"

#include <cmath>
#include <memory>

#include "mia/attack/classifier.hpp"
#include "mia/core/errors.hpp"
#include "mia/core/random.hpp"
#include "mia/env/point_reach.hpp"
#include "mia/env/rollout.hpp"
#include "mia/oracle/collect.hpp"
#include "mia/oracle/ddpg.hpp"
#include "mia/oracle/policies.hpp"
#include "mia/trainer/bcq.hpp"

namespace mia {

namespace {

constexpr std::int64_t kSeedStride = 10'000'000;
constexpr std::int64_t kPoolStride = 1'000'000;

// Stream ids for derive_seed(seed, id).
enum Stream : std::uint64_t {
  kBehaviorStream = 100,
  kNegativeBehaviorStream = 200,
  kShadowTrainer = 300,
  kTargetTrainer = 301,
  kDecorrelate = 400,
  kCollective = 500,
  kClassifier = 600,
};

std::uint64_t horizon_seed(std::int64_t seed, std::size_t t_max, std::uint64_t stream) {
  return derive_seed(derive_seed(static_cast<std::uint64_t>(seed), t_max), stream);
}

std::vector<std::shared_ptr<Policy>> make_behavior(const ExperimentConfig& config, Environment& env,
                                                   std::int64_t seed, std::uint64_t stream) {
  std::vector<std::shared_ptr<Policy>> out;
  const auto& b = config.behavior;
  for (std::size_t j = 0; j < b.mixture; ++j) {
    if (b.kind == "goal_seeking") {
      out.push_back(std::make_shared<GoalSeekingPolicy>(
          std::vector<double>(PointReach2D::kGoal.begin(), PointReach2D::kGoal.end()), b.gain, env.spec()));
    } else {
      auto r = train_behavior_policy(env, b.train_steps, b.ddpg, horizon_seed(seed, env.spec().t_max, stream + j));
      out.push_back(std::make_shared<ActorPolicy>(std::move(r.policy)));
    }
  }
  return out;
}

std::vector<const Policy*> raw(const std::vector<std::shared_ptr<Policy>>& ps) {
  std::vector<const Policy*> out;
  for (const auto& p : ps) out.push_back(p.get());
  return out;
}

TrajectoryBatch concat(TrajectoryBatch a, const TrajectoryBatch& b) {
  a.trajectories.insert(a.trajectories.end(), b.trajectories.begin(), b.trajectories.end());
  a.seeds.insert(a.seeds.end(), b.seeds.begin(), b.seeds.end());
  return a;
}

TrajectoryBatch query(Environment& env, const Policy& policy, const std::vector<std::int64_t>& seeds, double noise) {
  if (noise == 0.0) return query_output_trajectories(env, policy, seeds);
  TrajectoryBatch out;
  out.spec = env.spec();
  out.source = SourceTag::model_output;
  out.seeds = seeds;
  for (auto s : seeds) out.trajectories.push_back(rollout(env, policy, static_cast<std::uint64_t>(s), noise));
  return out;
}

std::vector<int> labels_of(const AttackDataset& ds, const std::vector<std::size_t>& idx) {
  std::vector<int> y;
  y.reserve(idx.size());
  for (auto i : idx) y.push_back(ds.label(i));
  return y;
}

}  // namespace

SeedPlan seed_plan(std::int64_t seed) {
  const std::int64_t base = seed * kSeedStride;
  return {base, base + kPoolStride, base + 2 * kPoolStride, base + 3 * kPoolStride};
}

std::uint64_t trainer_seed(std::int64_t seed, std::size_t t_max, bool shadow) {
  return horizon_seed(seed, t_max, shadow ? kShadowTrainer : kTargetTrainer);
}

std::uint64_t attack_seed(std::int64_t seed) {
  return derive_seed(static_cast<std::uint64_t>(seed), kClassifier);
}

OracleData collect_stage(const ExperimentConfig& config, Environment& env, std::int64_t seed) {
  const SeedPlan plan = seed_plan(seed);
  const auto& b = config.behavior;
  OracleData d;
  d.policies = make_behavior(config, env, seed, kBehaviorStream);
  const auto negative_policies = b.negatives == "different" ? make_behavior(config, env, seed, kNegativeBehaviorStream)
                                                            : d.policies;
  const auto pos = raw(d.policies);
  const auto neg = raw(negative_policies);
  d.behavior_return = evaluate_policy(env, *pos.front(), 20).mean_return;
  auto collect = [&](const std::vector<const Policy*>& ps, std::size_t n, std::int64_t base, SourceTag tag) {
    return collect_batch(env, ps, n, b.noise, base, tag, b.noise_correlation);
  };
  d.shadow_members = collect(pos, config.members, plan.shadow_member, SourceTag::member);
  d.shadow_nonmembers = collect(neg, config.nonmembers, plan.shadow_nonmember, SourceTag::nonmember);
  d.target_members = collect(pos, config.members, plan.private_member, SourceTag::member);
  d.target_nonmembers = collect(neg, config.nonmembers, plan.private_nonmember, SourceTag::nonmember);
  return d;
}

ModelData train_model(const ExperimentConfig& config, Environment& env, TrajectoryBatch members,
                      TrajectoryBatch nonmembers, std::uint64_t seed) {
  auto trained = train_target_policy(members, env, config.trainer, seed);
  ModelData d;
  d.outputs = concat(query(env, trained.policy, members.seeds, config.query_noise),
                     query(env, trained.policy, nonmembers.seeds, config.query_noise));
  d.members = std::move(members);
  d.nonmembers = std::move(nonmembers);
  d.curve = std::move(trained.curve);
  d.policy = std::make_shared<const BcqPolicy>(std::move(trained.policy));
  return d;
}

RlStage run_rl_stage(const ExperimentConfig& config, std::size_t t_max, std::int64_t seed) {
  auto env = config.make_env(t_max);
  OracleData data = collect_stage(config, *env, seed);
  RlStage stage;
  stage.t_max = t_max;
  stage.seed = seed;
  stage.behavior_return = data.behavior_return;
  stage.shadow = train_model(config, *env, std::move(data.shadow_members), std::move(data.shadow_nonmembers),
                             trainer_seed(seed, t_max, true));
  stage.target = train_model(config, *env, std::move(data.target_members), std::move(data.target_nonmembers),
                             trainer_seed(seed, t_max, false));
  return stage;
}

AttackDataset format_dataset(const ExperimentConfig& config, const Setting& setting, const ModelData& data,
                             std::int64_t seed, bool evaluation) {
  const auto s = static_cast<std::uint64_t>(seed);
  const std::uint64_t stream = evaluation ? 2 : 0;
  TrajectoryBatch members = data.members, nonmembers = data.nonmembers;
  if (setting.correlation == Correlation::decorrelated) {
    members = decorrelate_batch(members, derive_seed(s, kDecorrelate + stream));
    nonmembers = decorrelate_batch(nonmembers, derive_seed(s, kDecorrelate + stream + 1));
  }
  const SplitRatios ratios = evaluation ? SplitRatios{0.0, 0.0, 1.0} : SplitRatios{};
  AttackDataset ds = build_individual_dataset(members, nonmembers, data.outputs, setting.clip_length, ratios);
  if (setting.mode == AttackMode::collective)
    ds = build_collective_dataset(ds, config.m, derive_seed(s, kCollective + stream), config.collective_passes);
  return ds;
}

CellResult evaluate_attack(const ExperimentConfig& config, const Setting& setting, std::int64_t seed,
                           const AttackClassifier& classifier, const AttackDataset& target,
                           const AttackDataset* shadow) {
  CellResult cell;
  cell.setting = setting;
  cell.seed = seed;
  if (shadow) {
    const auto idx = shadow->indices(Split::test);
    if (!idx.empty())
      cell.shadow_test_accuracy = accuracy(confusion(classifier.predict(*shadow, idx), labels_of(*shadow, idx), 0.5));
  }
  std::vector<std::size_t> all(target.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  const auto probs = classifier.predict(target, all);
  const auto labels = labels_of(target, all);
  cell.evaluation_samples = all.size();
  for (double theta : config.thetas) {
    MetricRow row = make_metric_row(confusion(probs, labels, theta));
    row.env = config.env;
    row.mode = setting.mode_label();
    row.t_max = setting.t_max;
    row.clip_length = setting.clip_length;
    row.m = setting.mode == AttackMode::collective ? config.m : 1;
    row.theta = theta;
    row.seed = seed;
    cell.rows.push_back(row);
  }
  cell.roc = roc_curve(probs, labels, config.thetas);
  cell.ok = true;
  return cell;
}

CellResult run_cell(const ExperimentConfig& config, const Setting& setting, const RlStage& stage) {
  const AttackDataset shadow = format_dataset(config, setting, stage.shadow, stage.seed, false);
  const AttackDataset target = format_dataset(config, setting, stage.target, stage.seed, true);
  const ArchitectureConfig arch = setting.mode == AttackMode::individual ? ArchitectureConfig{config.tcn}
                                                                         : ArchitectureConfig{config.resnet};
  const AttackClassifier classifier = train_attack(shadow, arch, config.attack_train, attack_seed(stage.seed));
  return evaluate_attack(config, setting, stage.seed, classifier, target, &shadow);
}

std::vector<MetricRow> run_pipeline(const ExperimentConfig& config, const Setting& setting, std::int64_t seed) {
  config.validate();
  return run_cell(config, setting, run_rl_stage(config, setting.t_max, seed)).rows;
}

double accuracy_at(const std::vector<MetricRow>& rows, double theta) {
  for (const auto& r : rows)
    if (std::abs(r.theta - theta) < 1e-9) return r.acc;
  throw DomainError("no metric row at theta " + std::to_string(theta));
}

std::pair<double, double> mean_stderr(const std::vector<double>& xs) {
  if (xs.empty()) return {0.0, 0.0};
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  if (xs.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  const double n = static_cast<double>(xs.size());
  return {mean, std::sqrt(ss / (n - 1.0)) / std::sqrt(n)};
}

std::vector<Aggregate> aggregate(const std::vector<CellResult>& cells, const ExperimentConfig& config) {
  std::vector<Aggregate> out;
  for (const auto& setting : config.settings()) {
    for (std::size_t k = 0; k < config.thetas.size(); ++k) {
      std::vector<double> acc, m;
      for (const auto& c : cells)
        if (c.ok && c.setting == setting) {
          acc.push_back(c.rows[k].acc);
          m.push_back(c.rows[k].mcc);
        }
      Aggregate a;
      a.setting = setting;
      a.theta = config.thetas[k];
      a.n = acc.size();
      a.partial = a.n < config.seeds.size();
      std::tie(a.acc_mean, a.acc_stderr) = mean_stderr(acc);
      std::tie(a.mcc_mean, a.mcc_stderr) = mean_stderr(m);
      out.push_back(a);
    }
  }
  return out;
}

bool RunReport::all_ok() const {
  for (const auto& c : cells)
    if (!c.ok) return false;
  return true;
}

std::vector<MetricRow> RunReport::rows() const {
  std::vector<MetricRow> out;
  for (const auto& c : cells) out.insert(out.end(), c.rows.begin(), c.rows.end());
  return out;
}

RunReport sweep(const ExperimentConfig& config, const ProgressFn& progress) {
  config.validate();
  RunReport report;
  report.config = to_json(config);
  report.config_hash = config_hash(config);
  report.code_version = MIA_VERSION;
  auto log = [&](const std::string& msg) {
    if (progress) progress(msg);
  };

  const auto settings = config.settings();
  for (auto t_max : config.t_max) {
    for (auto seed : config.seeds) {
      const std::string stage_key = "T" + std::to_string(t_max) + "_seed" + std::to_string(seed);
      std::optional<RlStage> stage;
      std::string stage_error;
      try {
        log("rl stage " + stage_key);
        stage = run_rl_stage(config, t_max, seed);
        report.curves[stage_key + "_shadow"] = stage->shadow.curve;
        report.curves[stage_key + "_target"] = stage->target.curve;
        report.behavior_returns[stage_key] = stage->behavior_return;
      } catch (const std::exception& e) {
        stage_error = std::string("rl stage: ") + e.what();
        log("FAILED " + stage_key + ": " + stage_error);
      }
      for (const auto& setting : settings) {
        if (setting.t_max != t_max) continue;
        CellResult cell;
        cell.setting = setting;
        cell.seed = seed;
        if (!stage) {
          cell.error = stage_error;
        } else {
          try {
            cell = run_cell(config, setting, *stage);
            log("cell " + setting.key() + " seed " + std::to_string(seed) + " ACC@0.5 " +
                std::to_string(cell.rows.empty() ? 0.0 : accuracy_at(cell.rows, 0.5)));
          } catch (const std::exception& e) {
            cell.ok = false;
            cell.error = e.what();
            log("FAILED cell " + setting.key() + " seed " + std::to_string(seed) + ": " + cell.error);
          }
        }
        report.cells.push_back(std::move(cell));
      }
    }
  }
  report.aggregates = aggregate(report.cells, config);
  return report;
}

}  // namespace mia
