// Command-line front end for the membership-inference pipeline.
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mia/attack/classifier.hpp"
#include "mia/attack/dataset.hpp"
#include "mia/core/errors.hpp"
#include "mia/core/trajectory_io.hpp"
#include "mia/env/external_env.hpp"
#include "mia/env/point_reach.hpp"
#include "mia/experiment/config.hpp"
#include "mia/experiment/pipeline.hpp"
#include "mia/experiment/report.hpp"
#include "mia/metrics/export.hpp"
#include "mia/oracle/policies.hpp"

namespace fs = std::filesystem;
using namespace mia;

namespace {

struct CommonOptions {
  std::string config_path;
  std::vector<std::string> overrides;
};

ExperimentConfig load_config(const CommonOptions& o) {
  nlohmann::json j = nlohmann::json::object();
  if (!o.config_path.empty()) {
    std::ifstream in(o.config_path);
    if (!in) throw FormatError("cannot open config " + o.config_path);
    in >> j;
  }
  for (const auto& a : o.overrides) apply_override(j, a);
  ExperimentConfig c = experiment_config_from_json(j);
  c.validate();
  return c;
}

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("-c,--config", o.config_path, "Experiment config (JSON)");
  cmd->add_option("--set", o.overrides, "Config override key.path=value (repeatable)");
}

fs::path under_root(const std::string& path) {
  fs::path p(path);
  if (p.is_relative())
    if (const char* root = std::getenv("MIA_OUTPUT_ROOT"); root && *root) return fs::path(root) / p;
  return p;
}

Setting make_setting(std::size_t t_max, std::size_t length, const std::string& mode, const std::string& correlation) {
  return Setting{t_max, length ? length : t_max, parse_attack_mode(mode), parse_correlation(correlation)};
}

ModelData read_model_data(const std::string& members, const std::string& nonmembers, const std::string& outputs) {
  ModelData d;
  d.members = load_trajectory_batch(members);
  d.nonmembers = load_trajectory_batch(nonmembers, d.members.spec);
  d.outputs = load_trajectory_batch(outputs, d.members.spec);
  return d;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Black-box membership inference against batch off-policy RL"};
  app.require_subcommand(1);
  CommonOptions common;
  std::int64_t seed = 0;
  std::size_t t_max = 20;

  // collect
  auto* collect = app.add_subcommand("collect", "Train the data oracle and collect the four trajectory pools");
  add_common(collect, common);
  std::string collect_out = "collect";
  collect->add_option("--seed", seed, "Repetition seed");
  collect->add_option("--t-max", t_max, "Episode horizon");
  collect->add_option("-o,--out", collect_out, "Output directory");

  // train-rl
  auto* train_rl = app.add_subcommand("train-rl", "Train a target policy on a member batch and query its outputs");
  add_common(train_rl, common);
  std::string rl_members, rl_nonmembers, rl_out = "model";
  std::uint64_t rl_seed = 0;
  train_rl->add_option("--members", rl_members, "Member batch (.jsonl)")->required();
  train_rl->add_option("--nonmembers", rl_nonmembers, "Nonmember batch (.jsonl)")->required();
  train_rl->add_option("--seed", rl_seed, "Trainer seed");
  train_rl->add_option("-o,--out", rl_out, "Output directory");

  // build-dataset
  auto* build = app.add_subcommand("build-dataset", "Format paired attack samples");
  add_common(build, common);
  std::string ds_members, ds_nonmembers, ds_outputs, ds_out = "dataset", ds_mode = "individual",
                                                     ds_correlation = "correlated";
  std::size_t ds_length = 0;
  bool ds_evaluation = false;
  build->add_option("--members", ds_members, "Member batch (.jsonl)")->required();
  build->add_option("--nonmembers", ds_nonmembers, "Nonmember batch (.jsonl)")->required();
  build->add_option("--outputs", ds_outputs, "Model outputs for both seed sets (.jsonl)")->required();
  build->add_option("-L,--length", ds_length, "Clipping length (0 = T_max)");
  build->add_option("--mode", ds_mode, "individual | collective");
  build->add_option("--correlation", ds_correlation, "correlated | decorrelated");
  build->add_flag("--evaluation", ds_evaluation, "Put every sample in the test split (attacked model)");
  build->add_option("--seed", seed, "Repetition seed");
  build->add_option("-o,--out", ds_out, "Output directory");

  // train-attack
  auto* train_att = app.add_subcommand("train-attack", "Train the attack classifier on a shadow dataset");
  add_common(train_att, common);
  std::string ta_dataset, ta_out = "classifier.json";
  train_att->add_option("--dataset", ta_dataset, "Attack dataset directory")->required();
  train_att->add_option("--seed", seed, "Repetition seed");
  train_att->add_option("-o,--out", ta_out, "Classifier archive");

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "Score a classifier on an evaluation dataset");
  add_common(evaluate, common);
  std::string ev_classifier, ev_dataset, ev_out = "evaluation", ev_correlation = "correlated";
  evaluate->add_option("--classifier", ev_classifier, "Classifier archive")->required();
  evaluate->add_option("--dataset", ev_dataset, "Attack dataset directory")->required();
  evaluate->add_option("--t-max", t_max, "Episode horizon (metrics label)");
  evaluate->add_option("--correlation", ev_correlation, "correlated | decorrelated (metrics label)");
  evaluate->add_option("--seed", seed, "Repetition seed (metrics label)");
  evaluate->add_option("-o,--out", ev_out, "Output directory");

  // sweep
  auto* sweep_cmd = app.add_subcommand("sweep", "Run every (setting, seed) cell and write the report");
  add_common(sweep_cmd, common);
  std::string sweep_out;
  bool quiet = false;
  sweep_cmd->add_option("-o,--out", sweep_out, "Output directory (overrides output_dir)");
  sweep_cmd->add_flag("-q,--quiet", quiet, "No progress output");

  // report
  auto* report_cmd = app.add_subcommand("report", "Regenerate report files from run.json");
  std::string rp_run, rp_out;
  report_cmd->add_option("--run", rp_run, "run.json of a finished sweep")->required();
  report_cmd->add_option("-o,--out", rp_out, "Output directory")->required();

  // env-serve
  auto* serve = app.add_subcommand("env-serve", "Serve a built-in environment over the JSON-lines protocol");
  std::string env_name = "PointReach2D";
  serve->add_option("--env", env_name, "Environment name");
  serve->add_option("--t-max", t_max, "Episode horizon");

  // show-config
  auto* show = app.add_subcommand("show-config", "Print the resolved, validated config as JSON");
  add_common(show, common);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*collect) {
      const ExperimentConfig config = load_config(common);
      auto env = config.make_env(t_max);
      const OracleData d = collect_stage(config, *env, seed);
      const fs::path dir = under_root(collect_out);
      fs::create_directories(dir);
      save_trajectory_batch(dir / "shadow_members.jsonl", d.shadow_members);
      save_trajectory_batch(dir / "shadow_nonmembers.jsonl", d.shadow_nonmembers);
      save_trajectory_batch(dir / "target_members.jsonl", d.target_members);
      save_trajectory_batch(dir / "target_nonmembers.jsonl", d.target_nonmembers);
      for (std::size_t j = 0; j < d.policies.size(); ++j)
        if (const auto* a = dynamic_cast<const ActorPolicy*>(d.policies[j].get()))
          a->save(dir / ("behavior_policy_" + std::to_string(j) + ".json"));
      std::cout << "behaviour return " << format_number(d.behavior_return) << "\n";
      return 0;
    }
    if (*train_rl) {
      const ExperimentConfig config = load_config(common);
      TrajectoryBatch members = load_trajectory_batch(rl_members);
      TrajectoryBatch nonmembers = load_trajectory_batch(rl_nonmembers, members.spec);
      auto env = config.make_env(members.spec.t_max);
      const ModelData d = train_model(config, *env, std::move(members), std::move(nonmembers), rl_seed);
      const fs::path dir = under_root(rl_out);
      fs::create_directories(dir);
      d.policy->save(dir / "target_policy.json");
      save_trajectory_batch(dir / "outputs.jsonl", d.outputs);
      std::ofstream curve(dir / "learning_curve.csv");
      write_learning_curve_csv(curve, d.curve);
      if (!d.curve.empty()) std::cout << "final return " << format_number(d.curve.back().mean_return) << "\n";
      return 0;
    }
    if (*build) {
      const ExperimentConfig config = load_config(common);
      const ModelData d = read_model_data(ds_members, ds_nonmembers, ds_outputs);
      const Setting s = make_setting(d.members.spec.t_max, ds_length, ds_mode, ds_correlation);
      const AttackDataset ds = format_dataset(config, s, d, seed, ds_evaluation);
      save_attack_dataset(under_root(ds_out), ds);
      std::cout << ds.size() << " samples, hash " << attack_dataset_hash(ds) << "\n";
      return 0;
    }
    if (*train_att) {
      const ExperimentConfig config = load_config(common);
      const AttackDataset ds = load_attack_dataset(ta_dataset);
      const ArchitectureConfig arch =
          ds.mode == AttackMode::individual ? ArchitectureConfig{config.tcn} : ArchitectureConfig{config.resnet};
      const AttackClassifier c = train_attack(ds, arch, config.attack_train, attack_seed(seed));
      const fs::path out = under_root(ta_out);
      if (out.has_parent_path()) fs::create_directories(out.parent_path());
      c.save(out, attack_dataset_hash(ds));
      std::cout << "epochs " << c.metadata().epochs_run << ", best validation loss "
                << format_number(c.metadata().best_validation_loss) << "\n";
      return 0;
    }
    if (*evaluate) {
      const ExperimentConfig config = load_config(common);
      const AttackClassifier c = AttackClassifier::load(ev_classifier);
      const AttackDataset ds = load_attack_dataset(ev_dataset);
      const Setting s{t_max, ds.clip_length, ds.mode, parse_correlation(ev_correlation)};
      const CellResult r = evaluate_attack(config, s, seed, c, ds);
      const fs::path dir = under_root(ev_out);
      fs::create_directories(dir);
      std::ofstream metrics(dir / "metrics.csv", std::ios::binary);
      write_metrics_csv(metrics, r.rows);
      std::ofstream roc(dir / "roc.csv", std::ios::binary);
      write_roc_csv(roc, r.roc);
      std::cout << "ACC@0.5 " << format_number(accuracy_at(r.rows, 0.5)) << "\n";
      return 0;
    }
    if (*sweep_cmd) {
      ExperimentConfig config = load_config(common);
      if (!sweep_out.empty()) config.output_dir = sweep_out;
      const RunReport report = sweep(config, [quiet](const std::string& msg) {
        if (!quiet) std::cerr << msg << std::endl;
      });
      const fs::path dir = resolve_output_dir(config);
      write_report(report, dir);
      std::cout << "report written to " << dir.string() << "\n";
      return report.all_ok() ? 0 : 1;
    }
    if (*report_cmd) {
      write_report(load_run_report(rp_run), under_root(rp_out));
      return 0;
    }
    if (*show) {
      std::cout << to_json(load_config(common)).dump(2) << "\n";
      return 0;
    }
    if (*serve) {
      auto env = make_environment(env_name, t_max);
      serve_environment(*env, std::cin, std::cout);
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
