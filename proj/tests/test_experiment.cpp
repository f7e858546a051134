#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "mia/core/errors.hpp"
#include "mia/experiment/config.hpp"
#include "mia/experiment/pipeline.hpp"
#include "mia/experiment/report.hpp"
#include "fixtures.hpp"

using namespace mia;
using fixture::read_file;
namespace fs = std::filesystem;

namespace {

ExperimentConfig tiny_config() {
  ExperimentConfig c;
  c.t_max = {8};
  c.members = 100;
  c.nonmembers = 100;
  c.m = 2;
  c.seeds = {0, 1};
  c.behavior.kind = "goal_seeking";
  c.behavior.noise = 0.3;
  c.trainer.vae_hidden = {8};
  c.trainer.actor_hidden = {8};
  c.trainer.critic_hidden = {8};
  c.trainer.n_candidates = 2;
  c.trainer.n_target_samples = 1;
  c.trainer.batch_size = 16;
  c.trainer.steps = 60;
  c.trainer.eval_interval = 30;
  c.trainer.eval_episodes = 1;
  c.tcn = TcnConfig{2, 4, 3, 0.2};
  c.resnet = ResNetConfig{1, 1, 2, 1e-3};
  c.attack_train.epochs = 2;
  return c;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("mia_test_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST(Config, DefaultsValidateAndRoundTrip) {
  const ExperimentConfig c;
  EXPECT_NO_THROW(c.validate());
  const nlohmann::json j = to_json(c);
  EXPECT_EQ(to_json(experiment_config_from_json(j)), j);
  EXPECT_EQ(config_hash(experiment_config_from_json(j)), config_hash(c));
  EXPECT_EQ(to_json(experiment_config_from_json(nlohmann::json::object())), j);
}

TEST(Config, UnknownKeysRejected) {
  EXPECT_THROW(experiment_config_from_json({{"sedes", {1, 2}}}), FormatError);
  EXPECT_THROW(experiment_config_from_json({{"trainer", {{"stepz", 3}}}}), FormatError);
}

TEST(Config, OverridesParseJsonValues) {
  nlohmann::json j = nlohmann::json::object();
  apply_override(j, "trainer.steps=1234");
  apply_override(j, "t_max=[10,50]");
  apply_override(j, "env=PointReach2D-sparse");
  apply_override(j, "modes=[\"individual\",\"collective\"]");
  const ExperimentConfig c = experiment_config_from_json(j);
  EXPECT_EQ(c.trainer.steps, 1234u);
  EXPECT_EQ(c.t_max, (std::vector<std::size_t>{10, 50}));
  EXPECT_EQ(c.env, "PointReach2D-sparse");
  EXPECT_EQ(c.modes.size(), 2u);
  EXPECT_THROW(apply_override(j, "no_equals_sign"), DomainError);
}

TEST(Config, ValidationRejectsBadValues) {
  auto bad = [](auto mutate) {
    ExperimentConfig c;
    mutate(c);
    EXPECT_THROW(c.validate(), DomainError);
  };
  bad([](ExperimentConfig& c) { c.seeds = {1, 1}; });
  bad([](ExperimentConfig& c) { c.seeds = {}; });
  bad([](ExperimentConfig& c) { c.thetas = {0.5, 0.4}; });
  bad([](ExperimentConfig& c) { c.members = 0; });
  bad([](ExperimentConfig& c) { c.behavior.kind = "sac"; });
  bad([](ExperimentConfig& c) { c.behavior.noise_correlation = 1.0; });
  bad([](ExperimentConfig& c) { c.clip_lengths = {200}; });
  bad([](ExperimentConfig& c) { c.trainer.phi = -1.0; });
}

TEST(Config, SettingsNestingOrderAndKeys) {
  ExperimentConfig c;
  c.t_max = {10, 20};
  c.clip_lengths = {0, 5};
  c.modes = {AttackMode::individual, AttackMode::collective};
  c.correlations = {Correlation::correlated, Correlation::decorrelated};
  const auto s = c.settings();
  ASSERT_EQ(s.size(), 16u);
  EXPECT_EQ(s[0].key(), "T10_L10_individual_correlated");
  EXPECT_EQ(s[1].key(), "T10_L10_individual_decorrelated");
  EXPECT_EQ(s[2].mode_label(), "collective");
  EXPECT_EQ(s[3].mode_label(), "collective/decorrelated");
  EXPECT_EQ(s[4].clip_length, 5u);
  EXPECT_EQ(s[8].t_max, 20u);
}

TEST(Config, OutputRootFromEnvironment) {
  ExperimentConfig c;
  c.output_dir = "runs/x";
  ::setenv("MIA_OUTPUT_ROOT", "/tmp/mia_root", 1);
  EXPECT_EQ(resolve_output_dir(c), fs::path("/tmp/mia_root/runs/x"));
  c.output_dir = "/abs/dir";
  EXPECT_EQ(resolve_output_dir(c), fs::path("/abs/dir"));
  ::unsetenv("MIA_OUTPUT_ROOT");
}

TEST(Config, ExternalEnvironmentMustMatchHorizon) {
  ExperimentConfig c;
  c.behavior.kind = "ddpg";
  c.external_command = {MIA_CLI_PATH, "env-serve", "--t-max", "15"};
  EXPECT_EQ(c.make_env(15)->spec().t_max, 15u);
  EXPECT_ANY_THROW(c.make_env(20));
}

TEST(Seeds, PoolsAreDisjoint) {
  for (std::int64_t seed : {0, 1, 7}) {
    const SeedPlan p = seed_plan(seed);
    const std::vector<std::int64_t> bases{p.shadow_member, p.shadow_nonmember, p.private_member,
                                          p.private_nonmember};
    for (std::size_t i = 0; i < bases.size(); ++i)
      for (std::size_t j = i + 1; j < bases.size(); ++j) EXPECT_GE(std::abs(bases[i] - bases[j]), 1'000'000);
    EXPECT_GE(seed_plan(seed + 1).shadow_member, p.private_nonmember + 1'000'000);
  }
  EXPECT_NE(trainer_seed(0, 20, true), trainer_seed(0, 20, false));
  EXPECT_NE(trainer_seed(0, 20, true), trainer_seed(0, 10, true));
}

TEST(Aggregate, SampleStandardError) {
  const auto [mean, se] = mean_stderr({0.6, 0.7, 0.8});
  EXPECT_NEAR(mean, 0.7, 1e-15);
  EXPECT_NEAR(se, 0.1 / std::sqrt(3.0), 1e-15);
  EXPECT_EQ(mean_stderr({0.5}).second, 0.0);
}

TEST(Aggregate, PartialWhenSeedsFail) {
  ExperimentConfig c;
  c.seeds = {0, 1, 2};
  c.thetas = {0.5};
  const Setting s = c.settings().front();
  std::vector<CellResult> cells;
  for (std::int64_t seed : {0, 1, 2}) {
    CellResult cell;
    cell.setting = s;
    cell.seed = seed;
    cell.ok = seed != 2;
    MetricRow r;
    r.acc = seed == 0 ? 0.6 : 0.8;
    r.mcc = 0.1;
    cell.rows = {r};
    cells.push_back(cell);
  }
  const auto a = aggregate(cells, c);
  ASSERT_EQ(a.size(), 1u);
  EXPECT_EQ(a[0].n, 2u);
  EXPECT_TRUE(a[0].partial);
  EXPECT_NEAR(a[0].acc_mean, 0.7, 1e-15);
}

TEST(BlackBox, AttackSideNeverSeesTrainerInternals) {
  std::size_t scanned = 0;
  EXPECT_TRUE(fixture::black_box_violations(MIA_SOURCE_DIR, &scanned).empty());
  EXPECT_GE(scanned, 8u);
}

TEST(BlackBox, PipelineHandsAttackOnlyTrajectories) {
  // The attack stage consumes ModelData, whose only model-derived fields are
  // output trajectories and the learning curve.
  const std::string pipeline = read_file(fs::path(MIA_SOURCE_DIR) / "src" / "experiment" / "pipeline.cpp");
  const auto begin = pipeline.find("AttackDataset format_dataset(");
  const auto end = pipeline.find("std::vector<MetricRow> run_pipeline(");
  ASSERT_NE(begin, std::string::npos);
  ASSERT_NE(end, std::string::npos);
  const std::string attack_side = pipeline.substr(begin, end - begin);
  EXPECT_EQ(attack_side.find(".policy"), std::string::npos);
  EXPECT_EQ(attack_side.find("Bcq"), std::string::npos);
}

TEST(Pipeline, RepeatedRunsEmitIdenticalMetricFiles) {
  const ExperimentConfig c = tiny_config();
  const Setting s = c.settings().front();
  std::ostringstream a, b;
  write_metrics_csv(a, run_pipeline(c, s, 3));
  write_metrics_csv(b, run_pipeline(c, s, 3));
  const std::string text = a.str();
  EXPECT_EQ(text, b.str());
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 10);
}

TEST(Pipeline, SweepCoversEverySettingAndWritesReport) {
  ExperimentConfig c = tiny_config();
  c.modes = {AttackMode::individual, AttackMode::collective};
  c.correlations = {Correlation::correlated, Correlation::decorrelated};
  std::vector<std::string> log;
  const RunReport r = sweep(c, [&](const std::string& m) { log.push_back(m); });
  EXPECT_TRUE(r.all_ok());
  ASSERT_EQ(r.cells.size(), 8u);
  for (const auto& cell : r.cells) {
    EXPECT_EQ(cell.rows.size(), 9u);
    EXPECT_EQ(cell.roc.size(), 9u);
    EXPECT_EQ(cell.rows.front().mode, cell.setting.mode_label());
    EXPECT_EQ(cell.rows.front().m, cell.setting.mode == AttackMode::collective ? 2u : 1u);
  }
  EXPECT_EQ(r.aggregates.size(), 4u * 9u);
  EXPECT_EQ(r.curves.size(), 4u);
  EXPECT_FALSE(log.empty());

  const fs::path dir = scratch("report");
  write_report(r, dir);
  for (const char* f : {"metrics.csv", "aggregate.csv", "summary.json", "run.json"}) EXPECT_TRUE(fs::exists(dir / f));
  EXPECT_TRUE(fs::exists(dir / "roc" / "T8_L8_collective_decorrelated_seed1.csv"));
  EXPECT_TRUE(fs::exists(dir / "curves" / "T8_seed0_target.csv"));
  const std::string metrics = read_file(dir / "metrics.csv");
  EXPECT_EQ(metrics.substr(0, metrics.find('\n')), kMetricsHeader);

  const RunReport back = load_run_report(dir / "run.json");
  const fs::path dir2 = scratch("report2");
  write_report(back, dir2);
  for (const char* f : {"metrics.csv", "aggregate.csv", "summary.json", "run.json"})
    EXPECT_EQ(read_file(dir / f), read_file(dir2 / f)) << f;
  fs::remove_all(dir);
  fs::remove_all(dir2);
}

TEST(Pipeline, FailingCellIsIsolated) {
  ExperimentConfig c = tiny_config();
  c.seeds = {0};
  c.modes = {AttackMode::individual, AttackMode::collective};
  c.m = 500;
  const RunReport r = sweep(c);
  ASSERT_EQ(r.cells.size(), 2u);
  EXPECT_TRUE(r.cells[0].ok);
  EXPECT_FALSE(r.cells[1].ok);
  EXPECT_FALSE(r.cells[1].error.empty());
  EXPECT_FALSE(r.all_ok());
}

TEST(Cli, SweepAndReportCommands) {
  const fs::path dir = scratch("cli");
  fs::create_directories(dir);
  {
    std::ofstream cfg(dir / "config.json");
    nlohmann::json j = to_json(tiny_config());
    j["seeds"] = {0};
    cfg << j.dump(2);
  }
  const std::string cli = MIA_CLI_PATH;
  const std::string sweep_cmd = cli + " sweep -q -c " + (dir / "config.json").string() +
                                " --set attack_train.epochs=1 -o " + (dir / "out").string() + " > /dev/null";
  ASSERT_EQ(std::system(sweep_cmd.c_str()), 0);
  EXPECT_TRUE(fs::exists(dir / "out" / "metrics.csv"));
  const std::string report_cmd =
      cli + " report --run " + (dir / "out" / "run.json").string() + " -o " + (dir / "again").string();
  ASSERT_EQ(std::system(report_cmd.c_str()), 0);
  EXPECT_EQ(read_file(dir / "out" / "metrics.csv"), read_file(dir / "again" / "metrics.csv"));
  const std::string bad = cli + " sweep -c " + (dir / "missing.json").string() + " 2> /dev/null";
  EXPECT_NE(std::system(bad.c_str()), 0);
  fs::remove_all(dir);
}

TEST(Cli, StagewiseCommandsReproduceSweepCell) {
  const fs::path dir = scratch("stages");
  fs::create_directories(dir);
  ExperimentConfig config = tiny_config();
  config.seeds = {0};
  {
    std::ofstream cfg(dir / "config.json");
    cfg << to_json(config).dump(2);
  }
  const std::string cli = std::string(MIA_CLI_PATH) + " ";
  const std::string c = " -c " + (dir / "config.json").string();
  const std::string d = dir.string() + "/";
  auto run = [](const std::string& cmd) { return std::system((cmd + " > /dev/null").c_str()); };
  ASSERT_EQ(run(cli + "collect" + c + " --seed 0 --t-max 8 -o " + d + "pools"), 0);
  for (const char* f : {"shadow_members.jsonl", "shadow_nonmembers.jsonl", "target_members.jsonl",
                        "target_nonmembers.jsonl"})
    EXPECT_TRUE(fs::exists(dir / "pools" / f));
  ASSERT_EQ(run(cli + "train-rl" + c + " --members " + d + "pools/shadow_members.jsonl --nonmembers " + d +
                "pools/shadow_nonmembers.jsonl --seed " + std::to_string(trainer_seed(0, 8, true)) + " -o " + d +
                "shadow"),
            0);
  EXPECT_TRUE(fs::exists(dir / "shadow" / "target_policy.json"));
  EXPECT_TRUE(fs::exists(dir / "shadow" / "learning_curve.csv"));
  ASSERT_EQ(run(cli + "build-dataset" + c + " --members " + d + "pools/shadow_members.jsonl --nonmembers " + d +
                "pools/shadow_nonmembers.jsonl --outputs " + d + "shadow/outputs.jsonl --seed 0 -o " + d + "ds"),
            0);
  ASSERT_EQ(run(cli + "train-attack" + c + " --dataset " + d + "ds --seed 0 -o " + d + "clf.json"), 0);
  ASSERT_EQ(run(cli + "evaluate" + c + " --classifier " + d + "clf.json --dataset " + d + "ds --t-max 8 -o " + d +
                "eval"),
            0);
  const std::string metrics = read_file(dir / "eval" / "metrics.csv");
  EXPECT_EQ(std::count(metrics.begin(), metrics.end(), '\n'), 10);
  EXPECT_TRUE(fs::exists(dir / "eval" / "roc.csv"));
  fs::remove_all(dir);
}
