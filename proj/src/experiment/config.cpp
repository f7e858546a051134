#include "mia/experiment/config.hpp"

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "mia/core/errors.hpp"
#include "mia/core/hash.hpp"
#include "mia/env/external_env.hpp"
#include "mia/env/point_reach.hpp"

namespace mia {

using json = nlohmann::json;

namespace {

// Rejects keys outside `allowed` so typos in config files do not pass silently.
void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw FormatError(where + ": expected an object");
  for (const auto& [key, _] : j.items()) {
    bool known = false;
    for (const char* a : allowed) known = known || key == a;
    if (!known) throw FormatError(where + ": unknown key '" + key + "'");
  }
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

json behavior_to_json(const BehaviorConfig& b) {
  return {{"kind", b.kind},           {"train_steps", b.train_steps},
          {"ddpg", to_json(b.ddpg)},  {"gain", b.gain},
          {"mixture", b.mixture},     {"noise", b.noise},
          {"noise_correlation", b.noise_correlation}, {"negatives", b.negatives}};
}

BehaviorConfig behavior_from_json(const json& j) {
  check_keys(j, {"kind", "train_steps", "ddpg", "gain", "mixture", "noise", "noise_correlation", "negatives"},
             "behavior");
  BehaviorConfig b;
  read(j, "kind", b.kind);
  read(j, "train_steps", b.train_steps);
  if (j.contains("ddpg")) b.ddpg = ddpg_config_from_json(j.at("ddpg"));
  read(j, "gain", b.gain);
  read(j, "mixture", b.mixture);
  read(j, "noise", b.noise);
  read(j, "noise_correlation", b.noise_correlation);
  read(j, "negatives", b.negatives);
  return b;
}

}  // namespace

std::string_view to_string(Correlation c) { return c == Correlation::correlated ? "correlated" : "decorrelated"; }

Correlation parse_correlation(std::string_view text) {
  if (text == "correlated") return Correlation::correlated;
  if (text == "decorrelated") return Correlation::decorrelated;
  throw DomainError("unknown correlation mode '" + std::string(text) + "'");
}

std::string Setting::mode_label() const {
  std::string s(to_string(mode));
  if (correlation == Correlation::decorrelated) s += "/decorrelated";
  return s;
}

std::string Setting::key() const {
  return "T" + std::to_string(t_max) + "_L" + std::to_string(clip_length) + "_" + std::string(to_string(mode)) + "_" +
         std::string(to_string(correlation));
}

json to_json(const TcnConfig& c) {
  return {{"levels", c.levels}, {"channels", c.channels}, {"kernel", c.kernel}, {"dropout", c.dropout}};
}

json to_json(const ResNetConfig& c) {
  return {{"stages", c.stages},
          {"blocks_per_stage", c.blocks_per_stage},
          {"base_channels", c.base_channels},
          {"weight_decay", c.weight_decay}};
}

json to_json(const TrainSpec& s) {
  return {{"learning_rate", s.learning_rate}, {"batch_size", s.batch_size}, {"epochs", s.epochs},
          {"patience", s.patience}};
}

json to_json(const BcqConfig& c) {
  return {{"vae_hidden", c.vae_hidden},
          {"actor_hidden", c.actor_hidden},
          {"critic_hidden", c.critic_hidden},
          {"latent_dim", c.latent_dim},
          {"phi", c.phi},
          {"n_candidates", c.n_candidates},
          {"n_target_samples", c.n_target_samples},
          {"gamma", c.gamma},
          {"tau", c.tau},
          {"lambda", c.lambda},
          {"kl_weight", c.kl_weight},
          {"vae_lr", c.vae_lr},
          {"actor_lr", c.actor_lr},
          {"critic_lr", c.critic_lr},
          {"batch_size", c.batch_size},
          {"steps", c.steps},
          {"eval_interval", c.eval_interval},
          {"eval_episodes", c.eval_episodes},
          {"buffer_capacity", c.buffer_capacity}};
}

json to_json(const DdpgConfig& c) {
  return {{"hidden", c.hidden},
          {"actor_lr", c.actor_lr},
          {"critic_lr", c.critic_lr},
          {"gamma", c.gamma},
          {"tau", c.tau},
          {"explore_noise", c.explore_noise},
          {"warmup_steps", c.warmup_steps},
          {"batch_size", c.batch_size},
          {"buffer_capacity", c.buffer_capacity},
          {"eval_episodes", c.eval_episodes}};
}

TcnConfig tcn_config_from_json(const json& j) {
  check_keys(j, {"levels", "channels", "kernel", "dropout"}, "tcn");
  TcnConfig c;
  read(j, "levels", c.levels);
  read(j, "channels", c.channels);
  read(j, "kernel", c.kernel);
  read(j, "dropout", c.dropout);
  return c;
}

ResNetConfig resnet_config_from_json(const json& j) {
  check_keys(j, {"stages", "blocks_per_stage", "base_channels", "weight_decay"}, "resnet");
  ResNetConfig c;
  read(j, "stages", c.stages);
  read(j, "blocks_per_stage", c.blocks_per_stage);
  read(j, "base_channels", c.base_channels);
  read(j, "weight_decay", c.weight_decay);
  return c;
}

TrainSpec train_spec_from_json(const json& j) {
  check_keys(j, {"learning_rate", "batch_size", "epochs", "patience"}, "attack_train");
  TrainSpec s;
  read(j, "learning_rate", s.learning_rate);
  read(j, "batch_size", s.batch_size);
  read(j, "epochs", s.epochs);
  read(j, "patience", s.patience);
  return s;
}

BcqConfig bcq_config_from_json(const json& j) {
  check_keys(j,
             {"vae_hidden", "actor_hidden", "critic_hidden", "latent_dim", "phi", "n_candidates", "n_target_samples",
              "gamma", "tau", "lambda", "kl_weight", "vae_lr", "actor_lr", "critic_lr", "batch_size", "steps",
              "eval_interval", "eval_episodes", "buffer_capacity"},
             "trainer");
  BcqConfig c;
  read(j, "vae_hidden", c.vae_hidden);
  read(j, "actor_hidden", c.actor_hidden);
  read(j, "critic_hidden", c.critic_hidden);
  read(j, "latent_dim", c.latent_dim);
  read(j, "phi", c.phi);
  read(j, "n_candidates", c.n_candidates);
  read(j, "n_target_samples", c.n_target_samples);
  read(j, "gamma", c.gamma);
  read(j, "tau", c.tau);
  read(j, "lambda", c.lambda);
  read(j, "kl_weight", c.kl_weight);
  read(j, "vae_lr", c.vae_lr);
  read(j, "actor_lr", c.actor_lr);
  read(j, "critic_lr", c.critic_lr);
  read(j, "batch_size", c.batch_size);
  read(j, "steps", c.steps);
  read(j, "eval_interval", c.eval_interval);
  read(j, "eval_episodes", c.eval_episodes);
  read(j, "buffer_capacity", c.buffer_capacity);
  return c;
}

DdpgConfig ddpg_config_from_json(const json& j) {
  check_keys(j,
             {"hidden", "actor_lr", "critic_lr", "gamma", "tau", "explore_noise", "warmup_steps", "batch_size",
              "buffer_capacity", "eval_episodes"},
             "ddpg");
  DdpgConfig c;
  read(j, "hidden", c.hidden);
  read(j, "actor_lr", c.actor_lr);
  read(j, "critic_lr", c.critic_lr);
  read(j, "gamma", c.gamma);
  read(j, "tau", c.tau);
  read(j, "explore_noise", c.explore_noise);
  read(j, "warmup_steps", c.warmup_steps);
  read(j, "batch_size", c.batch_size);
  read(j, "buffer_capacity", c.buffer_capacity);
  read(j, "eval_episodes", c.eval_episodes);
  return c;
}

void ExperimentConfig::validate() const {
  if (env.empty()) throw DomainError("config: env name is empty");
  if (t_max.empty() || clip_lengths.empty() || modes.empty() || correlations.empty() || seeds.empty() ||
      thetas.empty())
    throw DomainError("config: t_max, clip_lengths, modes, correlations, seeds and thetas must be nonempty");
  for (auto t : t_max)
    if (t == 0) throw DomainError("config: t_max values must be >= 1");
  if (std::set<std::int64_t>(seeds.begin(), seeds.end()).size() != seeds.size())
    throw DomainError("config: seeds must be distinct");
  for (auto s : seeds)
    if (s < 0 || s > 900'000'000'000LL) throw DomainError("config: seeds must lie in [0, 9e11]");
  if (members == 0 || nonmembers == 0) throw DomainError("config: members and nonmembers must be >= 1");
  if (members >= 1'000'000 || nonmembers >= 1'000'000)
    throw DomainError("config: at most 999999 trajectories per pool");
  if (m == 0) throw DomainError("config: m must be >= 1");
  if (collective_passes == 0) throw DomainError("config: collective_passes must be >= 1");
  if (!(query_noise >= 0.0)) throw DomainError("config: query_noise must be >= 0");
  if (behavior.kind != "ddpg" && behavior.kind != "goal_seeking")
    throw DomainError("config: behavior.kind must be 'ddpg' or 'goal_seeking'");
  if (behavior.kind == "goal_seeking" && !external_command.empty())
    throw DomainError("config: goal_seeking behaviour needs the built-in PointReach2D task");
  if (behavior.mixture == 0) throw DomainError("config: behavior.mixture must be >= 1");
  if (behavior.negatives != "same" && behavior.negatives != "different")
    throw DomainError("config: behavior.negatives must be 'same' or 'different'");
  if (!(behavior.noise >= 0.0)) throw DomainError("config: behavior.noise must be >= 0");
  if (!(behavior.noise_correlation >= 0.0 && behavior.noise_correlation < 1.0))
    throw DomainError("config: behavior.noise_correlation must lie in [0, 1)");
  trainer.validate();
  if (attack_train.learning_rate <= 0.0 || attack_train.batch_size == 0 || attack_train.epochs == 0)
    throw DomainError("config: attack_train needs learning_rate > 0, batch_size >= 1, epochs >= 1");
  double prev = 0.0;
  for (double t : thetas) {
    if (!(t > prev && t < 1.0)) throw DomainError("config: thetas must be strictly increasing in (0, 1)");
    prev = t;
  }
  for (auto mode : modes)
    if (mode == AttackMode::individual)
      for (auto t : t_max)
        for (auto l : clip_lengths)
          if (tcn.receptive_field() < (l ? l : t))
            throw DomainError("config: TCN receptive field " + std::to_string(tcn.receptive_field()) +
                              " is shorter than clip length " + std::to_string(l ? l : t));
}

std::vector<Setting> ExperimentConfig::settings() const {
  std::vector<Setting> out;
  for (auto t : t_max)
    for (auto l : clip_lengths)
      for (auto mode : modes)
        for (auto c : correlations) out.push_back(Setting{t, l ? l : t, mode, c});
  return out;
}

std::unique_ptr<Environment> ExperimentConfig::make_env(std::size_t horizon) const {
  if (external_command.empty()) return make_environment(env, horizon);
  auto e = std::make_unique<ProcessEnvironment>(external_command);
  if (e->spec().t_max != horizon)
    throw DomainError("config: external environment reports T_max " + std::to_string(e->spec().t_max) +
                      ", the sweep asks for " + std::to_string(horizon));
  return e;
}

json to_json(const ExperimentConfig& c) {
  json modes = json::array(), correlations = json::array();
  for (auto m : c.modes) modes.push_back(std::string(to_string(m)));
  for (auto x : c.correlations) correlations.push_back(std::string(to_string(x)));
  return {{"env", c.env},
          {"external_command", c.external_command},
          {"t_max", c.t_max},
          {"clip_lengths", c.clip_lengths},
          {"modes", modes},
          {"correlations", correlations},
          {"m", c.m},
          {"collective_passes", c.collective_passes},
          {"members", c.members},
          {"nonmembers", c.nonmembers},
          {"query_noise", c.query_noise},
          {"behavior", behavior_to_json(c.behavior)},
          {"trainer", to_json(c.trainer)},
          {"tcn", to_json(c.tcn)},
          {"resnet", to_json(c.resnet)},
          {"attack_train", to_json(c.attack_train)},
          {"thetas", c.thetas},
          {"seeds", c.seeds},
          {"output_dir", c.output_dir}};
}

ExperimentConfig experiment_config_from_json(const json& j) {
  try {
    check_keys(j,
               {"env", "external_command", "t_max", "clip_lengths", "modes", "correlations", "m",
                "collective_passes", "members", "nonmembers", "query_noise", "behavior", "trainer", "tcn", "resnet",
                "attack_train", "thetas", "seeds", "output_dir"},
               "config");
    ExperimentConfig c;
    read(j, "env", c.env);
    read(j, "external_command", c.external_command);
    read(j, "t_max", c.t_max);
    read(j, "clip_lengths", c.clip_lengths);
    if (j.contains("modes")) {
      c.modes.clear();
      for (const auto& m : j.at("modes")) c.modes.push_back(parse_attack_mode(m.get<std::string>()));
    }
    if (j.contains("correlations")) {
      c.correlations.clear();
      for (const auto& x : j.at("correlations")) c.correlations.push_back(parse_correlation(x.get<std::string>()));
    }
    read(j, "m", c.m);
    read(j, "collective_passes", c.collective_passes);
    read(j, "members", c.members);
    read(j, "nonmembers", c.nonmembers);
    read(j, "query_noise", c.query_noise);
    if (j.contains("behavior")) c.behavior = behavior_from_json(j.at("behavior"));
    if (j.contains("trainer")) c.trainer = bcq_config_from_json(j.at("trainer"));
    if (j.contains("tcn")) c.tcn = tcn_config_from_json(j.at("tcn"));
    if (j.contains("resnet")) c.resnet = resnet_config_from_json(j.at("resnet"));
    if (j.contains("attack_train")) c.attack_train = train_spec_from_json(j.at("attack_train"));
    read(j, "thetas", c.thetas);
    read(j, "seeds", c.seeds);
    read(j, "output_dir", c.output_dir);
    return c;
  } catch (const json::exception& e) {
    throw FormatError(std::string("config: ") + e.what());
  } catch (const DomainError& e) {
    throw FormatError(e.what());
  }
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open config " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw FormatError("config " + path.string() + ": " + e.what());
  }
  return experiment_config_from_json(j);
}

void apply_override(json& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw DomainError("override '" + assignment + "' is not key=value");
  const std::string path = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value;
  try {
    value = json::parse(text);
  } catch (const json::exception&) {
    value = text;
  }
  json* node = &config;
  std::stringstream ss(path);
  std::string part;
  std::vector<std::string> parts;
  while (std::getline(ss, part, '.')) parts.push_back(part);
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    if (!node->contains(parts[i])) (*node)[parts[i]] = json::object();
    node = &(*node)[parts[i]];
  }
  (*node)[parts.back()] = value;
}

std::filesystem::path resolve_output_dir(const ExperimentConfig& config) {
  std::filesystem::path p(config.output_dir);
  if (p.is_relative())
    if (const char* root = std::getenv("MIA_OUTPUT_ROOT"); root && *root) return std::filesystem::path(root) / p;
  return p;
}

std::string config_hash(const ExperimentConfig& config) {
  Fnv1a h;
  h.text(to_json(config).dump());
  return h.hex();
}

}  // namespace mia
