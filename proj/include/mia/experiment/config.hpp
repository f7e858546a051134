#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "mia/attack/classifier.hpp"
#include "mia/env/environment.hpp"
#include "mia/metrics/metrics.hpp"
#include "mia/oracle/ddpg.hpp"
#include "mia/trainer/bcq.hpp"

namespace mia {

enum class Correlation { correlated, decorrelated };
std::string_view to_string(Correlation c);
Correlation parse_correlation(std::string_view text);

// How the data oracle's exploration policies are obtained.
struct BehaviorConfig {
  std::string kind = "ddpg";  // "ddpg" | "goal_seeking"
  std::size_t train_steps = 30000;  // ddpg only
  DdpgConfig ddpg;
  double gain = 1.0;  // goal_seeking only
  std::size_t mixture = 1;  // number of exploration policies mixed per batch
  double noise = 0.1;
  double noise_correlation = 0.0;
  // Nonmember trajectories come from the member policy ("same") or from an
  // independently trained one ("different").
  std::string negatives = "same";
};

// One cell coordinate of the sweep product.
struct Setting {
  std::size_t t_max = 0;
  std::size_t clip_length = 0;  // resolved (never 0)
  AttackMode mode = AttackMode::individual;
  Correlation correlation = Correlation::correlated;

  // "individual", "collective/decorrelated", ...
  std::string mode_label() const;
  std::string key() const;  // file-name friendly, e.g. "T20_L20_individual_correlated"
  bool operator==(const Setting&) const = default;
};

struct ExperimentConfig {
  std::string env = "PointReach2D";
  // Launches an external simulator speaking the JSON-lines protocol instead of
  // a built-in task; `env` is then only a label.
  std::vector<std::string> external_command;
  std::vector<std::size_t> t_max{20};
  std::vector<std::size_t> clip_lengths{0};  // 0 means L = T_max
  std::vector<AttackMode> modes{AttackMode::individual};
  std::vector<Correlation> correlations{Correlation::correlated};
  std::size_t m = 10;
  std::size_t collective_passes = 1;
  std::size_t members = 200;
  std::size_t nonmembers = 200;
  double query_noise = 0.0;  // exploration noise on output-trajectory queries
  BehaviorConfig behavior;
  BcqConfig trainer;
  TcnConfig tcn;
  ResNetConfig resnet;
  TrainSpec attack_train;
  std::vector<double> thetas = default_theta_sweep();
  std::vector<std::int64_t> seeds{0, 1, 2, 3, 4};
  std::string output_dir = "runs/default";

  // Throws DomainError (empty lists, duplicate seeds, bad ranges, L > T_max
  // is allowed since short trajectories are padded).
  void validate() const;

  // Cartesian product T_max x L x mode x correlation, in that nesting order.
  std::vector<Setting> settings() const;

  // Environment for one horizon.
  std::unique_ptr<Environment> make_env(std::size_t t_max) const;
};

nlohmann::json to_json(const ExperimentConfig& config);
// Missing keys take defaults; unknown keys raise FormatError.
ExperimentConfig experiment_config_from_json(const nlohmann::json& j);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

// Applies "a.b.c=value" overrides; value is parsed as JSON and taken as a
// plain string when that fails.
void apply_override(nlohmann::json& config, const std::string& assignment);

// output_dir resolved against $MIA_OUTPUT_ROOT when it is relative and the
// variable is set.
std::filesystem::path resolve_output_dir(const ExperimentConfig& config);

// Hex FNV-1a of the canonical JSON dump.
std::string config_hash(const ExperimentConfig& config);

nlohmann::json to_json(const TcnConfig& c);
nlohmann::json to_json(const ResNetConfig& c);
nlohmann::json to_json(const TrainSpec& s);
nlohmann::json to_json(const BcqConfig& c);
nlohmann::json to_json(const DdpgConfig& c);
TcnConfig tcn_config_from_json(const nlohmann::json& j);
ResNetConfig resnet_config_from_json(const nlohmann::json& j);
TrainSpec train_spec_from_json(const nlohmann::json& j);
BcqConfig bcq_config_from_json(const nlohmann::json& j);
DdpgConfig ddpg_config_from_json(const nlohmann::json& j);

}  // namespace mia
