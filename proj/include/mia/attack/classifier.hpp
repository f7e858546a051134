#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <variant>
#include <vector>

#include "mia/attack/dataset.hpp"
#include "mia/attack/resnet.hpp"
#include "mia/attack/tcn.hpp"
#include "mia/attack/threshold.hpp"

namespace mia {

// TCN for individual mode, ResNet for collective mode.
using ArchitectureConfig = std::variant<TcnConfig, ResNetConfig>;

struct TrainSpec {
  double learning_rate = 1e-3;  // Adam
  std::size_t batch_size = 32;
  std::size_t epochs = 50;
  std::size_t patience = 10;  // epochs without validation-loss improvement before stopping
};

struct TrainingMetadata {
  std::uint64_t seed = 0;
  std::size_t epochs_run = 0;
  std::size_t best_epoch = 0;      // 1-based; 0 = initial parameters
  double initial_train_loss = 0.0;  // before any update, dropout off
  double best_validation_loss = 0.0;
  std::vector<double> train_losses;       // per epoch, dropout off, after the epoch
  std::vector<double> validation_losses;  // per epoch
};

class AttackClassifier {
 public:
  AttackMode mode() const { return mode_; }
  std::string architecture() const { return mode_ == AttackMode::individual ? "tcn" : "resnet"; }
  std::size_t action_dim() const { return action_dim_; }
  std::size_t clip_length() const { return clip_length_; }
  std::size_t m() const { return m_; }
  const ArchitectureConfig& config() const { return config_; }
  const TrainingMetadata& metadata() const { return metadata_; }

  // Raw network output. Throws DomainError on a shape or mode mismatch.
  double logit(const PairedSample& sample) const;
  double logit(const CollectiveSample& sample) const;

  // Mean binary cross-entropy over the given samples of a dataset (dropout off).
  double loss(const AttackDataset& dataset, const std::vector<std::size_t>& indices) const;

  // Membership probabilities for the listed samples (all samples when indices is empty).
  std::vector<double> predict(const AttackDataset& dataset, std::vector<std::size_t> indices = {}) const;

  void save(const std::filesystem::path& path, const std::string& dataset_hash = "") const;
  static AttackClassifier load(const std::filesystem::path& path);

  // Fresh, untrained classifier shaped for the dataset.
  static AttackClassifier create(const AttackDataset& dataset, const ArchitectureConfig& config,
                                 std::uint64_t seed);

 private:
  friend AttackClassifier train_attack(const AttackDataset&, const ArchitectureConfig&, const TrainSpec&,
                                       std::uint64_t);

  AttackMode mode_ = AttackMode::individual;
  std::size_t action_dim_ = 0;
  std::size_t clip_length_ = 0;
  std::size_t m_ = 1;
  ArchitectureConfig config_;
  TrainingMetadata metadata_;
  // Frozen after training; copies share the network.
  std::shared_ptr<TcnNet<double>> tcn_;
  std::shared_ptr<ResNetNet<double>> resnet_;
};

// Minimises mean binary cross-entropy on the train split with Adam and keeps
// the parameters of the epoch with the lowest validation loss (training loss
// when the validation split is empty). Throws DomainError on a mode/architecture
// mismatch or a missing label, DivergenceError on a non-finite loss.
AttackClassifier train_attack(const AttackDataset& dataset, const ArchitectureConfig& config,
                              const TrainSpec& spec, std::uint64_t seed);

// sigmoid(logit), kept strictly inside (0, 1).
double predict_membership(const AttackClassifier& classifier, const PairedSample& sample);
double predict_membership(const AttackClassifier& classifier, const CollectiveSample& sample);

// Network input layouts: a pair is (2d^A x L); a collective sample is
// (2d^A x L * m) with column l * m + j holding step l of pair j.
nn::Mat<double> to_network_input(const PairedSample& sample);
nn::Mat<double> to_network_input(const CollectiveSample& sample);

struct GradientCheckResult {
  double max_relative_error = 0.0;
  std::size_t checked = 0;
  std::size_t parameters = 0;
};

// Compares the analytic gradient of the mean BCE loss over all samples of
// `probe` (dropout off, double precision) with central differences of step
// `step` on `samples` randomly chosen parameter entries (all of them when the
// network is smaller).
GradientCheckResult gradient_check(const ArchitectureConfig& config, const AttackDataset& probe,
                                   std::uint64_t seed, std::size_t samples = 100, double step = 1e-5);

}  // namespace mia
