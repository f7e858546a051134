#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "mia/core/policy.hpp"
#include "mia/core/types.hpp"
#include "mia/env/environment.hpp"
#include "mia/nn/mlp.hpp"
#include "mia/trainer/evaluation.hpp"

namespace mia {

struct BcqConfig {
  std::vector<int> vae_hidden{64, 64};
  std::vector<int> actor_hidden{64, 64};   // perturbation network
  std::vector<int> critic_hidden{64, 64};
  std::size_t latent_dim = 0;  // 0 selects 2 * action_dim
  double phi = 0.05;           // perturbation range, as a fraction of the action half-range
  std::size_t n_candidates = 10;
  std::size_t n_target_samples = 10;  // decoded next-state actions per backup
  double gamma = 0.99;
  double tau = 0.005;
  double lambda = 0.75;  // weight on min(Q1, Q2) in the clipped double-Q target
  double kl_weight = 0.5;
  double vae_lr = 1e-3;
  double actor_lr = 1e-3;
  double critic_lr = 1e-3;
  std::size_t batch_size = 100;
  std::size_t steps = 20000;
  std::size_t eval_interval = 500;  // 0 disables the learning curve
  std::size_t eval_episodes = 5;
  std::size_t buffer_capacity = 1000000;

  std::size_t resolved_latent_dim(std::size_t action_dim) const { return latent_dim ? latent_dim : 2 * action_dim; }
  void validate() const;  // throws DomainError
};

// The released policy pi_f. For a state s it decodes n_cand actions from a
// fixed set of latent vectors, perturbs each by the network xi (bounded by
// phi), and returns the candidate with the highest Q1 value. The latent set is
// drawn once when training ends, so act() is a deterministic function of s.
class BcqPolicy final : public Policy {
 public:
  BcqPolicy(EnvSpec spec, nn::Mlp<double> decoder, nn::Mlp<double> perturbation, nn::Mlp<double> critic,
            nn::Mat<double> latents, double phi);

  std::size_t action_dim() const override { return spec_.action_dim; }
  std::vector<double> act(std::span<const double> state) const override;

  // Candidate actions before perturbation, one column per latent vector.
  nn::Mat<double> decoded_candidates(std::span<const double> state) const;

  const EnvSpec& spec() const { return spec_; }
  std::size_t n_candidates() const { return static_cast<std::size_t>(latents_.cols()); }
  double phi() const { return phi_; }

  // Parameter archive of kind "target-policy".
  void save(const std::filesystem::path& path) const;
  static BcqPolicy load(const std::filesystem::path& path, const std::optional<EnvSpec>& expected = std::nullopt);

 private:
  EnvSpec spec_;
  nn::Mlp<double> decoder_, perturbation_, critic_;
  nn::Mat<double> latents_;  // latent_dim x n_cand
  double phi_;
};

struct BcqTrainingStats {
  std::size_t gradient_steps = 0;
  std::size_t buffer_tuples = 0;
  std::uint64_t buffer_draws = 0;  // tuples sampled from the replay buffer
  double final_vae_loss = 0.0;
  double final_critic_loss = 0.0;
  double final_actor_loss = 0.0;
};

struct TargetTrainingResult {
  BcqPolicy policy;
  LearningCurve curve;
  BcqTrainingStats stats;
};

// Offline batch-constrained Q-learning. All tuples of `batch` are inserted into
// a ReplayBuffer before the first gradient step; every minibatch is drawn from
// that buffer. env_for_eval is only used for learning-curve evaluation.
// Throws DomainError on an empty batch and DivergenceError on a non-finite loss.
TargetTrainingResult train_target_policy(const TrajectoryBatch& batch, Environment& env_for_eval,
                                         const BcqConfig& config, std::uint64_t seed);

}  // namespace mia
