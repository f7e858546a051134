#include "mia/trainer/bcq.hpp"

#include <algorithm>
#include <cmath>

#include "mia/core/errors.hpp"
#include "mia/core/random.hpp"
#include "mia/core/replay_buffer.hpp"
#include "mia/nn/adam.hpp"
#include "mia/nn/archive.hpp"
#include "mia/nn/batch.hpp"
#include "mia/oracle/policies.hpp"

namespace mia {

using nn::Mat;
using nn::Mlp;
using nn::Vec;

namespace {

constexpr double kLogStdMin = -4.0;
constexpr double kLogStdMax = 15.0;
constexpr double kLatentClip = 0.5;

Mat<double> clamp_rows(const Mat<double>& a, const EnvSpec& spec) {
  Mat<double> out = a;
  for (std::size_t i = 0; i < spec.action_dim; ++i)
    out.row(static_cast<Eigen::Index>(i)) =
        a.row(static_cast<Eigen::Index>(i)).cwiseMax(spec.action_low[i]).cwiseMin(spec.action_high[i]);
  return out;
}

// 1 where low <= a <= high (the clamp passes the gradient), else 0.
Mat<double> inside_mask(const Mat<double>& a, const EnvSpec& spec) {
  Mat<double> m(a.rows(), a.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      const double lo = spec.action_low[static_cast<std::size_t>(i)];
      const double hi = spec.action_high[static_cast<std::size_t>(i)];
      m(i, j) = a(i, j) >= lo && a(i, j) <= hi ? 1.0 : 0.0;
    }
  return m;
}

Mat<double> clipped_gaussian(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Mat<double> z(rows, cols);
  for (Eigen::Index k = 0; k < z.size(); ++k) z.data()[k] = std::clamp(g(rng), -kLatentClip, kLatentClip);
  return z;
}

Mat<double> decode(const Mlp<double>& decoder, const Mat<double>& s, const Mat<double>& z, const EnvSpec& spec,
                   Mlp<double>::Cache* cache = nullptr) {
  return clamp_rows(scale_to_bounds(decoder.forward(nn::vstack(s, z), cache), spec), spec);
}

// a + phi * half_range * xi(s, a), before clamping.
Mat<double> perturb_raw(const Mlp<double>& xi, const Mat<double>& s, const Mat<double>& a, const Vec<double>& scale,
                        Mlp<double>::Cache* cache = nullptr) {
  const Mat<double> o = xi.forward(nn::vstack(s, a), cache);
  return a + (o.array().colwise() * scale.array()).matrix();
}

class BcqLearner {
 public:
  BcqLearner(const EnvSpec& spec, const BcqConfig& cfg, Rng& rng)
      : spec_(spec),
        cfg_(cfg),
        lat_(static_cast<int>(cfg.resolved_latent_dim(spec.action_dim))),
        ds_(static_cast<int>(spec.state_dim)),
        da_(static_cast<int>(spec.action_dim)),
        encoder_(nn::layer_sizes(ds_ + da_, cfg.vae_hidden, 2 * lat_), nn::OutputActivation::identity, rng, "encoder"),
        decoder_(nn::layer_sizes(ds_ + lat_, cfg.vae_hidden, da_), nn::OutputActivation::tanh, rng, "decoder"),
        actor_(nn::layer_sizes(ds_ + da_, cfg.actor_hidden, da_), nn::OutputActivation::tanh, rng, "perturbation"),
        q1_(nn::layer_sizes(ds_ + da_, cfg.critic_hidden, 1), nn::OutputActivation::identity, rng, "critic1"),
        q2_(nn::layer_sizes(ds_ + da_, cfg.critic_hidden, 1), nn::OutputActivation::identity, rng, "critic2"),
        actor_t_(actor_),
        q1_t_(q1_),
        q2_t_(q2_),
        half_(bound_half_range(spec)),
        xi_scale_(cfg.phi * half_) {
    auto vae_params = encoder_.params();
    for (auto* p : decoder_.params()) vae_params.push_back(p);
    auto critic_params = q1_.params();
    for (auto* p : q2_.params()) critic_params.push_back(p);
    vae_opt_ = nn::Adam<double>(vae_params, nn::AdamConfig{cfg.vae_lr});
    actor_opt_ = nn::Adam<double>(actor_.params(), nn::AdamConfig{cfg.actor_lr});
    critic_opt_ = nn::Adam<double>(critic_params, nn::AdamConfig{cfg.critic_lr});
  }

  BcqLearner(const BcqLearner&) = delete;
  BcqLearner& operator=(const BcqLearner&) = delete;

  void update(const nn::TupleBatch& b, Rng& rng) {
    train_vae(b, rng);
    train_critics(b, rng);
    train_actor(b, rng);
    actor_t_.soft_update_from(actor_, cfg_.tau);
    q1_t_.soft_update_from(q1_, cfg_.tau);
    q2_t_.soft_update_from(q2_, cfg_.tau);
    if (!std::isfinite(vae_loss_) || !std::isfinite(critic_loss_) || !std::isfinite(actor_loss_))
      throw DivergenceError("BCQ: non-finite loss (vae " + std::to_string(vae_loss_) + ", critic " +
                            std::to_string(critic_loss_) + ", actor " + std::to_string(actor_loss_) + ")");
  }

  BcqPolicy policy(const Mat<double>& latents) const {
    return BcqPolicy(spec_, decoder_, actor_, q1_, latents, cfg_.phi);
  }

  int latent_dim() const { return lat_; }
  double vae_loss() const { return vae_loss_; }
  double critic_loss() const { return critic_loss_; }
  double actor_loss() const { return actor_loss_; }

 private:
  // Reconstruction MSE + kl_weight * KL(N(mu, sigma) || N(0, I)), both
  // averaged over elements; reparameterised z = mu + sigma * eps.
  void train_vae(const nn::TupleBatch& b, Rng& rng) {
    const Eigen::Index n = b.state.cols();
    Mlp<double>::Cache ec, dc;
    const Mat<double> h = encoder_.forward(nn::vstack(b.state, b.action), &ec);
    const Mat<double> mean = h.topRows(lat_);
    const Mat<double> raw = h.bottomRows(lat_);
    const Mat<double> log_std = raw.cwiseMax(kLogStdMin).cwiseMin(kLogStdMax);
    const Mat<double> sd = log_std.array().exp().matrix();
    Mat<double> eps(lat_, n);
    std::normal_distribution<double> g(0.0, 1.0);
    for (Eigen::Index k = 0; k < eps.size(); ++k) eps.data()[k] = g(rng);
    const Mat<double> z = mean + sd.cwiseProduct(eps);

    const Mat<double> u = decoder_.forward(nn::vstack(b.state, z), &dc);
    const Mat<double> recon = scale_to_bounds(u, spec_);
    const double nr = static_cast<double>(n * da_);
    const double nk = static_cast<double>(n * lat_);
    const Mat<double> diff = recon - b.action;
    const double kl =
        -0.5 * (1.0 + 2.0 * log_std.array() - mean.array().square() - sd.array().square()).sum() / nk;
    vae_loss_ = diff.squaredNorm() / nr + cfg_.kl_weight * kl;

    vae_opt_.zero_grad();
    const Mat<double> du = ((2.0 / nr) * diff).array().colwise() * half_.array();
    const Mat<double> g_in = decoder_.backward(du, dc);
    const Mat<double> dz = g_in.bottomRows(lat_);
    const Mat<double> d_mean = dz + (cfg_.kl_weight / nk) * mean;
    Mat<double> d_log_std =
        dz.cwiseProduct(sd).cwiseProduct(eps) + (cfg_.kl_weight / nk) * (sd.array().square() - 1.0).matrix();
    d_log_std = (raw.array() >= kLogStdMin && raw.array() <= kLogStdMax).select(d_log_std, 0.0);
    encoder_.backward(nn::vstack(d_mean, d_log_std), ec);
    vae_opt_.step();
  }

  // y = r + gamma * not_done * max_j [lambda * min(Q1', Q2') + (1 - lambda) * max(Q1', Q2')]
  // over n_target decoded-and-perturbed actions at s'.
  void train_critics(const nn::TupleBatch& b, Rng& rng) {
    const Eigen::Index n = b.state.cols();
    const auto k = static_cast<Eigen::Index>(cfg_.n_target_samples);
    const Mat<double> s_rep = b.next_state.replicate(1, k);  // column j * n + i
    const Mat<double> a_rep = decode(decoder_, s_rep, clipped_gaussian(lat_, n * k, rng), spec_);
    const Mat<double> a_next = clamp_rows(perturb_raw(actor_t_, s_rep, a_rep, xi_scale_), spec_);
    const Mat<double> sa_next = nn::vstack(s_rep, a_next);
    const Mat<double> t1 = q1_t_.forward(sa_next);
    const Mat<double> t2 = q2_t_.forward(sa_next);
    const Mat<double> mixed =
        cfg_.lambda * t1.cwiseMin(t2) + (1.0 - cfg_.lambda) * t1.cwiseMax(t2);
    Mat<double> best(1, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      double m = mixed(0, i);
      for (Eigen::Index j = 1; j < k; ++j) m = std::max(m, mixed(0, j * n + i));
      best(0, i) = m;
    }
    const Mat<double> y = b.reward + (cfg_.gamma * b.not_done.array() * best.array()).matrix();

    Mlp<double>::Cache c1, c2;
    const Mat<double> sa = nn::vstack(b.state, b.action);
    const Mat<double> d1 = q1_.forward(sa, &c1) - y;
    const Mat<double> d2 = q2_.forward(sa, &c2) - y;
    const double nd = static_cast<double>(n);
    critic_loss_ = (d1.squaredNorm() + d2.squaredNorm()) / nd;
    critic_opt_.zero_grad();
    q1_.backward((2.0 / nd) * d1, c1);
    q2_.backward((2.0 / nd) * d2, c2);
    critic_opt_.step();
  }

  // Maximise Q1(s, clamp(a + xi(s, a))) for decoder samples a.
  void train_actor(const nn::TupleBatch& b, Rng& rng) {
    const Eigen::Index n = b.state.cols();
    const Mat<double> sampled = decode(decoder_, b.state, clipped_gaussian(lat_, n, rng), spec_);
    Mlp<double>::Cache ac, qc;
    const Mat<double> raw = perturb_raw(actor_, b.state, sampled, xi_scale_, &ac);
    const Mat<double> a = clamp_rows(raw, spec_);
    const Mat<double> q = q1_.forward(nn::vstack(b.state, a), &qc);
    actor_loss_ = -q.mean();
    const double nd = static_cast<double>(n);
    const Mat<double> g_in = q1_.backward(Mat<double>::Constant(1, n, -1.0 / nd), qc, false);
    const Mat<double> g_a = g_in.bottomRows(da_).cwiseProduct(inside_mask(raw, spec_));
    actor_opt_.zero_grad();
    actor_.backward(g_a.array().colwise() * xi_scale_.array(), ac);
    actor_opt_.step();
  }

  EnvSpec spec_;
  BcqConfig cfg_;
  int lat_, ds_, da_;
  Mlp<double> encoder_, decoder_, actor_, q1_, q2_;
  Mlp<double> actor_t_, q1_t_, q2_t_;
  Vec<double> half_, xi_scale_;
  nn::Adam<double> vae_opt_, actor_opt_, critic_opt_;
  double vae_loss_ = 0.0, critic_loss_ = 0.0, actor_loss_ = 0.0;
};

}  // namespace

void BcqConfig::validate() const {
  if (!(phi >= 0.0 && phi <= 1.0)) throw DomainError("BcqConfig: phi must lie in [0, 1]");
  if (n_candidates == 0 || n_target_samples == 0) throw DomainError("BcqConfig: candidate counts must be >= 1");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw DomainError("BcqConfig: gamma must lie in [0, 1]");
  if (!(tau > 0.0 && tau <= 1.0)) throw DomainError("BcqConfig: tau must lie in (0, 1]");
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw DomainError("BcqConfig: lambda must lie in [0, 1]");
  if (!(vae_lr > 0.0 && actor_lr > 0.0 && critic_lr > 0.0)) throw DomainError("BcqConfig: learning rates must be > 0");
  if (batch_size == 0) throw DomainError("BcqConfig: batch_size must be >= 1");
  if (buffer_capacity == 0) throw DomainError("BcqConfig: buffer_capacity must be >= 1");
  if (eval_interval > 0 && eval_episodes == 0) throw DomainError("BcqConfig: eval_episodes must be >= 1");
}

BcqPolicy::BcqPolicy(EnvSpec spec, nn::Mlp<double> decoder, nn::Mlp<double> perturbation, nn::Mlp<double> critic,
                     nn::Mat<double> latents, double phi)
    : spec_(std::move(spec)),
      decoder_(std::move(decoder)),
      perturbation_(std::move(perturbation)),
      critic_(std::move(critic)),
      latents_(std::move(latents)),
      phi_(phi) {
  const int ds = static_cast<int>(spec_.state_dim), da = static_cast<int>(spec_.action_dim);
  if (latents_.cols() == 0 || decoder_.in_dim() != ds + latents_.rows() || decoder_.out_dim() != da ||
      perturbation_.in_dim() != ds + da || perturbation_.out_dim() != da || critic_.in_dim() != ds + da ||
      critic_.out_dim() != 1)
    throw DomainError("BcqPolicy: network shapes do not match the EnvSpec");
}

nn::Mat<double> BcqPolicy::decoded_candidates(std::span<const double> state) const {
  if (state.size() != spec_.state_dim) throw DomainError("BcqPolicy: state dimension mismatch");
  const Mat<double> s =
      Eigen::Map<const Vec<double>>(state.data(), static_cast<Eigen::Index>(state.size()))
          .replicate(1, latents_.cols());
  return decode(decoder_, s, latents_, spec_);
}

std::vector<double> BcqPolicy::act(std::span<const double> state) const {
  const Mat<double> a = decoded_candidates(state);
  const Mat<double> s =
      Eigen::Map<const Vec<double>>(state.data(), static_cast<Eigen::Index>(state.size())).replicate(1, a.cols());
  const Mat<double> perturbed = clamp_rows(perturb_raw(perturbation_, s, a, phi_ * bound_half_range(spec_)), spec_);
  const Mat<double> q = critic_.forward(nn::vstack(s, perturbed));
  Eigen::Index best = 0;
  for (Eigen::Index j = 1; j < q.cols(); ++j)
    if (q(0, j) > q(0, best)) best = j;
  return {perturbed.col(best).data(), perturbed.col(best).data() + perturbed.rows()};
}

void BcqPolicy::save(const std::filesystem::path& path) const {
  nn::Param<double> latents("latents", latents_.rows(), latents_.cols(), false);
  latents.value = latents_;
  std::vector<const nn::Param<double>*> tensors = decoder_.params();
  for (const auto* p : perturbation_.params()) tensors.push_back(p);
  for (const auto* p : critic_.params()) tensors.push_back(p);
  tensors.push_back(&latents);
  const nlohmann::json config = {{"decoder", decoder_.sizes()},
                                 {"perturbation", perturbation_.sizes()},
                                 {"critic", critic_.sizes()},
                                 {"latent_dim", latents_.rows()},
                                 {"n_candidates", latents_.cols()},
                                 {"phi", phi_}};
  nn::save_archive(path, nn::make_archive("target-policy", to_json(spec_), config, nlohmann::json::object(),
                                          nn::tensors_to_json(tensors)));
}

BcqPolicy BcqPolicy::load(const std::filesystem::path& path, const std::optional<EnvSpec>& expected) {
  const auto a = nn::load_archive(path, "target-policy");
  const EnvSpec spec = env_spec_from_json(a.at("env_spec"));
  if (expected && !spec.compatible_with(*expected, true))
    throw FormatError("target-policy archive was trained for " + spec.name + " with incompatible dims");
  const auto& c = a.at("config");
  Rng rng(0);
  Mlp<double> decoder(c.at("decoder").get<std::vector<int>>(), nn::OutputActivation::tanh, rng, "decoder");
  Mlp<double> perturbation(c.at("perturbation").get<std::vector<int>>(), nn::OutputActivation::tanh, rng,
                           "perturbation");
  Mlp<double> critic(c.at("critic").get<std::vector<int>>(), nn::OutputActivation::identity, rng, "critic1");
  nn::Param<double> latents("latents", c.at("latent_dim").get<Eigen::Index>(), c.at("n_candidates").get<Eigen::Index>(),
                            false);
  nn::ParamList<double> params = decoder.params();
  for (auto* p : perturbation.params()) params.push_back(p);
  for (auto* p : critic.params()) params.push_back(p);
  params.push_back(&latents);
  try {
    nn::tensors_from_json(params, a.at("tensors"));
  } catch (const std::runtime_error& e) {
    throw FormatError(std::string("target-policy archive: ") + e.what());
  }
  return BcqPolicy(spec, std::move(decoder), std::move(perturbation), std::move(critic), latents.value,
                   c.at("phi").get<double>());
}

TargetTrainingResult train_target_policy(const TrajectoryBatch& batch, Environment& env_for_eval,
                                         const BcqConfig& config, std::uint64_t seed) {
  config.validate();
  if (batch.empty()) throw DomainError("train_target_policy: empty batch");
  batch.validate();
  const EnvSpec& spec = batch.spec;
  if (!spec.compatible_with(env_for_eval.spec(), false))
    throw DomainError("train_target_policy: evaluation environment does not match the batch spec");

  ReplayBuffer buffer(config.buffer_capacity, derive_seed(seed, 53));
  for (const auto& t : batch.trajectories) buffer.insert(t);

  Rng init_rng = make_rng(seed, 59);
  BcqLearner learner(spec, config, init_rng);
  Rng rng = make_rng(seed, 61);
  Rng latent_rng = make_rng(seed, 67);
  const Mat<double> latents =
      clipped_gaussian(learner.latent_dim(), static_cast<Eigen::Index>(config.n_candidates), latent_rng);

  LearningCurve curve;
  for (std::size_t step = 1; step <= config.steps; ++step) {
    learner.update(nn::gather(buffer.sample(config.batch_size), spec.state_dim, spec.action_dim), rng);
    if (config.eval_interval > 0 && step % config.eval_interval == 0) {
      const EvaluationResult r = evaluate_policy(env_for_eval, learner.policy(latents), config.eval_episodes, 1.0);
      if (!std::isfinite(r.mean_return)) throw DivergenceError("BCQ: evaluation return is not finite");
      curve.add(step, r);
    }
  }

  BcqTrainingStats stats;
  stats.gradient_steps = config.steps;
  stats.buffer_tuples = buffer.size();
  stats.buffer_draws = buffer.draws();
  stats.final_vae_loss = learner.vae_loss();
  stats.final_critic_loss = learner.critic_loss();
  stats.final_actor_loss = learner.actor_loss();
  return TargetTrainingResult{learner.policy(latents), std::move(curve), stats};
}

}  // namespace mia
