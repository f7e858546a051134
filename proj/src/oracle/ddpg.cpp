#include "mia/oracle/ddpg.hpp"

#include <cmath>

#include "mia/core/errors.hpp"
#include "mia/core/replay_buffer.hpp"
#include "mia/env/rollout.hpp"
#include "mia/nn/adam.hpp"
#include "mia/nn/batch.hpp"
#include "mia/trainer/evaluation.hpp"

namespace mia {

using nn::Mat;
using nn::TupleBatch;
using nn::gather;

namespace {

// Actor, critic, their target copies and optimizers. Not movable: the
// optimizers hold pointers into the networks.
class ActorCritic {
 public:
  ActorCritic(const EnvSpec& spec, const DdpgConfig& cfg, Rng& rng)
      : spec_(spec),
        cfg_(cfg),
        actor_(nn::layer_sizes(static_cast<int>(spec.state_dim), cfg.hidden, static_cast<int>(spec.action_dim)),
               nn::OutputActivation::tanh, rng, "actor"),
        critic_(nn::layer_sizes(static_cast<int>(spec.state_dim + spec.action_dim), cfg.hidden, 1),
                nn::OutputActivation::identity, rng, "critic"),
        actor_target_(actor_),
        critic_target_(critic_),
        actor_opt_(actor_.params(), nn::AdamConfig{cfg.actor_lr}),
        critic_opt_(critic_.params(), nn::AdamConfig{cfg.critic_lr}),
        half_range_(bound_half_range(spec)) {}

  ActorCritic(const ActorCritic&) = delete;
  ActorCritic& operator=(const ActorCritic&) = delete;

  Mat<double> act(const Mat<double>& s, const nn::Mlp<double>& actor, nn::Mlp<double>::Cache* cache = nullptr) const {
    return scale_to_bounds(actor.forward(s, cache), spec_);
  }

  void update(const TupleBatch& b) {
    const double n = static_cast<double>(b.state.cols());
    // Critic: regress Q(s, a) onto r + gamma * (1 - done) * Q'(s', mu'(s')).
    const Mat<double> next_q = critic_target_.forward(nn::vstack(b.next_state, act(b.next_state, actor_target_)));
    const Mat<double> y = b.reward + (cfg_.gamma * b.not_done.array() * next_q.array()).matrix();
    nn::Mlp<double>::Cache cc;
    const Mat<double> q = critic_.forward(nn::vstack(b.state, b.action), &cc);
    const Mat<double> diff = q - y;
    critic_loss_ = diff.squaredNorm() / n;
    critic_opt_.zero_grad();
    critic_.backward(2.0 * diff / n, cc);
    critic_opt_.step();

    // Actor: ascend Q(s, mu(s)).
    nn::Mlp<double>::Cache ac, qc;
    const Mat<double> a = act(b.state, actor_, &ac);
    const Mat<double> qa = critic_.forward(nn::vstack(b.state, a), &qc);
    actor_loss_ = -qa.mean();
    const Mat<double> g_in = critic_.backward(Mat<double>::Constant(1, qa.cols(), -1.0 / n), qc, false);
    Mat<double> g_a = g_in.bottomRows(static_cast<Eigen::Index>(spec_.action_dim));
    g_a = (g_a.array().colwise() * half_range_.array()).matrix();
    actor_opt_.zero_grad();
    actor_.backward(g_a, ac);
    actor_opt_.step();

    actor_target_.soft_update_from(actor_, cfg_.tau);
    critic_target_.soft_update_from(critic_, cfg_.tau);
    if (!std::isfinite(critic_loss_) || !std::isfinite(actor_loss_))
      throw DivergenceError("DDPG: non-finite loss (critic " + std::to_string(critic_loss_) + ", actor " +
                            std::to_string(actor_loss_) + ")");
  }

  const nn::Mlp<double>& actor() const { return actor_; }

 private:
  EnvSpec spec_;
  DdpgConfig cfg_;
  nn::Mlp<double> actor_, critic_, actor_target_, critic_target_;
  nn::Adam<double> actor_opt_, critic_opt_;
  nn::Vec<double> half_range_;
  double critic_loss_ = 0.0, actor_loss_ = 0.0;
};

}  // namespace

BehaviorTrainingResult train_behavior_policy(Environment& env, std::size_t total_steps, const DdpgConfig& config,
                                             std::uint64_t seed) {
  const EnvSpec& spec = env.spec();
  if (total_steps > 0 && total_steps < config.warmup_steps)
    throw DomainError("train_behavior_policy: total_steps must be 0 or at least warmup_steps");
  if (config.batch_size == 0) throw DomainError("train_behavior_policy: batch size must be positive");

  Rng rng = make_rng(seed, 41);
  ActorCritic ac(spec, config, rng);
  ReplayBuffer buffer(config.buffer_capacity, derive_seed(seed, 43));
  UniformRandomPolicy warmup_policy(spec, derive_seed(seed, 47));
  std::normal_distribution<double> gauss(0.0, 1.0);

  std::uint64_t episode = 0;
  auto episode_seed = [&] { return derive_seed(seed, 1000 + episode); };
  std::vector<double> state = total_steps > 0 ? env.reset(episode_seed()) : std::vector<double>{};
  std::size_t t = 0, updates = 0;
  for (std::size_t step = 0; step < total_steps; ++step) {
    std::vector<double> action;
    if (step < config.warmup_steps) {
      action = warmup_policy.act(state);
    } else {
      const Mat<double> s = Eigen::Map<const nn::Vec<double>>(state.data(), static_cast<Eigen::Index>(state.size()));
      const Mat<double> a = ac.act(s, ac.actor());
      action.assign(a.data(), a.data() + a.size());
      for (auto& x : action) x += config.explore_noise * gauss(rng);
    }
    action = clamp_action(action, spec);
    StepResult r = env.step(action);
    ++t;
    const bool absorbing = r.terminal && t < spec.t_max;
    buffer.insert(Transition{to_float(state), to_float(action), static_cast<float>(r.reward), to_float(r.next_state),
                             absorbing});
    if (r.terminal) {
      ++episode;
      state = env.reset(episode_seed());
      t = 0;
    } else {
      state = std::move(r.next_state);
    }
    if (step >= config.warmup_steps && buffer.size() >= config.batch_size) {
      ac.update(gather(buffer.sample(config.batch_size), spec.state_dim, spec.action_dim));
      ++updates;
    }
  }

  ActorPolicy policy(ac.actor(), spec);
  double eval = 0.0;
  if (config.eval_episodes > 0) {
    eval = evaluate_policy(env, policy, config.eval_episodes, 1.0).mean_return;
    if (!std::isfinite(eval)) throw DivergenceError("DDPG: evaluation return is not finite");
  }
  return BehaviorTrainingResult{std::move(policy), eval, updates};
}

}  // namespace mia
