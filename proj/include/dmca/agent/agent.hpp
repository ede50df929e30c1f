#ifndef DMCA_AGENT_AGENT_HPP
#define DMCA_AGENT_AGENT_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "dmca/agent/networks.hpp"
#include "dmca/agent/replay.hpp"
#include "dmca/env/environment.hpp"
#include "dmca/nn/optimizer.hpp"
#include "dmca/reward/reward.hpp"

namespace dmca::agent {

struct AgentHyperParams {
  double discount = 0.92;
  double tau_soft = 0.01;
  int replay_capacity = 2000;
  int critic_batch = 32;  // transitions whose targets drive the critic step
  int minibatch = 64;     // transitions sampled per update; actor uses all
  int episodes = 300;
  int max_steps = 3000;  // per episode
  int horizon = 5;       // decision length l
  double actor_lr = 1e-4;
  double critic_lr = 1e-3;
  int hidden = 128;
  double grad_clip = 5.0;
  double ou_theta = 0.15;
  double ou_sigma = 0.2;
  double ou_mu = 0.0;
  bool discount_predicted = false;  // apply the discount to the predicted term
  double stop_reward = 1.0;         // threshold of the early-stop rule
  int stop_consecutive = 5;
  int min_episode_steps = 5;
  int train_lag = 0;

  void validate() const;
};

struct EpisodeStats {
  int episode = 0;
  int steps = 0;
  double mean_reward = 0.0;
  double final_reward = 0.0;  // reward of the last step
  double rho_mean = 0.0;      // mean prediction confidence
  bool truncated = false;     // hit the trace edge
};

// Deterministic actor-critic learner with target copies, replay, exploration
// noise, and a learning target that blends the realized next state with the
// predicted one according to the prediction confidence.
class Agent {
 public:
  Agent(int state_dim, int action_dim, const AgentHyperParams& hp,
        std::uint64_t seed);

  const AgentHyperParams& hyper() const { return hp_; }
  int state_dim() const { return state_dim_; }
  int action_dim() const { return action_dim_; }

  nn::Vec act(const nn::Vec& state);        // deterministic policy output
  nn::Vec act_noisy(const nn::Vec& state);  // plus exploration noise, squashed
  void reset_noise() { noise_.reset(); }

  double critic(const nn::Vec& state, const nn::Vec& action);
  double target_critic_value(const nn::Vec& state, const nn::Vec& action);

  // y = r + (1-rho)*discount*Q'(s', mu'(s')) + rho*[discount?]*Q'(s_pre', mu'(s_pre')).
  std::vector<double> pddpg_targets(const std::vector<const Transition*>& batch);
  // One squared-error step toward the fixed targets; returns the batch loss.
  double update_critic(const std::vector<const Transition*>& batch,
                       const std::vector<double>& targets);
  // One ascent step on the critic value of the policy action; returns the
  // actor gradient norm before clipping.
  double update_actor(const std::vector<const Transition*>& batch);
  void soft_update_targets();

  ReplayBuffer& buffer() { return buffer_; }
  nn::Mlp& actor_net() { return actor_; }
  nn::Mlp& critic_net() { return critic_; }
  nn::Mlp& target_actor_net() { return actor_t_; }
  nn::Mlp& target_critic_net() { return critic_t_; }

  // Runs the full training loop over the environment. Episode start slots are
  // drawn from [span_lo, span_hi); episodes end at max_steps, at the trace
  // edge (recorded as truncated), or once the reward stays above stop_reward
  // for stop_consecutive steps after min_episode_steps.
  std::vector<EpisodeStats> train(env::Environment& e, int span_lo, int span_hi,
                                  const reward::RewardParams& rp);

  void save(const std::string& path) const;
  void load(const std::string& path);

 private:
  nn::ParamRefs all_params() const;

  AgentHyperParams hp_;
  int state_dim_, action_dim_;
  nn::Mlp actor_, critic_, actor_t_, critic_t_;
  nn::Adam actor_opt_, critic_opt_;
  OuNoise noise_;
  ReplayBuffer buffer_;
  std::mt19937_64 rng_;
};

void write_episode_log(const std::string& path,
                       const std::vector<EpisodeStats>& stats,
                       const std::vector<std::string>& extra_comments = {});
std::vector<EpisodeStats> read_episode_log(const std::string& path);

}  // namespace dmca::agent

#endif
