#include "dmca/agent/agent.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "dmca/util/csv.hpp"
#include "dmca/util/errors.hpp"

namespace dmca::agent {

namespace {
constexpr double kSquashMargin = 1e-6;
}

void AgentHyperParams::validate() const {
  if (!(discount > 0.0) || !(discount <= 1.0))
    throw ConfigError("discount must lie in (0,1]");
  if (!(tau_soft > 0.0) || !(tau_soft <= 1.0))
    throw ConfigError("soft-update rate must lie in (0,1]");
  if (replay_capacity < minibatch || replay_capacity < critic_batch)
    throw ConfigError("replay capacity below the batch sizes");
  if (critic_batch < 1 || minibatch < critic_batch)
    throw ConfigError("batch sizes must satisfy 1 <= critic_batch <= minibatch");
  if (episodes < 1 || max_steps < 1) throw ConfigError("loop bounds must be positive");
  if (horizon < 0) throw ConfigError("decision length cannot be negative");
  if (!(actor_lr > 0.0) || !(critic_lr > 0.0))
    throw ConfigError("learning rates must be positive");
  if (hidden < 1) throw ConfigError("hidden width must be positive");
  if (ou_theta < 0.0 || ou_sigma < 0.0)
    throw ConfigError("noise parameters cannot be negative");
  if (stop_consecutive < 1) throw ConfigError("stop run length must be positive");
  if (min_episode_steps < 1) throw ConfigError("minimum episode length must be positive");
  if (train_lag < 0) throw ConfigError("training lag cannot be negative");
}

Agent::Agent(int state_dim, int action_dim, const AgentHyperParams& hp,
             std::uint64_t seed)
    : hp_(hp),
      state_dim_(state_dim),
      action_dim_(action_dim),
      actor_(make_actor("actor", state_dim, action_dim, hp.hidden, seed)),
      critic_(make_critic("critic", state_dim, action_dim, hp.hidden, seed + 1)),
      actor_t_(make_actor("actor_t", state_dim, action_dim, hp.hidden, seed)),
      critic_t_(make_critic("critic_t", state_dim, action_dim, hp.hidden, seed + 1)),
      actor_opt_(hp.actor_lr, hp.grad_clip),
      critic_opt_(hp.critic_lr, hp.grad_clip),
      noise_(action_dim, hp.ou_theta, hp.ou_sigma, hp.ou_mu, seed + 2),
      buffer_(hp.replay_capacity),
      rng_(seed + 3) {
  hp_.validate();
  nn::copy_values(actor_t_.params(), actor_.params());
  nn::copy_values(critic_t_.params(), critic_.params());
  actor_t_.set_recording(false);
  critic_t_.set_recording(false);
}

nn::Vec Agent::act(const nn::Vec& state) {
  if (state.size() != state_dim_) throw StateError("state has the wrong length");
  actor_.set_recording(false);
  nn::Vec a = actor_.forward(state);
  actor_.set_recording(true);
  return a;
}

nn::Vec Agent::act_noisy(const nn::Vec& state) {
  nn::Vec a = act(state) + noise_.step();
  for (int i = 0; i < a.size(); ++i)
    a[i] = std::clamp(a[i], kSquashMargin, 1.0 - kSquashMargin);
  return a;
}

double Agent::critic(const nn::Vec& state, const nn::Vec& action) {
  critic_.set_recording(false);
  const double q = critic_value(critic_, state, action);
  critic_.set_recording(true);
  return q;
}

double Agent::target_critic_value(const nn::Vec& state, const nn::Vec& action) {
  return critic_value(critic_t_, state, action);
}

std::vector<double> Agent::pddpg_targets(const std::vector<const Transition*>& batch) {
  std::vector<double> y;
  y.reserve(batch.size());
  for (const Transition* t : batch) {
    const double rho = t->confidence;
    const nn::Vec a_next = actor_t_.forward(t->next_state);
    const double q_next = target_critic_value(t->next_state, a_next);
    double target = t->reward + (1.0 - rho) * hp_.discount * q_next;
    if (rho > 0.0) {
      const nn::Vec a_pre = actor_t_.forward(t->predicted_next_state);
      const double q_pre = target_critic_value(t->predicted_next_state, a_pre);
      target += rho * (hp_.discount_predicted ? hp_.discount : 1.0) * q_pre;
    }
    y.push_back(target);
  }
  return y;
}

double Agent::update_critic(const std::vector<const Transition*>& batch,
                            const std::vector<double>& targets) {
  if (batch.empty()) throw StateError("empty critic batch");
  if (batch.size() != targets.size())
    throw StateError("targets do not match the batch");
  critic_.zero_grads();
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  double loss = 0.0;
  nn::Vec dy(1);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const double q =
        critic_.forward(concat_state_action(batch[i]->state, batch[i]->action))[0];
    const double err = q - targets[i];
    loss += err * err * inv_n;
    dy[0] = 2.0 * err * inv_n;
    critic_.backward(dy);
  }
  if (!std::isfinite(loss)) {
    critic_.zero_grads();
    return loss;
  }
  critic_opt_.step(critic_.params());
  return loss;
}

double Agent::update_actor(const std::vector<const Transition*>& batch) {
  if (batch.empty()) throw StateError("empty actor batch");
  actor_.zero_grads();
  critic_.zero_grads();
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  nn::Vec dq(1);
  dq[0] = -inv_n;  // ascend the mean critic value
  for (const Transition* t : batch) {
    const nn::Vec a = actor_.forward(t->state);
    critic_.forward(concat_state_action(t->state, a));
    const nn::Vec dinput = critic_.backward(dq);
    actor_.backward(dinput.tail(action_dim_));
  }
  double norm = 0.0;
  for (const nn::Param* p : actor_.params()) norm += p->grad.squaredNorm();
  norm = std::sqrt(norm);
  actor_opt_.step(actor_.params());
  critic_.zero_grads();  // discard the pass-through gradients
  return norm;
}

void Agent::soft_update_targets() {
  nn::soft_update(actor_t_.params(), actor_.params(), hp_.tau_soft);
  nn::soft_update(critic_t_.params(), critic_.params(), hp_.tau_soft);
}

std::vector<EpisodeStats> Agent::train(env::Environment& e, int span_lo,
                                       int span_hi,
                                       const reward::RewardParams& rp) {
  if (e.state_dim() != state_dim_)
    throw ConfigError("environment state length does not match the agent");
  if (e.user_slots() != action_dim_)
    throw ConfigError("environment user slots do not match the agent");
  // Episode starts need room for the first step (execution at slot+lag) and
  // its successor state.
  const int hi_start = std::min(span_hi - 2, e.slots() - 2 - hp_.train_lag);
  if (span_lo < hp_.train_lag || span_hi > e.slots() || span_lo > hi_start)
    throw ConfigError("episode span outside the trace");
  const bool live = e.config().mode == env::StreamingMode::kLive;
  const env::PredictionSource* source = e.prediction_source();

  std::vector<EpisodeStats> log;
  log.reserve(hp_.episodes);
  std::uniform_int_distribution<int> start_pick(span_lo, hi_start);
  for (int ep = 0; ep < hp_.episodes; ++ep) {
    noise_.reset();
    int slot = start_pick(rng_);
    EpisodeStats st;
    st.episode = ep;
    double reward_sum = 0.0, rho_sum = 0.0;
    int above = 0;
    while (true) {
      const env::SystemState s = e.state(slot);
      const nn::Vec a = act_noisy(s.values);
      const env::Decision d = env::decode_action(a, e.channels());
      const env::StepOutcome out = e.step(slot, d, hp_.train_lag);
      const double base =
          live ? reward::lsm_reward(out.deltas, out.satisfied_fraction, rp)
               : reward::bsm_reward(out.deltas, out.satisfied_fraction, rp);
      const double r = reward::final_reward(out.collision, base, rp);

      Transition tr;
      tr.state = s.values;
      tr.action = a;
      tr.reward = r;
      tr.next_state = e.state(slot + 1).values;
      if (source) {
        tr.predicted_next_state = e.predicted_next_state(slot).values;
        tr.confidence = source->confidence(slot);
      } else {
        tr.predicted_next_state = nn::Vec::Zero(state_dim_);
        tr.confidence = 0.0;
      }
      buffer_.push(std::move(tr));

      if (buffer_.size() >= hp_.minibatch) {
        const auto batch = buffer_.sample(hp_.minibatch, rng_);
        const std::vector<const Transition*> head(
            batch.begin(), batch.begin() + hp_.critic_batch);
        update_critic(head, pddpg_targets(head));
        update_actor(batch);
        soft_update_targets();
      }

      ++st.steps;
      reward_sum += r;
      rho_sum += source ? source->confidence(slot) : 0.0;
      st.final_reward = r;
      above = r > hp_.stop_reward ? above + 1 : 0;

      if (st.steps >= hp_.max_steps) break;
      if (st.steps >= hp_.min_episode_steps && above >= hp_.stop_consecutive)
        break;
      if (slot + 2 >= span_hi || slot + 2 + hp_.train_lag > e.slots()) {
        st.truncated = true;
        break;
      }
      ++slot;
    }
    st.mean_reward = reward_sum / st.steps;
    st.rho_mean = rho_sum / st.steps;
    log.push_back(st);
  }
  return log;
}

nn::ParamRefs Agent::all_params() const {
  auto* self = const_cast<Agent*>(this);
  nn::ParamRefs refs = self->actor_.params();
  for (nn::Param* p : self->critic_.params()) refs.push_back(p);
  for (nn::Param* p : self->actor_t_.params()) refs.push_back(p);
  for (nn::Param* p : self->critic_t_.params()) refs.push_back(p);
  return refs;
}

void Agent::save(const std::string& path) const {
  nn::save_params(path, all_params(),
                  {{"state_dim", std::to_string(state_dim_)},
                   {"action_dim", std::to_string(action_dim_)},
                   {"hidden", std::to_string(hp_.hidden)}});
}

void Agent::load(const std::string& path) {
  const auto meta = nn::load_params(path, all_params());
  for (const auto& [key, value] : meta) {
    if (key == "state_dim" && std::stoi(value) != state_dim_)
      throw DataError("checkpoint state length does not match the agent");
    if (key == "action_dim" && std::stoi(value) != action_dim_)
      throw DataError("checkpoint action length does not match the agent");
  }
}

void write_episode_log(const std::string& path,
                       const std::vector<EpisodeStats>& stats,
                       const std::vector<std::string>& extra_comments) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open episode log for writing: " + path);
  for (const auto& c : extra_comments) out << "# " << c << "\n";
  out << "episode,steps,mean_reward,final_reward,rho_mean\n";
  for (const auto& s : stats)
    out << s.episode << ',' << s.steps << ',' << format_double(s.mean_reward)
        << ',' << format_double(s.final_reward) << ',' << format_double(s.rho_mean)
        << "\n";
  if (!out) throw DataError("failed while writing episode log: " + path);
}

std::vector<EpisodeStats> read_episode_log(const std::string& path) {
  const CsvFile csv = read_csv(path);
  if (csv.header.size() != 5 || csv.header[0] != "episode")
    throw DataError("unrecognized episode log header: " + path);
  std::vector<EpisodeStats> out;
  for (const auto& row : csv.rows) {
    if (row.size() != 5) throw DataError("ragged row in episode log: " + path);
    EpisodeStats s;
    s.episode = static_cast<int>(parse_double(row[0], path));
    s.steps = static_cast<int>(parse_double(row[1], path));
    s.mean_reward = parse_double(row[2], path);
    s.final_reward = parse_double(row[3], path);
    s.rho_mean = parse_double(row[4], path);
    out.push_back(s);
  }
  return out;
}

}  // namespace dmca::agent
