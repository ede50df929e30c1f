#ifndef DMCA_ENV_ENVIRONMENT_HPP
#define DMCA_ENV_ENVIRONMENT_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "dmca/env/channel.hpp"
#include "dmca/env/prediction.hpp"
#include "dmca/env/users.hpp"

namespace dmca::env {

// Observation vector: M current channel rates, K effective requirement rates,
// then l blocks of M predicted channel rates (look-ahead 1..l).
struct SystemState {
  Eigen::VectorXd values;
  int channels = 0;
  int user_slots = 0;
  int horizon = 0;

  static int dim(int channels, int user_slots, int horizon) {
    return channels + user_slots + horizon * channels;
  }
  double channel_rate(int m) const { return values[m]; }
  double requirement(int k) const { return values[channels + k]; }
  double predicted_rate(int step, int m) const {
    return values[channels + user_slots + (step - 1) * channels + m];
  }
};

struct Decision {
  std::vector<int> channels;  // one index per user slot
  bool collision() const;     // any two slots on the same channel
};

// Maps squashed actor outputs in [0,1] to channel indices floor(raw*M),
// clamped to M-1.
Decision decode_action(const Eigen::VectorXd& raw, int channels);

struct EnvConfig {
  ChannelConfig channel;
  int user_slots = 1;  // K, decision vector length
  int real_users = 1;  // N <= K; the rest are virtual (zero requirement)
  StreamingMode mode = StreamingMode::kLive;
  double beta = 0.5;
  std::vector<double> sensitivities;  // lambda per real user
  double req_rho = 0.9;
  int req_hold_slots = 5;
  double req_xi_min = 0.1;
  double req_xi_max = 1.2;
  int horizon = 0;          // l, predicted blocks in the state
  double cache_slots = 50.0;  // buffered-mode capacity in mean-requirement slots
  std::uint64_t seed = 1;

  void validate() const;
};

struct StepOutcome {
  std::vector<double> rates;         // chosen-channel rate at the execution slot
  std::vector<double> requirements;  // effective requirement at the execution slot
  std::vector<double> deltas;        // rate - requirement, per user slot
  std::vector<bool> kept;            // not a collision loser
  std::vector<bool> served;          // delta >= 0 and kept
  bool collision = false;            // any duplicate across all user slots
  double satisfied_fraction = 0.0;   // served real users / real users
  int exec_slot = 0;
};

// The simulated system: holds the channel trace, the user population with
// their requirement streams, and (for buffered streaming) cache fill levels
// with disconnect-and-replace dynamics.
class Environment {
 public:
  Environment(EnvConfig cfg, ChannelTrace trace);

  void reset();
  int slots() const { return trace_.slots(); }
  int channels() const { return cfg_.channel.channels; }
  int user_slots() const { return cfg_.user_slots; }
  int real_users() const { return cfg_.real_users; }
  int horizon() const { return cfg_.horizon; }
  int state_dim() const {
    return SystemState::dim(channels(), user_slots(), horizon());
  }
  const EnvConfig& config() const { return cfg_; }
  const ChannelTrace& trace() const { return trace_; }
  const std::vector<UserProfile>& users() const { return users_; }
  const RequirementGenerator& requirements() const { return reqgen_; }

  double gain(int slot, int channel) const;
  double rate(int slot, int channel) const;
  // Effective per-slot requirement of a user slot; zero for virtual users.
  double requirement(int slot, int k) const;

  void set_prediction_source(const PredictionSource* source);
  const PredictionSource* prediction_source() const { return source_; }

  SystemState state(int slot) const;
  // State at slot+1 with the current-rate block replaced by the rates implied
  // by the predictions made at `slot`. Needs a prediction source.
  SystemState predicted_next_state(int slot) const;

  // Evaluates a decision made at `slot` against slot+lag ground truth and
  // advances buffered-mode caches.
  StepOutcome step(int slot, const Decision& decision, int lag);

 private:
  void rebuild_users();
  UserProfile make_user(int k, std::uint64_t key, double sensitivity) const;

  EnvConfig cfg_;
  ChannelTrace trace_;
  RequirementGenerator reqgen_;
  std::vector<UserProfile> users_;
  const PredictionSource* source_ = nullptr;
  std::uint64_t replacements_ = 0;
};

}  // namespace dmca::env

#endif
