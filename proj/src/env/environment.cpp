#include "dmca/env/environment.hpp"

#include <algorithm>
#include <cmath>

#include "dmca/util/errors.hpp"

namespace dmca::env {

bool Decision::collision() const {
  for (std::size_t i = 0; i < channels.size(); ++i)
    for (std::size_t j = i + 1; j < channels.size(); ++j)
      if (channels[i] == channels[j]) return true;
  return false;
}

Decision decode_action(const Eigen::VectorXd& raw, int channels) {
  if (channels < 1) throw ConfigError("channel count must be positive");
  Decision d;
  d.channels.resize(raw.size());
  for (int k = 0; k < raw.size(); ++k) {
    const double v = raw[k];
    if (!(v >= 0.0) || !(v <= 1.0))
      throw StateError("action component outside the unit interval");
    d.channels[k] = std::min(static_cast<int>(v * channels), channels - 1);
  }
  return d;
}

void EnvConfig::validate() const {
  channel.validate();
  if (user_slots < 1) throw ConfigError("user slot count must be positive");
  if (real_users < 1 || real_users > user_slots)
    throw ConfigError("real user count must lie in [1, user_slots]");
  if (user_slots > channel.channels)
    throw ConfigError("more user slots than channels");
  if (static_cast<int>(sensitivities.size()) != real_users)
    throw ConfigError("need one sensitivity per real user");
  for (double s : sensitivities)
    if (!(s > 0.0) || !(s < 1.0))
      throw ConfigError("sensitivities must lie in (0,1)");
  if (!(beta >= 0.0) || !(beta > 0.0) || !(beta <= 1.0))
    throw ConfigError("beta must lie in (0,1]");
  if (horizon < 0) throw ConfigError("prediction horizon cannot be negative");
  if (!(cache_slots > 0.0)) throw ConfigError("cache size must be positive");
}

Environment::Environment(EnvConfig cfg, ChannelTrace trace)
    : cfg_(std::move(cfg)),
      trace_(std::move(trace)),
      reqgen_(cfg_.channel, cfg_.req_rho, cfg_.req_hold_slots, cfg_.req_xi_min,
              cfg_.req_xi_max, cfg_.seed) {
  cfg_.validate();
  trace_.validate();
  if (trace_.channels() != cfg_.channel.channels)
    throw DataError("trace channel count does not match the configuration");
  rebuild_users();
}

UserProfile Environment::make_user(int k, std::uint64_t key,
                                   double sensitivity) const {
  UserProfile u;
  u.key = key;
  u.sensitivity = sensitivity;
  u.beta = cfg_.beta;
  u.virtual_user = k >= cfg_.real_users;
  if (cfg_.mode == StreamingMode::kBuffered && !u.virtual_user) {
    const double xi_mid = 0.5 * (cfg_.req_xi_min + cfg_.req_xi_max);
    const double snr =
        xi_mid * xi_mid * cfg_.channel.channel_power_mw() / cfg_.channel.noise_mw;
    const double mean_base =
        cfg_.req_rho * cfg_.channel.channel_bandwidth_hz() * std::log2(1.0 + snr);
    const double mean_req = ppqos_rate(sensitivity, cfg_.beta, mean_base);
    u.cache_capacity_bits = cfg_.cache_slots * mean_req * trace_.slot_seconds();
    u.cache_fill_bits = 0.0;
  }
  return u;
}

void Environment::rebuild_users() {
  users_.clear();
  users_.reserve(cfg_.user_slots);
  for (int k = 0; k < cfg_.user_slots; ++k) {
    const double lam = k < cfg_.real_users ? cfg_.sensitivities[k] : 0.5;
    users_.push_back(make_user(k, static_cast<std::uint64_t>(k) + 1, lam));
  }
  replacements_ = 0;
}

void Environment::reset() { rebuild_users(); }

double Environment::gain(int slot, int channel) const {
  if (slot < 0 || slot >= trace_.slots())
    throw DataError("slot outside the channel trace");
  if (channel < 0 || channel >= channels())
    throw StateError("channel index out of range");
  return trace_.gains(slot, channel);
}

double Environment::rate(int slot, int channel) const {
  return channel_rate(gain(slot, channel), cfg_.channel);
}

double Environment::requirement(int slot, int k) const {
  if (k < 0 || k >= cfg_.user_slots) throw StateError("user slot out of range");
  const UserProfile& u = users_[k];
  if (u.virtual_user) return 0.0;
  const double base = reqgen_.base_rate(u.key, slot);
  return ppqos_rate(u.sensitivity, u.beta, base);
}

void Environment::set_prediction_source(const PredictionSource* source) {
  if (source && source->horizon() < cfg_.horizon)
    throw ConfigError("prediction source is shorter than the state horizon");
  source_ = source;
}

SystemState Environment::state(int slot) const {
  if (slot < 0 || slot >= trace_.slots())
    throw DataError("slot outside the channel trace");
  SystemState s;
  s.channels = channels();
  s.user_slots = user_slots();
  s.horizon = cfg_.horizon;
  s.values.resize(state_dim());
  for (int m = 0; m < channels(); ++m) s.values[m] = rate(slot, m);
  for (int k = 0; k < user_slots(); ++k)
    s.values[channels() + k] = requirement(slot, k);
  const int base = channels() + user_slots();
  for (int h = 1; h <= cfg_.horizon; ++h) {
    for (int m = 0; m < channels(); ++m) {
      const double g = source_ ? source_->predicted_gain(slot, h, m) : 0.0;
      s.values[base + (h - 1) * channels() + m] =
          channel_rate(std::max(0.0, g), cfg_.channel);
    }
  }
  if (!s.values.allFinite()) throw StateError("non-finite state entries");
  return s;
}

SystemState Environment::predicted_next_state(int slot) const {
  if (!source_) throw StateError("no prediction source attached");
  if (slot + 1 >= trace_.slots())
    throw DataError("predicted next state would leave the trace");
  SystemState s = state(slot + 1);
  for (int m = 0; m < channels(); ++m) {
    const double g = std::max(0.0, source_->predicted_gain(slot, 1, m));
    s.values[m] = channel_rate(g, cfg_.channel);
  }
  return s;
}

StepOutcome Environment::step(int slot, const Decision& decision, int lag) {
  if (lag < 0) throw ConfigError("decision lag cannot be negative");
  const int exec = slot + lag;
  if (slot < 0 || exec >= trace_.slots())
    throw DataError("decision executes outside the channel trace");
  if (static_cast<int>(decision.channels.size()) != cfg_.user_slots)
    throw StateError("decision length does not match the user slots");

  const int K = cfg_.user_slots;
  StepOutcome out;
  out.exec_slot = exec;
  out.rates.resize(K);
  out.requirements.resize(K);
  out.deltas.resize(K);
  out.kept.assign(K, true);
  out.served.assign(K, false);

  for (int k = 0; k < K; ++k) {
    const int ch = decision.channels[k];
    if (ch < 0 || ch >= channels())
      throw StateError("decision uses an out-of-range channel index");
    out.rates[k] = rate(exec, ch);
    out.requirements[k] = requirement(exec, k);
    out.deltas[k] = out.rates[k] - out.requirements[k];
  }
  out.collision = decision.collision();
  // On a contested channel the lowest-indexed user transmits; the rest lose
  // the slot.
  for (int k = 0; k < K; ++k)
    for (int j = 0; j < k; ++j)
      if (decision.channels[j] == decision.channels[k]) out.kept[k] = false;

  int served_real = 0;
  for (int k = 0; k < K; ++k) {
    out.served[k] = out.kept[k] && out.deltas[k] >= 0.0;
    if (out.served[k] && !users_[k].virtual_user) ++served_real;
  }
  out.satisfied_fraction =
      static_cast<double>(served_real) / static_cast<double>(cfg_.real_users);

  if (cfg_.mode == StreamingMode::kBuffered) {
    const double lam_lo =
        *std::min_element(cfg_.sensitivities.begin(), cfg_.sensitivities.end());
    const double lam_hi =
        *std::max_element(cfg_.sensitivities.begin(), cfg_.sensitivities.end());
    for (int k = 0; k < cfg_.real_users; ++k) {
      UserProfile& u = users_[k];
      if (out.kept[k])
        u.cache_fill_bits += out.rates[k] * trace_.slot_seconds();
      if (u.cache_fill_bits > u.cache_capacity_bits) {
        // Content delivered: this user leaves and a fresh one takes the slot.
        ++replacements_;
        const std::uint64_t key =
            0x10000ULL + replacements_ * static_cast<std::uint64_t>(K) + k;
        const double lam =
            lam_lo + (lam_hi - lam_lo) * hashed_uniform(cfg_.seed, key, 0);
        users_[k] = make_user(k, key, lam);
      }
    }
  }
  return out;
}

}  // namespace dmca::env
