#include "dmca/harness/config.hpp"

#include <algorithm>

#include "dmca/env/users.hpp"
#include "dmca/util/errors.hpp"
#include "dmca/util/hash.hpp"

namespace dmca::harness {

void ExperimentConfig::validate() const {
  env.validate();
  cpm.validate();
  agent.validate();
  reward.validate();
  if (trace.slots < 2) throw ConfigError("trace must span at least two slots");
  if (!(trace.sample_rate_hz > 0.0))
    throw ConfigError("trace sample rate must be positive");
  if (pretrain_slots < cpm.time_step + 2)
    throw ConfigError("pretraining span is too short for the predictor");
  if (run.eval_slots < 1) throw ConfigError("evaluation span must be positive");
  if (run.stability_window < 1)
    throw ConfigError("stability window must be positive");
  for (int lag : run.lags)
    if (lag < 0) throw ConfigError("lags cannot be negative");
  if (run.eval_period < 1) throw ConfigError("decision period must be positive");
  if (run.eval_lag < 0) throw ConfigError("evaluation lag cannot be negative");
  if (run.eval_method != "learning" && run.eval_method != "exhaustive" &&
      run.eval_method != "random")
    throw ConfigError("unknown evaluation method: " + run.eval_method);
  if (run.converge_seeds.empty())
    throw ConfigError("convergence study needs at least one seed");
}

ExperimentConfig config_from_ini(const IniFile& ini) {
  ExperimentConfig c;

  env::ChannelConfig& ch = c.env.channel;
  ch.channels = ini.get_int("channel", "channels", 8);
  ch.bandwidth_hz = ini.get_double("channel", "bandwidth_hz", 8.0);
  if (ini.has("channel", "power_dbm"))
    ch.power_mw = env::dbm_to_mw(ini.get_double("channel", "power_dbm", 0.0));
  else
    ch.power_mw = ini.get_double("channel", "power_mw", 80.0);
  if (ini.has("channel", "noise_dbm"))
    ch.noise_mw = env::dbm_to_mw(ini.get_double("channel", "noise_dbm", 0.0));
  else
    ch.noise_mw = ini.get_double("channel", "noise_mw", 1.0);

  const std::string kind = ini.get("trace", "kind", "sinusoid");
  if (kind == "sinusoid") c.trace.kind = TraceKind::kSinusoid;
  else if (kind == "ar") c.trace.kind = TraceKind::kAr;
  else if (kind == "file") c.trace.kind = TraceKind::kFile;
  else throw ConfigError("unknown trace kind: " + kind);
  c.trace.file = ini.get("trace", "file", "trace.csv");
  c.trace.slots = ini.get_int("trace", "slots", 4000);
  c.trace.sample_rate_hz = ini.get_double("trace", "sample_rate_hz", 20000.0);
  c.trace.carrier_hz = ini.get_double("trace", "carrier_hz", 3.5e9);
  c.trace.speed_kmh = ini.get_double("trace", "speed_kmh", 90.0);
  c.trace.sinusoid.paths = ini.get_int("trace", "paths", 8);
  c.trace.sinusoid.amplitude = ini.get_double("trace", "amplitude", 1.0);
  c.trace.sinusoid.noise_std = ini.get_double("trace", "noise_std", 0.0);
  c.trace.ar.phi = ini.get_double("trace", "ar_phi", 0.9);
  c.trace.ar.noise_std = ini.get_double("trace", "ar_noise_std", 0.2);
  c.trace.ar.mean = ini.get_double("trace", "ar_mean", 1.0);

  c.env.user_slots = ini.get_int("env", "user_slots", 3);
  c.env.real_users = ini.get_int("env", "real_users", 2);
  const std::string mode = ini.get("env", "mode", "live");
  if (mode == "live") c.env.mode = env::StreamingMode::kLive;
  else if (mode == "buffered") c.env.mode = env::StreamingMode::kBuffered;
  else throw ConfigError("unknown streaming mode: " + mode);
  c.env.beta = ini.get_double("env", "beta", 0.5);
  if (ini.has("env", "sensitivities")) {
    c.env.sensitivities = ini.get_list("env", "sensitivities", {});
  } else if (ini.has("env", "delay_limits_s")) {
    // Derive the sensitivities from per-user latency budgets against the
    // common experienced delay.
    const auto limits = ini.get_list("env", "delay_limits_s", {});
    const double real = ini.get_double("env", "delay_real_s", 0.0);
    for (double lim : limits)
      c.env.sensitivities.push_back(env::delay_sensitivity(lim, real));
  } else {
    c.env.sensitivities = {0.9, 0.7};
  }
  c.env.req_rho = ini.get_double("env", "req_rho", 0.9);
  c.env.req_hold_slots = ini.get_int("env", "req_hold_slots", 5);
  c.env.req_xi_min = ini.get_double("env", "req_xi_min", 0.3);
  c.env.req_xi_max = ini.get_double("env", "req_xi_max", 1.1);
  c.env.cache_slots = ini.get_double("env", "cache_slots", 50.0);

  c.cpm.time_step = ini.get_int("cpm", "time_step", 5);
  c.cpm.units = ini.get_int("cpm", "units", 5);
  c.cpm.il_window = ini.get_int("cpm", "il_window", 200);
  c.cpm.learning_rate = ini.get_double("cpm", "learning_rate", 0.06);
  c.cpm.pretrain_iterations = ini.get_int("cpm", "pretrain_iterations", 200);
  c.cpm.il_iterations = ini.get_int("cpm", "il_iterations", 1);
  c.cpm.train_fraction = ini.get_double("cpm", "train_fraction", 0.75);
  c.cpm.confidence_window = ini.get_int("cpm", "confidence_window", 50);
  c.cpm.confidence_max = ini.get_double("cpm", "confidence_max", 0.95);
  c.cpm.confidence_default = ini.get_double("cpm", "confidence_default", 0.5);
  c.pretrain_slots = ini.get_int("cpm", "pretrain_slots", 2000);
  c.prediction_enabled = ini.get_bool("cpm", "enabled", true);

  agent::AgentHyperParams& a = c.agent;
  a.discount = ini.get_double("agent", "discount", 0.92);
  a.tau_soft = ini.get_double("agent", "tau_soft", 0.01);
  a.replay_capacity = ini.get_int("agent", "replay_capacity", 2000);
  a.critic_batch = ini.get_int("agent", "critic_batch", 32);
  a.minibatch = ini.get_int("agent", "minibatch", 64);
  a.episodes = ini.get_int("agent", "episodes", 300);
  a.max_steps = ini.get_int("agent", "max_steps", 3000);
  a.horizon = ini.get_int("agent", "horizon", 5);
  a.actor_lr = ini.get_double("agent", "actor_lr", 1e-4);
  a.critic_lr = ini.get_double("agent", "critic_lr", 1e-3);
  a.hidden = ini.get_int("agent", "hidden", 128);
  a.grad_clip = ini.get_double("agent", "grad_clip", 5.0);
  a.ou_theta = ini.get_double("agent", "ou_theta", 0.15);
  a.ou_sigma = ini.get_double("agent", "ou_sigma", 0.2);
  a.ou_mu = ini.get_double("agent", "ou_mu", 0.0);
  a.discount_predicted = ini.get_bool("agent", "discount_predicted", false);
  a.stop_reward = ini.get_double("agent", "stop_reward", 1.0);
  a.stop_consecutive = ini.get_int("agent", "stop_consecutive", 5);
  a.min_episode_steps = ini.get_int("agent", "min_episode_steps", a.horizon);
  a.train_lag = ini.get_int("agent", "train_lag", 0);

  // The state horizon and the predictor length follow the agent's decision
  // length.
  c.env.horizon = a.horizon;
  c.cpm.horizon = std::max(1, a.horizon);

  reward::RewardParams& r = c.reward;
  r.w1 = ini.get_double("reward", "w1", 5.0);
  r.w2 = ini.get_double("reward", "w2", 5.0);
  r.w3 = ini.get_double("reward", "w3", -100.0);
  r.alpha1 = ini.get_double("reward", "alpha1", 0.5);
  r.alpha2 = ini.get_double("reward", "alpha2", 0.5);
  r.eps = ini.get_double("reward", "eps", 1e-7);

  RunSettings& run = c.run;
  run.seed = static_cast<std::uint64_t>(ini.get_double("run", "seed", 1));
  run.out_dir = ini.get("run", "out_dir", "out");
  run.eval_slots = ini.get_int("run", "eval_slots", 2000);
  run.stability_window = ini.get_int("run", "stability_window", std::max(1, a.horizon));
  {
    const auto lag_list = ini.get_list("run", "lags", {0.0, 1.0});
    run.lags.clear();
    for (double v : lag_list) run.lags.push_back(static_cast<int>(v));
  }
  run.eval_method = ini.get("run", "eval_method", "learning");
  run.eval_period = ini.get_int("run", "eval_period", 1);
  run.eval_lag = ini.get_int("run", "eval_lag", 0);
  run.converge_speeds = ini.get_list("run", "converge_speeds", {90.0, 450.0});
  run.converge_lrs = ini.get_list("run", "converge_lrs", {1e-4, 1e-3});
  {
    const auto seeds = ini.get_list("run", "converge_seeds", {1.0, 2.0, 3.0});
    run.converge_seeds.clear();
    for (double v : seeds)
      run.converge_seeds.push_back(static_cast<std::uint64_t>(v));
  }

  c.env.seed = run.seed;
  c.fingerprint = hex64(fnv1a64(ini.text()));
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  return config_from_ini(IniFile::parse_file(path));
}

}  // namespace dmca::harness
