#include "dmca/baselines/schedule.hpp"

#include <memory>

#include "dmca/util/errors.hpp"

namespace dmca::baselines {

metrics::Trajectory run_schedule(env::Environment& e, const ScheduleConfig& sc,
                                 const DecisionFn& decide) {
  if (sc.slots < 1) throw ConfigError("schedule needs at least one slot");
  if (sc.period < 1) throw ConfigError("decision period must be positive");
  if (sc.lag < 0) throw ConfigError("decision lag cannot be negative");
  if (sc.start - sc.lag < 0)
    throw ConfigError("schedule starts too early for the decision lag");
  if (sc.start + sc.slots > e.slots())
    throw DataError("schedule runs past the channel trace");

  metrics::Trajectory traj;
  traj.real_users = e.real_users();
  traj.slots.reserve(sc.slots);

  env::Decision decision;
  int current_anchor = -1;
  const bool live = e.config().mode == env::StreamingMode::kLive;
  for (int idx = 0; idx < sc.slots; ++idx) {
    const int exec = sc.start + idx;
    const int anchor = sc.start - sc.lag + (idx / sc.period) * sc.period;
    if (anchor != current_anchor) {
      decision = decide(e.state(anchor), anchor);
      current_anchor = anchor;
    }
    const env::StepOutcome out = e.step(anchor, decision, exec - anchor);

    metrics::SlotRecord rec;
    rec.slot = exec;
    rec.decision = decision.channels;
    rec.rates = out.rates;
    rec.requirements = out.requirements;
    rec.deltas = out.deltas;
    rec.kept = out.kept;
    rec.served = out.served;
    rec.theta = out.satisfied_fraction;
    rec.collision = out.collision;
    const double base = live ? reward::lsm_reward(out.deltas, rec.theta, sc.reward)
                             : reward::bsm_reward(out.deltas, rec.theta, sc.reward);
    rec.reward = reward::final_reward(out.collision, base, sc.reward);
    rec.performance = 0.0;
    for (int k = 0; k < e.real_users(); ++k)
      if (out.served[k]) rec.performance += out.rates[k];
    traj.slots.push_back(std::move(rec));
  }
  return traj;
}

DecisionFn make_random_fn(int channels, int user_slots, std::uint64_t seed) {
  auto rng = std::make_shared<std::mt19937_64>(seed);
  return [channels, user_slots, rng](const env::SystemState&, int) {
    return random_policy(channels, user_slots, *rng);
  };
}

DecisionFn make_exhaustive_fn(const env::Environment& e, Criterion criterion) {
  const int M = e.channels();
  const int K = e.user_slots();
  const int N = e.real_users();
  return [M, K, N, criterion](const env::SystemState& s, int) {
    std::vector<double> rates(M), reqs(N);
    for (int m = 0; m < M; ++m) rates[m] = s.channel_rate(m);
    for (int n = 0; n < N; ++n) reqs[n] = s.requirement(n);
    return extend_decision(exhaustive_policy(rates, reqs, criterion), K, M);
  };
}

}  // namespace dmca::baselines
