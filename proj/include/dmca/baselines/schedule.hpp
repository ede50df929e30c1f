#ifndef DMCA_BASELINES_SCHEDULE_HPP
#define DMCA_BASELINES_SCHEDULE_HPP

#include <cstdint>
#include <functional>

#include "dmca/baselines/policies.hpp"
#include "dmca/env/environment.hpp"
#include "dmca/metrics/metrics.hpp"
#include "dmca/reward/reward.hpp"

namespace dmca::baselines {

// Produces the decision to apply from the observation at the deciding slot.
using DecisionFn =
    std::function<env::Decision(const env::SystemState&, int decide_slot)>;

struct ScheduleConfig {
  int start = 0;   // first execution slot
  int slots = 0;   // number of execution slots
  int period = 1;  // a decision is held this many slots before refreshing
  int lag = 0;     // fresh decisions are this many slots stale
  reward::RewardParams reward;
};

// Walks execution slots [start, start+slots): every `period` slots a new
// decision is taken from the state `lag` slots earlier, then held (so its
// staleness grows to lag+period-1). Returns the executed trajectory.
metrics::Trajectory run_schedule(env::Environment& e, const ScheduleConfig& sc,
                                 const DecisionFn& decide);

DecisionFn make_random_fn(int channels, int user_slots, std::uint64_t seed);
// Optimal assignment from the observed (possibly stale) rates and real-user
// requirements; virtual slots get the smallest unused channels.
DecisionFn make_exhaustive_fn(const env::Environment& e, Criterion criterion);

}  // namespace dmca::baselines

#endif
