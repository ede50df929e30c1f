#ifndef DMCA_ENV_USERS_HPP
#define DMCA_ENV_USERS_HPP

#include <cstdint>

#include "dmca/env/channel.hpp"

namespace dmca::env {

// Delay sensitivity in (0,1): near 0 when the latency budget leaves slack,
// near 1 when the experienced delay overshoots it. Both delays in seconds.
double delay_sensitivity(double delay_limit_s, double delay_real_s);

// Personalized rate requirement: scales a base rate by the user's sensitivity
// and a floor factor beta in (0,1].
double ppqos_rate(double sensitivity, double beta, double base_rate);

enum class StreamingMode { kLive, kBuffered };

struct UserProfile {
  std::uint64_t key = 0;      // identity for the requirement stream
  double sensitivity = 0.5;   // lambda in (0,1)
  double beta = 0.5;
  bool virtual_user = false;
  double cache_capacity_bits = 0.0;  // buffered mode only
  double cache_fill_bits = 0.0;
};

// Produces base rate requirements that hold for a fixed number of slots and
// then redraw. Requirements are a deterministic function of (seed, user key,
// slot), so any slot can be queried in any order.
class RequirementGenerator {
 public:
  RequirementGenerator(const ChannelConfig& cfg, double rho, int hold_slots,
                       double xi_min, double xi_max, std::uint64_t seed);

  double demand_gain(std::uint64_t user_key, int slot) const;  // |xi|
  double base_rate(std::uint64_t user_key, int slot) const;    // bits/s
  int hold_slots() const { return hold_slots_; }

 private:
  ChannelConfig cfg_;
  double rho_;
  int hold_slots_;
  double xi_min_;
  double xi_max_;
  std::uint64_t seed_;
};

// Deterministic counter-style draw in [0,1), independent for each (seed, key,
// counter) triple.
double hashed_uniform(std::uint64_t seed, std::uint64_t key, std::uint64_t counter);

}  // namespace dmca::env

#endif
