#include "dmca/env/users.hpp"

#include <cmath>
#include <numbers>

#include "dmca/util/errors.hpp"

namespace dmca::env {

double delay_sensitivity(double delay_limit_s, double delay_real_s) {
  return 0.5 - std::atan(delay_limit_s - delay_real_s) / std::numbers::pi;
}

double ppqos_rate(double sensitivity, double beta, double base_rate) {
  return (2.0 * sensitivity + beta * (1.0 - 2.0 * sensitivity)) * base_rate;
}

namespace {

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

double hashed_uniform(std::uint64_t seed, std::uint64_t key, std::uint64_t counter) {
  const std::uint64_t h = splitmix(splitmix(seed ^ splitmix(key)) ^ counter);
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

RequirementGenerator::RequirementGenerator(const ChannelConfig& cfg, double rho,
                                           int hold_slots, double xi_min,
                                           double xi_max, std::uint64_t seed)
    : cfg_(cfg), rho_(rho), hold_slots_(hold_slots), xi_min_(xi_min),
      xi_max_(xi_max), seed_(seed) {
  cfg_.validate();
  if (!(rho_ > 0.0)) throw ConfigError("requirement scale rho must be positive");
  if (hold_slots_ < 1) throw ConfigError("requirement hold length must be positive");
  if (!(xi_min_ >= 0.0) || !(xi_max_ >= xi_min_))
    throw ConfigError("demand gain range is invalid");
}

double RequirementGenerator::demand_gain(std::uint64_t user_key, int slot) const {
  if (slot < 0) throw StateError("requirement queried before the trace start");
  const std::uint64_t period = static_cast<std::uint64_t>(slot / hold_slots_);
  const double u = hashed_uniform(seed_, user_key, period);
  return xi_min_ + (xi_max_ - xi_min_) * u;
}

double RequirementGenerator::base_rate(std::uint64_t user_key, int slot) const {
  const double xi = demand_gain(user_key, slot);
  const double snr = xi * xi * cfg_.channel_power_mw() / cfg_.noise_mw;
  return rho_ * cfg_.channel_bandwidth_hz() * std::log2(1.0 + snr);
}

}  // namespace dmca::env
