#include "dmca/reward/reward.hpp"

#include <cmath>
#include <numbers>

#include "dmca/util/errors.hpp"

namespace dmca::reward {

namespace {
constexpr double kMaxExponent = 50.0;

void check_inputs(const std::vector<double>& deltas, double theta,
                  const RewardParams& p) {
  p.validate();
  if (!(theta >= 0.0) || !(theta <= 1.0))
    throw StateError("satisfaction fraction outside [0,1]");
  for (double d : deltas)
    if (!std::isfinite(d)) throw StateError("non-finite rate difference");
}
}  // namespace

void RewardParams::validate() const {
  if (!(w1 > 0.0) || !(w2 > 0.0)) throw ConfigError("reward weights must be positive");
  if (!(w3 < 0.0)) throw ConfigError("collision penalty must be negative");
  if (!(alpha1 > 0.0) || !(alpha2 > 0.0))
    throw ConfigError("reward exponents must be positive");
  if (!(eps > 0.0)) throw ConfigError("reward guard must be positive");
}

double arccot(double x) { return std::numbers::pi / 2.0 - std::atan(x); }

double lsm_reward(const std::vector<double>& deltas, double theta,
                  const RewardParams& p) {
  check_inputs(deltas, theta, p);
  if (theta == 1.0) {
    double sum = 0.0;
    for (double d : deltas) sum += std::atan(d);
    return p.w1 * arccot(p.w2 * sum);
  }
  double sum = 0.0;
  for (double d : deltas) {
    const double div = d >= 0.0 ? 1.0 : theta + p.eps;
    sum += std::atan(std::abs(d) / div);
  }
  return theta * p.w1 * arccot(p.w2 * sum);
}

double bsm_reward(const std::vector<double>& deltas, double theta,
                  const RewardParams& p) {
  check_inputs(deltas, theta, p);
  if (theta == 1.0) {
    double sum = 0.0;
    for (double d : deltas) sum += std::atan(d);
    return p.w1 * std::expm1(std::min(p.alpha1 * p.w2 * sum, kMaxExponent));
  }
  double sum = 0.0;
  for (double d : deltas) {
    const double div = d >= 0.0 ? 1.0 : theta + p.eps;
    sum += d / div;
  }
  const double inner = std::exp(std::min(
      p.alpha2 * sum, std::log(kMaxExponent / (p.alpha1 * p.w2))));
  return theta * p.w1 * std::expm1(p.alpha1 * p.w2 * inner);
}

double final_reward(bool collision, double r, const RewardParams& p) {
  p.validate();
  return collision ? p.w3 : r;
}

}  // namespace dmca::reward
