#ifndef DMCA_REWARD_REWARD_HPP
#define DMCA_REWARD_REWARD_HPP

#include <vector>

namespace dmca::reward {

struct RewardParams {
  double w1 = 5.0;      // outer scale
  double w2 = 5.0;      // inner scale
  double w3 = -100.0;   // collision penalty
  double alpha1 = 0.5;  // buffered-mode outer factor
  double alpha2 = 0.5;  // buffered-mode inner factor
  double eps = 1e-7;    // divisor guard on the failure branch

  void validate() const;
};

// Inverse cotangent on the branch with range (0, pi).
double arccot(double x);

// Live streaming: with every user satisfied the reward falls as the total
// surplus grows (push rates toward the requirements); otherwise failures are
// amplified by 1/(theta+eps) and the whole term scales by theta.
double lsm_reward(const std::vector<double>& deltas, double theta,
                  const RewardParams& p);

// Buffered streaming: with every user satisfied the reward grows with the
// total surplus (fill caches fast); otherwise as for live streaming but with
// an exponential shape. The outer exponent is capped at 50 to keep the value
// finite; the cap preserves ordering.
double bsm_reward(const std::vector<double>& deltas, double theta,
                  const RewardParams& p);

// Any duplicate channel assignment overrides the shaped reward with the
// penalty w3.
double final_reward(bool collision, double r, const RewardParams& p);

}  // namespace dmca::reward

#endif
