#ifndef DMCA_BASELINES_POLICIES_HPP
#define DMCA_BASELINES_POLICIES_HPP

#include <random>
#include <vector>

#include "dmca/env/environment.hpp"

namespace dmca::baselines {

// Secondary objective once the served-user count is maximal.
enum class Criterion {
  kMinAbsGap,  // tightest fit: minimize sum |rate - requirement|
  kMaxGap,     // largest surplus: maximize sum (rate - requirement)
};

// Uniform distinct channel pick, one per user slot.
env::Decision random_policy(int channels, int user_slots, std::mt19937_64& rng);

// Optimal assignment of real users to channels: first maximize the number of
// satisfied users, then apply the criterion, then take the lexicographically
// smallest decision among exact ties. Direct enumeration up to 10 channels,
// a cost-matrix assignment solver beyond (exact ties there fall to the
// solver's deterministic choice rather than the lexicographic rule).
env::Decision exhaustive_policy(const std::vector<double>& rates,
                                const std::vector<double>& requirements,
                                Criterion criterion);

// Pads a real-user assignment to the full decision width using the smallest
// unused channels, keeping the vector collision-free.
env::Decision extend_decision(const env::Decision& real_part, int user_slots,
                              int channels);

// Minimum-cost injective assignment of rows to columns (rows <= columns);
// returns the chosen column per row.
std::vector<int> solve_assignment(const std::vector<std::vector<double>>& cost);

}  // namespace dmca::baselines

#endif
