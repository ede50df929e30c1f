#ifndef DMCA_METRICS_METRICS_HPP
#define DMCA_METRICS_METRICS_HPP

#include <string>
#include <vector>

namespace dmca::metrics {

struct SlotRecord {
  int slot = 0;
  std::vector<int> decision;
  std::vector<double> rates;         // chosen-channel rate per user slot
  std::vector<double> requirements;  // effective requirement per user slot
  std::vector<double> deltas;        // rate - requirement
  std::vector<bool> kept;            // not a collision loser
  std::vector<bool> served;          // delta >= 0 and kept
  double theta = 0.0;                // served real users / real users
  double reward = 0.0;
  bool collision = false;
  double performance = 0.0;  // delivered throughput over served real users
};

struct Trajectory {
  int real_users = 0;
  std::vector<SlotRecord> slots;

  void validate() const;  // contiguous slots, consistent vector lengths
  std::vector<double> theta_series() const;
  std::vector<double> performance_series() const;
};

// Fraction of real users with a nonnegative rate gap; pass the kept flags to
// count collision losers as failures.
double service_success_rate(const std::vector<double>& real_deltas,
                            const std::vector<bool>* kept = nullptr);

// Fraction of slots where every real user was satisfied (theta exactly 1).
double service_arrival_rate(const std::vector<double>& theta_series);

// Relative performance loss caused by executing a stale decision. Undefined
// when the lagged performance is zero; returns quiet NaN as the sentinel.
double non_instant_decision_error(double perf_now, double perf_lagged);
// Mean over slots where both series are defined (non-NaN result).
double mean_decision_error(const std::vector<double>& perf_now,
                           const std::vector<double>& perf_lagged);

struct BiasSummary {
  std::vector<std::vector<double>> per_slot;  // real-user rate gaps, one row per slot
  double mean = 0.0;
  double min = 0.0;
};
BiasSummary ppqos_bias(const Trajectory& traj, int horizon);

struct StabilityParams {
  int window = 10;  // slots per decision-holding window
};

// Strict local maxima/minima over interior points.
int interior_extrema(const std::vector<double>& xs);
// Fluctuation measure: extrema count times unbiased sample variance.
double sequence_fluctuation(const std::vector<double>& xs);

// Stability score: window-boundary switch count, times the number of full
// windows, times the mean per-user fluctuation excess of the delivered-rate
// sequence over the requirement sequence. Trailing partial windows drop.
double service_stability(const Trajectory& traj, const StabilityParams& p);

// Min-max across compared methods; all-equal input maps to all zeros.
std::vector<double> minmax_normalize(const std::vector<double>& values);

void save_trajectory(const std::string& path, const Trajectory& traj,
                     const std::vector<std::string>& extra_comments = {});
Trajectory load_trajectory(const std::string& path);

}  // namespace dmca::metrics

#endif
