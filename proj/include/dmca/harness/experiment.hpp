#ifndef DMCA_HARNESS_EXPERIMENT_HPP
#define DMCA_HARNESS_EXPERIMENT_HPP

#include <string>
#include <vector>

#include "dmca/baselines/schedule.hpp"
#include "dmca/cpm/table.hpp"
#include "dmca/harness/config.hpp"
#include "dmca/metrics/metrics.hpp"

namespace dmca::harness {

// Resolved artifact locations inside the output directory.
struct Paths {
  std::string out;
  std::string trace() const;
  std::string agent() const;
  std::string cpm_checkpoint(int channel) const;
  std::string in_out(const std::string& name) const;
};

struct MetricsRow {
  std::string method;
  std::string mode;  // one-slot or l-slot cadence
  int lag = 0;
  double kappa = 0.0;
  double mean_bias = 0.0;
  double sta_raw = 0.0;
  double sta_norm = 0.0;
  double mean_throughput = 0.0;
};

// Scores a trajectory; the normalized stability is filled in later, across
// the rows being compared.
MetricsRow score_trajectory(const metrics::Trajectory& traj,
                            const std::string& method, const std::string& mode,
                            int lag, int stability_window);
void write_metrics_table(const std::string& path, std::vector<MetricsRow> rows,
                         const std::vector<std::string>& comments);

env::ChannelTrace generate_trace(const ExperimentConfig& cfg, double speed_kmh,
                                 std::uint64_t seed);
env::ChannelTrace load_trace_checked(const ExperimentConfig& cfg, const Paths& p);

// Evaluation window: the trailing eval_slots of the trace, clipped so that
// predictions exist and lagged decisions stay inside the trace.
struct Span {
  int start = 0;
  int slots = 0;
};
Span eval_span(const ExperimentConfig& cfg, int trace_slots, int max_lag);

int cmd_gen_trace(const ExperimentConfig& cfg, const Paths& p);
int cmd_pretrain(const ExperimentConfig& cfg, const Paths& p);
int cmd_train(const ExperimentConfig& cfg, const Paths& p);
int cmd_eval(const ExperimentConfig& cfg, const Paths& p);
int cmd_compare(const ExperimentConfig& cfg, const Paths& p);
int cmd_converge(const ExperimentConfig& cfg, const Paths& p);

// First episode index opening a run of `consecutive` episodes whose length
// stayed within `step_floor`; episodes.size()+1 when that never happens.
int convergence_episode(const std::vector<agent::EpisodeStats>& episodes,
                        int step_floor, int consecutive = 10);

}  // namespace dmca::harness

#endif
