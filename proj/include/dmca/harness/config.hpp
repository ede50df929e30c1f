#ifndef DMCA_HARNESS_CONFIG_HPP
#define DMCA_HARNESS_CONFIG_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "dmca/agent/agent.hpp"
#include "dmca/cpm/predictor.hpp"
#include "dmca/env/environment.hpp"
#include "dmca/reward/reward.hpp"
#include "dmca/util/ini.hpp"

namespace dmca::harness {

enum class TraceKind { kSinusoid, kAr, kFile };

struct TraceSettings {
  TraceKind kind = TraceKind::kSinusoid;
  std::string file = "trace.csv";  // written by gen-trace / read when kind=file
  int slots = 4000;
  double sample_rate_hz = 20000.0;
  double carrier_hz = 3.5e9;
  double speed_kmh = 90.0;
  env::SinusoidParams sinusoid;
  env::ArParams ar;
};

struct RunSettings {
  std::uint64_t seed = 1;
  std::string out_dir = "out";
  int eval_slots = 2000;
  int stability_window = 5;   // decision-holding window for the stability score
  std::vector<int> lags = {0, 1};
  std::string eval_method = "learning";  // learning | exhaustive | random
  int eval_period = 1;
  int eval_lag = 0;
  // Convergence study grid.
  std::vector<double> converge_speeds = {90.0, 450.0};
  std::vector<double> converge_lrs = {1e-4, 1e-3};
  std::vector<std::uint64_t> converge_seeds = {1, 2, 3};
};

struct ExperimentConfig {
  env::EnvConfig env;  // includes the channel constants
  TraceSettings trace;
  cpm::CpmConfig cpm;
  int pretrain_slots = 2000;
  bool prediction_enabled = true;
  agent::AgentHyperParams agent;
  reward::RewardParams reward;
  RunSettings run;
  std::string fingerprint;  // hash of the raw config text

  void validate() const;
};

ExperimentConfig load_config(const std::string& path);
ExperimentConfig config_from_ini(const IniFile& ini);

}  // namespace dmca::harness

#endif
