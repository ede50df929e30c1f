#ifndef DMCA_CPM_TABLE_HPP
#define DMCA_CPM_TABLE_HPP

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "dmca/cpm/predictor.hpp"
#include "dmca/env/channel.hpp"
#include "dmca/env/prediction.hpp"

namespace dmca::cpm {

// One predictor per channel, driven over a trace: pretrains on the leading
// slots, then walks the remainder making an l-step prediction every slot and
// an incremental update every l-th slot. All predictions and the confidence
// series are precomputed, so lookups afterwards are pure.
class PredictorBank : public env::PredictionSource {
 public:
  PredictorBank(const CpmConfig& cfg, std::uint64_t seed);

  void build(const env::ChannelTrace& trace, int pretrain_slots);

  int horizon() const override { return cfg_.horizon; }
  // Outside the precomputed span this falls back to the last realized gain.
  double predicted_gain(int slot, int step, int channel) const override;
  double confidence(int slot) const override;

  int start_slot() const { return start_; }
  int end_slot() const { return slots_; }
  const std::vector<PretrainReport>& pretrain_reports() const { return reports_; }
  const std::vector<int>& update_slots() const { return update_slots_; }
  const std::vector<double>& confidence_series() const { return rho_; }
  const std::vector<PredictionRecord>& records(int channel) const;
  Predictor& predictor(int channel);  // state after the full pass

  // Pooled normalized MSE of realized predictions in the precomputed span;
  // channel -1 pools all channels, step 0 pools all look-aheads.
  double nmse(int channel = -1, int step = 1) const;
  void save_log(const std::string& path, int channel) const;

 private:
  CpmConfig cfg_;
  std::uint64_t seed_;
  int start_ = 0;
  int slots_ = 0;
  int channels_ = 0;
  Eigen::MatrixXd gains_;
  std::vector<Predictor> preds_;
  std::vector<PretrainReport> reports_;
  std::vector<Eigen::MatrixXd> table_;  // per span slot: horizon x channels
  std::vector<double> rho_;             // per span slot
  std::vector<int> update_slots_;
  std::vector<std::vector<PredictionRecord>> records_;
};

}  // namespace dmca::cpm

#endif
