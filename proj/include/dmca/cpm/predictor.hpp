#ifndef DMCA_CPM_PREDICTOR_HPP
#define DMCA_CPM_PREDICTOR_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "dmca/nn/layers.hpp"

namespace dmca::cpm {

struct CpmConfig {
  int time_step = 5;     // history values per input window
  int horizon = 1;       // 1 = single-point, >1 = recursive multi-point
  int units = 5;         // LSTM width
  int il_window = 200;   // samples per incremental update
  double learning_rate = 0.06;
  int pretrain_iterations = 200;
  int il_iterations = 1;
  double train_fraction = 0.75;  // of the pretraining series; rest validates
  int confidence_window = 50;
  double confidence_max = 0.95;
  double confidence_default = 0.5;

  void validate() const;
};

struct PretrainReport {
  std::vector<double> loss_curve;  // training MSE per iteration, normalized domain
  double val_mse = 0.0;            // raw domain
  double val_nmse = 0.0;
  int train_samples = 0;
  int val_samples = 0;
};

struct PredictionRecord {
  int slot = 0;  // slot the prediction targets
  int step = 0;  // look-ahead it was made with
  double predicted = 0.0;
  double realized = 0.0;
  double sq_error = 0.0;
  bool realized_known = false;
};

// Scalar-series predictor: an LSTM unrolled over the input window followed by
// a linear read-out, trained on squared one-step error. Inputs are mapped to
// [0,1] with the min/max of the pretraining series; the same map is applied
// at prediction time and inverted on outputs.
class Predictor {
 public:
  Predictor(const CpmConfig& cfg, std::uint64_t seed);

  PretrainReport pretrain(const std::vector<double>& history);
  // Runs the configured iterations on exactly the latest il_window values.
  // A shorter window defers the update and returns false.
  bool il_update(const std::vector<double>& latest);

  double predict_single(const std::vector<double>& last_window);
  // Recursive self-feeding prediction, `steps` values ahead.
  std::vector<double> predict_multi(const std::vector<double>& last_window, int steps);

  const CpmConfig& config() const { return cfg_; }
  bool pretrained() const { return pretrained_; }
  double norm_min() const { return norm_min_; }
  double norm_max() const { return norm_max_; }

  nn::ParamRefs params();
  void save(const std::string& path) const;
  void load(const std::string& path);

 private:
  double normalize(double v) const;
  double denormalize(double v) const;
  double forward_norm(const std::vector<double>& window_norm, bool record);
  // One full-batch gradient iteration over the given target indices; returns
  // the mean squared error of that pass.
  double train_iteration(const std::vector<double>& series_norm,
                         const std::vector<int>& targets);

  CpmConfig cfg_;
  nn::LstmCell lstm_;
  nn::DenseLayer head_;
  double norm_min_ = 0.0;
  double norm_max_ = 1.0;
  bool pretrained_ = false;
};

// Confidence weight for prediction-augmented learning targets: 1 minus the
// normalized mean squared error over the supplied realized records, clamped
// to [0, confidence_max]. Fewer than confidence_window records fall back to
// confidence_default.
double prediction_confidence(const std::vector<PredictionRecord>& window,
                             const CpmConfig& cfg);

}  // namespace dmca::cpm

#endif
