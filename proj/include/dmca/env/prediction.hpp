#ifndef DMCA_ENV_PREDICTION_HPP
#define DMCA_ENV_PREDICTION_HPP

namespace dmca::env {

// Supplier of future channel-gain estimates. `step` is the look-ahead in
// slots, 1..horizon(); the returned value estimates the gain at slot+step
// using only information available at `slot`.
class PredictionSource {
 public:
  virtual ~PredictionSource() = default;
  virtual int horizon() const = 0;
  virtual double predicted_gain(int slot, int step, int channel) const = 0;
  virtual double confidence(int slot) const = 0;
};

}  // namespace dmca::env

#endif
