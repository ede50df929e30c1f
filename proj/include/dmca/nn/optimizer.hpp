#ifndef DMCA_NN_OPTIMIZER_HPP
#define DMCA_NN_OPTIMIZER_HPP

#include <vector>

#include "dmca/nn/param.hpp"

namespace dmca::nn {

// Scales gradients in place so their global L2 norm is at most max_norm.
// Returns the norm before clipping. max_norm <= 0 disables clipping.
double clip_global_norm(const ParamRefs& params, double max_norm);

// Plain gradient descent. step() returns false (and leaves parameters
// untouched) when any gradient is non-finite.
class GradientDescent {
 public:
  explicit GradientDescent(double lr, double clip_norm = 0.0) : lr_(lr), clip_norm_(clip_norm) {}

  bool step(const ParamRefs& params);
  long steps() const { return steps_; }
  double learning_rate() const { return lr_; }
  void set_learning_rate(double lr) { lr_ = lr; }

 private:
  double lr_;
  double clip_norm_;
  long steps_ = 0;
};

// Adaptive-moment estimation with bias correction.
class Adam {
 public:
  explicit Adam(double lr, double clip_norm = 0.0, double beta1 = 0.9, double beta2 = 0.999,
                double eps = 1e-8)
      : lr_(lr), clip_norm_(clip_norm), beta1_(beta1), beta2_(beta2), eps_(eps) {}

  bool step(const ParamRefs& params);
  long steps() const { return steps_; }
  double learning_rate() const { return lr_; }
  void set_learning_rate(double lr) { lr_ = lr; }

 private:
  double lr_;
  double clip_norm_;
  double beta1_, beta2_, eps_;
  long steps_ = 0;
  std::vector<Mat> m_, v_;  // lazily sized to match params on first step
};

}  // namespace dmca::nn

#endif
