#ifndef DMCA_NN_GRAD_CHECK_HPP
#define DMCA_NN_GRAD_CHECK_HPP

#include <functional>

#include "dmca/nn/param.hpp"

namespace dmca::nn {

// Central-difference verification of analytic gradients.
//
// grad_fn computes the loss and fills parameter gradients via backprop;
// loss_fn recomputes the loss only (no recording, no gradient writes).
// Returns max over parameter elements of
//   |analytic - numeric| / max(|analytic|, |numeric|, 1e-8).
// Intended for test-scale models; refuses models with >= 10^4 parameters.
double grad_check(const ParamRefs& params, const std::function<double()>& loss_fn,
                  const std::function<double()>& grad_fn, double epsilon = 1e-5);

}  // namespace dmca::nn

#endif
