#include "dmca/nn/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "dmca/util/errors.hpp"

namespace dmca::nn {

double grad_check(const ParamRefs& params, const std::function<double()>& loss_fn,
                  const std::function<double()>& grad_fn, double epsilon) {
  if (param_count(params) >= 10000)
    throw ConfigError("grad_check: model too large (test-scale only)");

  zero_grads(params);
  grad_fn();
  std::vector<Mat> analytic;
  analytic.reserve(params.size());
  for (const Param* p : params) analytic.push_back(p->grad);

  double worst = 0.0;
  for (size_t i = 0; i < params.size(); ++i) {
    Mat& value = params[i]->value;
    for (long r = 0; r < value.rows(); ++r) {
      for (long c = 0; c < value.cols(); ++c) {
        const double saved = value(r, c);
        value(r, c) = saved + epsilon;
        const double up = loss_fn();
        value(r, c) = saved - epsilon;
        const double down = loss_fn();
        value(r, c) = saved;
        const double numeric = (up - down) / (2.0 * epsilon);
        const double a = analytic[i](r, c);
        const double rel = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-8});
        worst = std::max(worst, rel);
      }
    }
  }
  return worst;
}

}  // namespace dmca::nn
