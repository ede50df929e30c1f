#include "dmca/nn/optimizer.hpp"

#include <cmath>

#include "dmca/util/errors.hpp"

namespace dmca::nn {

double clip_global_norm(const ParamRefs& params, double max_norm) {
  double sq = 0.0;
  for (const Param* p : params) sq += p->grad.squaredNorm();
  double norm = std::sqrt(sq);
  if (max_norm > 0.0 && norm > max_norm) {
    const double scale = max_norm / norm;
    for (Param* p : params) p->grad *= scale;
  }
  return norm;
}

bool GradientDescent::step(const ParamRefs& params) {
  if (!grads_finite(params)) return false;  // poisoned update: skip
  clip_global_norm(params, clip_norm_);
  for (Param* p : params) p->value -= lr_ * p->grad;
  ++steps_;
  return true;
}

bool Adam::step(const ParamRefs& params) {
  if (!grads_finite(params)) return false;  // poisoned update: skip
  if (m_.empty()) {
    for (const Param* p : params) {
      m_.emplace_back(Mat::Zero(p->value.rows(), p->value.cols()));
      v_.emplace_back(Mat::Zero(p->value.rows(), p->value.cols()));
    }
  }
  if (m_.size() != params.size()) throw StateError("Adam: parameter list changed size");
  clip_global_norm(params, clip_norm_);
  ++steps_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(steps_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(steps_));
  for (size_t i = 0; i < params.size(); ++i) {
    Param* p = params[i];
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * p->grad;
    v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * p->grad.cwiseProduct(p->grad);
    Mat mhat = m_[i] / bc1;
    Mat vhat = v_[i] / bc2;
    p->value.array() -= lr_ * mhat.array() / (vhat.array().sqrt() + eps_);
  }
  return true;
}

}  // namespace dmca::nn
