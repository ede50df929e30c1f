#ifndef DMCA_NN_PARAM_HPP
#define DMCA_NN_PARAM_HPP

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace dmca::nn {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// One named parameter array with a gradient slot of identical shape.
struct Param {
  std::string name;
  Mat value;
  Mat grad;

  Param(std::string n, int rows, int cols)
      : name(std::move(n)), value(Mat::Zero(rows, cols)), grad(Mat::Zero(rows, cols)) {}
};

using ParamRefs = std::vector<Param*>;

inline void zero_grads(const ParamRefs& params) {
  for (Param* p : params) p->grad.setZero();
}

inline bool grads_finite(const ParamRefs& params) {
  for (const Param* p : params)
    if (!p->grad.allFinite()) return false;
  return true;
}

inline bool values_finite(const ParamRefs& params) {
  for (const Param* p : params)
    if (!p->value.allFinite()) return false;
  return true;
}

inline long param_count(const ParamRefs& params) {
  long n = 0;
  for (const Param* p : params) n += p->value.size();
  return n;
}

// target <- tau * online + (1 - tau) * target, elementwise over matching params.
void soft_update(const ParamRefs& target, const ParamRefs& online, double tau);

// Copies values (not grads) online -> target.
void copy_values(const ParamRefs& target, const ParamRefs& online);

// Checkpoint file: versioned text header, then one block per parameter
// (`param <name> <rows> <cols>` followed by whitespace-separated values that
// round-trip doubles exactly). `meta` lines carry free-form key/value pairs.
void save_params(const std::string& path, const ParamRefs& params,
                 const std::vector<std::pair<std::string, std::string>>& meta = {});
std::vector<std::pair<std::string, std::string>> load_params(const std::string& path,
                                                             const ParamRefs& params);

}  // namespace dmca::nn

#endif
