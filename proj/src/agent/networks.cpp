#include "dmca/agent/networks.hpp"

#include "dmca/util/errors.hpp"

namespace dmca::agent {

nn::Mlp make_actor(const std::string& name, int state_dim, int action_dim,
                   int hidden, std::uint64_t seed) {
  if (state_dim < 1 || action_dim < 1 || hidden < 1)
    throw ConfigError("network dimensions must be positive");
  return nn::Mlp(name, {state_dim, hidden, hidden, action_dim},
                 {nn::Activation::Relu, nn::Activation::Relu,
                  nn::Activation::Sigmoid},
                 seed);
}

nn::Mlp make_critic(const std::string& name, int state_dim, int action_dim,
                    int hidden, std::uint64_t seed) {
  if (state_dim < 1 || action_dim < 1 || hidden < 1)
    throw ConfigError("network dimensions must be positive");
  return nn::Mlp(name, {state_dim + action_dim, hidden, hidden, 1},
                 {nn::Activation::Relu, nn::Activation::Relu,
                  nn::Activation::Linear},
                 seed);
}

nn::Vec concat_state_action(const nn::Vec& state, const nn::Vec& action) {
  nn::Vec x(state.size() + action.size());
  x << state, action;
  return x;
}

double critic_value(nn::Mlp& critic, const nn::Vec& state, const nn::Vec& action) {
  return critic.forward(concat_state_action(state, action))[0];
}

OuNoise::OuNoise(int dim, double theta, double sigma, double mu, std::uint64_t seed)
    : theta_(theta), sigma_(sigma), mu_(mu), x_(nn::Vec::Constant(dim, mu)),
      rng_(seed), gauss_(0.0, 1.0) {
  if (dim < 1) throw ConfigError("noise dimension must be positive");
  if (theta < 0.0 || sigma < 0.0)
    throw ConfigError("noise parameters cannot be negative");
}

void OuNoise::reset() { x_.setConstant(mu_); }

void OuNoise::set_value(const nn::Vec& x) {
  if (x.size() != x_.size()) throw StateError("noise state has wrong dimension");
  x_ = x;
}

const nn::Vec& OuNoise::step() {
  for (int i = 0; i < x_.size(); ++i)
    x_[i] += theta_ * (mu_ - x_[i]) + sigma_ * gauss_(rng_);
  return x_;
}

}  // namespace dmca::agent
