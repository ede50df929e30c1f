#ifndef DMCA_AGENT_NETWORKS_HPP
#define DMCA_AGENT_NETWORKS_HPP

#include <cstdint>

#include "dmca/nn/layers.hpp"

namespace dmca::agent {

// Policy head: state -> hidden -> hidden -> actions in (0,1).
nn::Mlp make_actor(const std::string& name, int state_dim, int action_dim,
                   int hidden, std::uint64_t seed);
// Value head: [state | action] -> hidden -> hidden -> scalar.
nn::Mlp make_critic(const std::string& name, int state_dim, int action_dim,
                    int hidden, std::uint64_t seed);

nn::Vec concat_state_action(const nn::Vec& state, const nn::Vec& action);
double critic_value(nn::Mlp& critic, const nn::Vec& state, const nn::Vec& action);

// Exploration noise: x <- x + theta*(mu - x) + sigma*N(0,1), per component.
class OuNoise {
 public:
  OuNoise(int dim, double theta, double sigma, double mu, std::uint64_t seed);

  void reset();
  const nn::Vec& step();
  const nn::Vec& value() const { return x_; }
  void set_value(const nn::Vec& x);

 private:
  double theta_, sigma_, mu_;
  nn::Vec x_;
  std::mt19937_64 rng_;
  std::normal_distribution<double> gauss_;
};

}  // namespace dmca::agent

#endif
