#ifndef DMCA_AGENT_REPLAY_HPP
#define DMCA_AGENT_REPLAY_HPP

#include <Eigen/Dense>
#include <random>
#include <vector>

namespace dmca::agent {

struct Transition {
  Eigen::VectorXd state;
  Eigen::VectorXd action;  // raw continuous action, before decoding
  double reward = 0.0;
  Eigen::VectorXd next_state;
  Eigen::VectorXd predicted_next_state;  // zeros when prediction is off
  double confidence = 0.0;               // weight of the predicted term, at storage time
};

// Fixed-capacity ring; eviction strictly oldest-first.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(int capacity);

  void push(Transition t);
  int size() const { return static_cast<int>(items_.size()); }
  int capacity() const { return capacity_; }
  const Transition& at(int logical) const;  // 0 = oldest

  // Distinct uniform picks; requires n <= size.
  std::vector<const Transition*> sample(int n, std::mt19937_64& rng) const;

 private:
  int capacity_;
  int head_ = 0;  // index of the oldest element once full
  std::vector<Transition> items_;
};

}  // namespace dmca::agent

#endif
