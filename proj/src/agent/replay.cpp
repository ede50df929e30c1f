#include "dmca/agent/replay.hpp"

#include <numeric>

#include "dmca/util/errors.hpp"

namespace dmca::agent {

ReplayBuffer::ReplayBuffer(int capacity) : capacity_(capacity) {
  if (capacity < 1) throw ConfigError("replay capacity must be positive");
  items_.reserve(capacity);
}

void ReplayBuffer::push(Transition t) {
  if (size() < capacity_) {
    items_.push_back(std::move(t));
    return;
  }
  items_[head_] = std::move(t);
  head_ = (head_ + 1) % capacity_;
}

const Transition& ReplayBuffer::at(int logical) const {
  if (logical < 0 || logical >= size())
    throw StateError("replay index out of range");
  return items_[(head_ + logical) % size()];
}

std::vector<const Transition*> ReplayBuffer::sample(int n,
                                                    std::mt19937_64& rng) const {
  if (n < 1) throw ConfigError("sample size must be positive");
  if (n > size()) throw StateError("sample larger than the buffer content");
  std::vector<int> idx(size());
  std::iota(idx.begin(), idx.end(), 0);
  std::vector<const Transition*> out;
  out.reserve(n);
  for (int k = 0; k < n; ++k) {
    std::uniform_int_distribution<int> pick(k, size() - 1);
    std::swap(idx[k], idx[pick(rng)]);
    out.push_back(&items_[idx[k]]);
  }
  return out;
}

}  // namespace dmca::agent
