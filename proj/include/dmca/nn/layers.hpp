#ifndef DMCA_NN_LAYERS_HPP
#define DMCA_NN_LAYERS_HPP

#include <random>
#include <string>
#include <vector>

#include "dmca/nn/param.hpp"

namespace dmca::nn {

enum class Activation { Linear, Relu, Tanh, Sigmoid };

Activation activation_from_string(const std::string& s);

// Fully connected layer with a LIFO tape of recorded forward passes.
// backward() consumes the most recent recording, accumulates parameter
// gradients and returns the gradient w.r.t. the layer input.
class DenseLayer {
 public:
  DenseLayer(std::string name, int in_dim, int out_dim, Activation act, std::mt19937_64& rng);

  Vec forward(const Vec& x);
  Vec backward(const Vec& dy);

  int in_dim() const { return static_cast<int>(weight_.value.cols()); }
  int out_dim() const { return static_cast<int>(weight_.value.rows()); }
  ParamRefs params() { return {&weight_, &bias_}; }
  Param& weight() { return weight_; }
  Param& bias() { return bias_; }

  void set_recording(bool on) { recording_ = on; }
  void clear_tape() { tape_.clear(); }
  size_t tape_size() const { return tape_.size(); }

 private:
  Param weight_;  // out_dim x in_dim
  Param bias_;    // out_dim x 1
  Activation act_;
  bool recording_ = true;
  struct Rec {
    Vec x;
    Vec pre;
  };
  std::vector<Rec> tape_;
};

// Cell state after one recurrence step. Gate activations are sigmoid outputs.
struct LstmState {
  Vec cell;
  Vec hidden;
  Vec gate_in;
  Vec gate_forget;
  Vec gate_out;

  static LstmState zero(int units);
};

struct LstmGrad {
  Vec dx;
  Vec dh_prev;
  Vec dc_prev;
};

// Standard LSTM recurrence. All four gate blocks are stored in one stacked
// weight pair [input; forget; output; candidate], forget bias initialized
// to 1.0. Backward walks the tape in reverse (backpropagation through time).
class LstmCell {
 public:
  LstmCell(std::string name, int in_dim, int units, std::mt19937_64& rng);

  LstmState forward(const Vec& x, const LstmState& prev);
  LstmGrad backward(const Vec& dh, const Vec& dc);

  int in_dim() const { return in_dim_; }
  int units() const { return units_; }
  ParamRefs params() { return {&wx_, &wh_, &bias_}; }

  void set_recording(bool on) { recording_ = on; }
  void clear_tape() { tape_.clear(); }
  size_t tape_size() const { return tape_.size(); }

 private:
  int in_dim_, units_;
  Param wx_;    // 4*units x in_dim
  Param wh_;    // 4*units x units
  Param bias_;  // 4*units x 1
  bool recording_ = true;
  struct Rec {
    Vec x, h_prev, c_prev;
    Vec gi, gf, go, gc;  // gate activations; gc = tanh candidate
    Vec c, tanh_c;
  };
  std::vector<Rec> tape_;
};

// Plain feed-forward stack used for the actor and critic heads.
class Mlp {
 public:
  Mlp(std::string name, const std::vector<int>& dims, const std::vector<Activation>& acts,
      std::uint64_t seed);

  Vec forward(const Vec& x);
  // Returns gradient w.r.t. the network input.
  Vec backward(const Vec& dy);

  int in_dim() const { return layers_.front().in_dim(); }
  int out_dim() const { return layers_.back().out_dim(); }
  ParamRefs params();
  void zero_grads() { nn::zero_grads(params()); }
  void set_recording(bool on);
  void clear_tape();

 private:
  std::vector<DenseLayer> layers_;
};

}  // namespace dmca::nn

#endif
