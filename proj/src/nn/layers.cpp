#include "dmca/nn/layers.hpp"

#include <cmath>

#include "dmca/util/errors.hpp"

namespace dmca::nn {

namespace {

Vec apply_act(Activation act, const Vec& pre) {
  switch (act) {
    case Activation::Linear:
      return pre;
    case Activation::Relu:
      return pre.cwiseMax(0.0);
    case Activation::Tanh:
      return pre.array().tanh().matrix();
    case Activation::Sigmoid:
      return (1.0 / (1.0 + (-pre.array()).exp())).matrix();
  }
  throw StateError("unknown activation");
}

// Elementwise d(activation)/d(pre), evaluated from the preactivation.
Vec act_derivative(Activation act, const Vec& pre) {
  switch (act) {
    case Activation::Linear:
      return Vec::Ones(pre.size());
    case Activation::Relu:
      return (pre.array() > 0.0).cast<double>().matrix();
    case Activation::Tanh: {
      Vec t = pre.array().tanh().matrix();
      return (1.0 - t.array().square()).matrix();
    }
    case Activation::Sigmoid: {
      Vec s = (1.0 / (1.0 + (-pre.array()).exp())).matrix();
      return (s.array() * (1.0 - s.array())).matrix();
    }
  }
  throw StateError("unknown activation");
}

// Uniform +-sqrt(6/(fan_in+fan_out)).
void init_uniform(Mat& m, int fan_in, int fan_out, std::mt19937_64& rng) {
  const double bound = std::sqrt(6.0 / (fan_in + fan_out));
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (long r = 0; r < m.rows(); ++r)
    for (long c = 0; c < m.cols(); ++c) m(r, c) = dist(rng);
}

Vec sigmoid_vec(const Vec& v) {
  return (1.0 / (1.0 + (-v.array()).exp())).matrix();
}

}  // namespace

Activation activation_from_string(const std::string& s) {
  if (s == "linear") return Activation::Linear;
  if (s == "relu") return Activation::Relu;
  if (s == "tanh") return Activation::Tanh;
  if (s == "sigmoid") return Activation::Sigmoid;
  throw ConfigError("unknown activation: " + s);
}

DenseLayer::DenseLayer(std::string name, int in_dim, int out_dim, Activation act,
                       std::mt19937_64& rng)
    : weight_(name + ".w", out_dim, in_dim), bias_(name + ".b", out_dim, 1), act_(act) {
  init_uniform(weight_.value, in_dim, out_dim, rng);
}

Vec DenseLayer::forward(const Vec& x) {
  if (x.size() != weight_.value.cols())
    throw StateError(weight_.name + ": input length " + std::to_string(x.size()) +
                     " does not match layer input dimension " +
                     std::to_string(weight_.value.cols()));
  Vec pre = weight_.value * x + bias_.value.col(0);
  if (recording_) tape_.push_back({x, pre});
  return apply_act(act_, pre);
}

Vec DenseLayer::backward(const Vec& dy) {
  if (tape_.empty()) throw StateError(weight_.name + ": backward on a stale tape");
  Rec rec = std::move(tape_.back());
  tape_.pop_back();
  Vec dpre = dy.cwiseProduct(act_derivative(act_, rec.pre));
  weight_.grad.noalias() += dpre * rec.x.transpose();
  bias_.grad.col(0) += dpre;
  return weight_.value.transpose() * dpre;
}

LstmState LstmState::zero(int units) {
  LstmState s;
  s.cell = Vec::Zero(units);
  s.hidden = Vec::Zero(units);
  s.gate_in = Vec::Constant(units, 0.5);
  s.gate_forget = Vec::Constant(units, 0.5);
  s.gate_out = Vec::Constant(units, 0.5);
  return s;
}

LstmCell::LstmCell(std::string name, int in_dim, int units, std::mt19937_64& rng)
    : in_dim_(in_dim),
      units_(units),
      wx_(name + ".wx", 4 * units, in_dim),
      wh_(name + ".wh", 4 * units, units),
      bias_(name + ".b", 4 * units, 1) {
  init_uniform(wx_.value, in_dim + units, units, rng);
  init_uniform(wh_.value, in_dim + units, units, rng);
  bias_.value.block(units, 0, units, 1).setConstant(1.0);  // forget gate
}

LstmState LstmCell::forward(const Vec& x, const LstmState& prev) {
  if (x.size() != in_dim_) throw StateError(wx_.name + ": input dimension mismatch");
  if (prev.cell.size() != units_ || prev.hidden.size() != units_)
    throw StateError(wx_.name + ": previous state has wrong width");
  if (!prev.cell.allFinite() || !prev.hidden.allFinite())
    throw StateError(wx_.name + ": corrupted previous state (non-finite)");

  Vec pre = wx_.value * x + wh_.value * prev.hidden + bias_.value.col(0);
  Vec gi = sigmoid_vec(pre.segment(0, units_));
  Vec gf = sigmoid_vec(pre.segment(units_, units_));
  Vec go = sigmoid_vec(pre.segment(2 * units_, units_));
  Vec gc = pre.segment(3 * units_, units_).array().tanh().matrix();

  LstmState next;
  next.cell = gf.cwiseProduct(prev.cell) + gi.cwiseProduct(gc);
  Vec tanh_c = next.cell.array().tanh().matrix();
  next.hidden = go.cwiseProduct(tanh_c);
  next.gate_in = gi;
  next.gate_forget = gf;
  next.gate_out = go;

  if (recording_) tape_.push_back({x, prev.hidden, prev.cell, gi, gf, go, gc, next.cell, tanh_c});
  return next;
}

LstmGrad LstmCell::backward(const Vec& dh, const Vec& dc_in) {
  if (tape_.empty()) throw StateError(wx_.name + ": backward on a stale tape");
  Rec rec = std::move(tape_.back());
  tape_.pop_back();

  Vec dgo = dh.cwiseProduct(rec.tanh_c);
  Vec dc = dc_in + dh.cwiseProduct(rec.go).cwiseProduct(
                       (1.0 - rec.tanh_c.array().square()).matrix());
  Vec dgf = dc.cwiseProduct(rec.c_prev);
  Vec dgi = dc.cwiseProduct(rec.gc);
  Vec dgc = dc.cwiseProduct(rec.gi);

  Vec dpre(4 * units_);
  dpre.segment(0, units_) = dgi.cwiseProduct(rec.gi).cwiseProduct((1.0 - rec.gi.array()).matrix());
  dpre.segment(units_, units_) =
      dgf.cwiseProduct(rec.gf).cwiseProduct((1.0 - rec.gf.array()).matrix());
  dpre.segment(2 * units_, units_) =
      dgo.cwiseProduct(rec.go).cwiseProduct((1.0 - rec.go.array()).matrix());
  dpre.segment(3 * units_, units_) = dgc.cwiseProduct((1.0 - rec.gc.array().square()).matrix());

  wx_.grad.noalias() += dpre * rec.x.transpose();
  wh_.grad.noalias() += dpre * rec.h_prev.transpose();
  bias_.grad.col(0) += dpre;

  LstmGrad g;
  g.dx = wx_.value.transpose() * dpre;
  g.dh_prev = wh_.value.transpose() * dpre;
  g.dc_prev = dc.cwiseProduct(rec.gf);
  return g;
}

Mlp::Mlp(std::string name, const std::vector<int>& dims, const std::vector<Activation>& acts,
         std::uint64_t seed) {
  if (dims.size() < 2 || acts.size() != dims.size() - 1)
    throw ConfigError("Mlp: dims must list >=2 sizes and one activation per layer");
  std::mt19937_64 rng(seed);
  for (size_t i = 0; i + 1 < dims.size(); ++i)
    layers_.emplace_back(name + ".l" + std::to_string(i), dims[i], dims[i + 1], acts[i], rng);
}

Vec Mlp::forward(const Vec& x) {
  Vec h = x;
  for (auto& layer : layers_) h = layer.forward(h);
  return h;
}

Vec Mlp::backward(const Vec& dy) {
  Vec d = dy;
  for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) d = it->backward(d);
  return d;
}

ParamRefs Mlp::params() {
  ParamRefs refs;
  for (auto& layer : layers_)
    for (Param* p : layer.params()) refs.push_back(p);
  return refs;
}

void Mlp::set_recording(bool on) {
  for (auto& layer : layers_) layer.set_recording(on);
}

void Mlp::clear_tape() {
  for (auto& layer : layers_) layer.clear_tape();
}

}  // namespace dmca::nn
